/*
 * Copyright 2026 The tilebin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "tilebin/config.hpp"
#include "tilebin/error.hpp"
#include "tilebin/pipeline.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitConfig = 3;

void print_report(const tilebin::StageReport& report) {
  for (const auto& c : report.categories) {
    if (c.category == "*") continue;
    std::cout << tilebin::to_string(report.split) << '.' << tilebin::to_string(report.stage)
              << "  " << c.category << "  images=" << c.images << " items=" << c.items
              << " digest=" << c.output_digest.substr(0, 16) << '\n';
  }
  std::cout << tilebin::to_string(report.split) << '.' << tilebin::to_string(report.stage)
            << "  chain=" << report.chain_digest << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tilebin: tiled anomaly-map merging, binarization and evaluation"};
  std::string stage_name;
  std::string config_path;
  tilebin::RunOptions options;
  std::string input;
  std::string output;
  std::optional<std::uint64_t> seed;

  app.add_option("stage", stage_name,
                 "tile | augment | score | merge | binarize | refine | eval | all")
      ->required();
  app.add_option("--config", config_path, "Pipeline config (JSON)")->required();
  app.add_option("--input", input, "Dataset root")->required();
  app.add_option("--output", output, "Artifact root")->required();
  app.add_option("--seed", seed, "Override every category's augmentation seed");
  app.add_option("--workers", options.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--train", options.train, "Run tile/score on the training split (all: train first)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  options.input = input;
  options.output = output;
  options.seed = seed;
  options.log = &std::cerr;

  const bool all = stage_name == "all";
  const auto stage = tilebin::parse_stage(stage_name);
  if (!all && !stage) {
    std::cerr << "error: unknown stage '" << stage_name << "'\n";
    return kExitConfig;
  }

  try {
    const tilebin::PipelineConfig config = tilebin::load_config(config_path);
    if (all) {
      const tilebin::Summary summary = tilebin::run_all(config, options);
      std::cout << tilebin::format_summary(summary);
    } else {
      print_report(tilebin::run_stage(*stage, config, options));
      if (*stage == tilebin::Stage::kEval) {
        std::cout << tilebin::format_summary(tilebin::read_summary(options.output));
      }
    }
  } catch (const tilebin::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tilebin::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const tilebin::NotFound& e) {
    std::cerr << "precondition error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
