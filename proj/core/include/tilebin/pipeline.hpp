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
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tilebin/config.hpp"
#include "tilebin/digest.hpp"
#include "tilebin/segmenter.hpp"

namespace tilebin {

enum class Stage { kTile, kAugment, kScore, kMerge, kBinarize, kRefine, kEval };
enum class Split { kTrain, kTest };

std::string_view to_string(Stage stage);
std::string_view to_string(Split split);
std::optional<Stage> parse_stage(std::string_view text);

/// Environment variable holding the segmenter endpoint for the refine stage.
inline constexpr const char* kSegmenterEnv = "TILEBIN_SEGMENTER";

// Input layout, per category:
//   <input>/<category>/train/<id>.png          defect-free training images
//   <input>/<category>/test/<id>.png           evaluation images
//   <input>/<category>/ground_truth/<id>.png   optional; absent = good image
//
// Output layout, per category (<split> is train or test):
//   <output>/<category>/<split>/tiles/{<key>.png, manifest.jsonl}
//   <output>/<category>/train/tiles/{<key>_aug.png, augment_manifest.jsonl}
//   <output>/<category>/model/stat_model.bin
//   <output>/<category>/test/maps/<key>.amap
//   <output>/<category>/test/merged/<id>__merged.amap
//   <output>/<category>/test/masks/coarse/<id>.png, binarize.jsonl
//   <output>/<category>/test/masks/final/<id>.png, refine.jsonl
//   <output>/<category>/metrics.json
//   <output>/summary.json
//   <output>/reports/<split>.<stage>.json
struct RunOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::uint64_t> seed;  // overrides every category's augment seed
  int workers = 1;
  bool train = false;
  /// Overrides endpoint discovery in the refine stage.
  std::shared_ptr<Segmenter> segmenter;
  /// Used when `segmenter` is null; empty means read kSegmenterEnv.
  std::string segmenter_endpoint;
  std::ostream* log = nullptr;
};

struct CategoryStageReport {
  std::string category;
  std::size_t images = 0;
  std::size_t items = 0;  // tiles, maps or masks written
  double elapsed_ms = 0.0;
  std::vector<FileDigest> outputs;  // relative to the output root
  std::string output_digest;
  std::vector<std::string> warnings;
};

struct StageReport {
  Stage stage = Stage::kTile;
  Split split = Split::kTest;
  std::vector<CategoryStageReport> categories;
  /// Hash of this stage's outputs chained with the chain digests of every
  /// upstream report it consumed.
  std::string chain_digest;
  double elapsed_ms = 0.0;
};

struct MetricRow {
  std::string category;
  std::size_t images = 0;
  std::optional<double> aupro;
  std::optional<double> class_f1;
  std::optional<double> seg_f1;
  std::optional<double> f1_max;
  bool seg_f1_undefined_as_one = false;
};

struct Summary {
  std::vector<MetricRow> rows;
  MetricRow mean;  // mean over categories where each metric is defined
};

/// Runs one stage for every configured category. tile and score act on the
/// train split when options.train is set; augment always acts on train;
/// merge, binarize, refine and eval act on test.
///
/// Throws PreconditionError when an upstream artifact is absent or differs
/// from the digest its producing stage recorded.
StageReport run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options);

/// tile -> score -> merge -> binarize -> refine -> eval on the test split,
/// preceded by tile -> augment -> score on the train split when
/// options.train is set.
Summary run_all(const PipelineConfig& config, const RunOptions& options);

/// Reads <output>/summary.json written by the eval stage.
Summary read_summary(const std::filesystem::path& output);

/// Fixed-width table with one row per category and a mean row.
std::string format_summary(const Summary& summary);

}  // namespace tilebin
