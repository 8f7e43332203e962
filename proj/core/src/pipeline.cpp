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
#include "tilebin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tilebin/anomaly_map.hpp"
#include "tilebin/binarize.hpp"
#include "tilebin/error.hpp"
#include "tilebin/geometry.hpp"
#include "tilebin/merger.hpp"
#include "tilebin/metrics.hpp"
#include "tilebin/parallel.hpp"
#include "tilebin/refine.hpp"
#include "tilebin/scorer.hpp"

namespace tilebin {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kTile: return "tile";
    case Stage::kAugment: return "augment";
    case Stage::kScore: return "score";
    case Stage::kMerge: return "merge";
    case Stage::kBinarize: return "binarize";
    case Stage::kRefine: return "refine";
    case Stage::kEval: return "eval";
  }
  return "unknown";
}

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::optional<Stage> parse_stage(std::string_view text) {
  for (Stage s : {Stage::kTile, Stage::kAugment, Stage::kScore, Stage::kMerge, Stage::kBinarize,
                  Stage::kRefine, Stage::kEval}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("missing artifact " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json row_to_json(const MetricRow& row) {
  json j;
  j["category"] = row.category;
  j["images"] = row.images;
  j["aucpro_0.05"] = optional_number(row.aupro);
  j["class_f1"] = optional_number(row.class_f1);
  j["seg_f1"] = optional_number(row.seg_f1);
  j["f1_max"] = optional_number(row.f1_max);
  j["seg_f1_undefined_as_one"] = row.seg_f1_undefined_as_one;
  return j;
}

MetricRow row_from_json(const json& j) {
  MetricRow row;
  row.category = j.at("category").get<std::string>();
  row.images = j.at("images").get<std::size_t>();
  row.aupro = number_or_null(j, "aucpro_0.05");
  row.class_f1 = number_or_null(j, "class_f1");
  row.seg_f1 = number_or_null(j, "seg_f1");
  row.f1_max = number_or_null(j, "f1_max");
  row.seg_f1_undefined_as_one = j.value("seg_f1_undefined_as_one", false);
  return row;
}

json report_to_json(const StageReport& r) {
  json j;
  j["stage"] = to_string(r.stage);
  j["split"] = to_string(r.split);
  j["chain_digest"] = r.chain_digest;
  j["elapsed_ms"] = r.elapsed_ms;
  json cats = json::array();
  for (const auto& c : r.categories) {
    json cj;
    cj["category"] = c.category;
    cj["images"] = c.images;
    cj["items"] = c.items;
    cj["elapsed_ms"] = c.elapsed_ms;
    cj["output_digest"] = c.output_digest;
    json outs = json::array();
    for (const auto& f : c.outputs) outs.push_back({{"path", f.relative_path}, {"sha256", f.sha256}});
    cj["outputs"] = outs;
    cj["warnings"] = c.warnings;
    cats.push_back(cj);
  }
  j["categories"] = cats;
  return j;
}

StageReport report_from_json(const json& j) {
  StageReport r;
  r.stage = parse_stage(j.at("stage").get<std::string>()).value();
  r.split = j.at("split").get<std::string>() == "train" ? Split::kTrain : Split::kTest;
  r.chain_digest = j.at("chain_digest").get<std::string>();
  r.elapsed_ms = j.at("elapsed_ms").get<double>();
  for (const auto& cj : j.at("categories")) {
    CategoryStageReport c;
    c.category = cj.at("category").get<std::string>();
    c.images = cj.at("images").get<std::size_t>();
    c.items = cj.at("items").get<std::size_t>();
    c.elapsed_ms = cj.at("elapsed_ms").get<double>();
    c.output_digest = cj.at("output_digest").get<std::string>();
    for (const auto& f : cj.at("outputs")) {
      c.outputs.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    }
    c.warnings = cj.at("warnings").get<std::vector<std::string>>();
    r.categories.push_back(std::move(c));
  }
  return r;
}

struct TileGroup {
  std::string image_id;
  std::vector<TileRecord> records;
};

std::vector<TileGroup> group_by_image(const std::vector<TileRecord>& records) {
  std::vector<TileGroup> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.image_id, groups.size());
    if (inserted) groups.push_back({r.image_id, {}});
    groups[it->second].records.push_back(r);
  }
  return groups;
}

/// State for one stage invocation across categories.
class StageRun {
 public:
  StageRun(Stage stage, Split split, const PipelineConfig& config, const RunOptions& options)
      : stage_(stage), split_(split), config_(config), opt_(options) {}

  StageReport run();

 private:
  CategoryStageReport run_category(const CategoryConfig& cfg);

  void tile(const CategoryConfig& cfg, CategoryStageReport& rep);
  void augment(const CategoryConfig& cfg, CategoryStageReport& rep);
  void fit(const CategoryConfig& cfg, CategoryStageReport& rep);
  void score(const CategoryConfig& cfg, CategoryStageReport& rep);
  void merge(const CategoryConfig& cfg, CategoryStageReport& rep);
  void binarize(const CategoryConfig& cfg, CategoryStageReport& rep);
  void refine(const CategoryConfig& cfg, CategoryStageReport& rep);
  void eval(const CategoryConfig& cfg, CategoryStageReport& rep);

  fs::path category_dir(const std::string& cat) const { return opt_.output / cat; }
  fs::path split_dir(const std::string& cat, Split split) const {
    return category_dir(cat) / std::string(to_string(split));
  }
  fs::path input_dir(const std::string& cat, Split split) const {
    return opt_.input / cat / std::string(to_string(split));
  }
  fs::path manifest_path(const std::string& cat, Split split) const {
    return split_dir(cat, split) / "tiles" / "manifest.jsonl";
  }

  std::optional<StageReport> load_report(Split split, Stage stage) const;
  const CategoryStageReport& require(Split split, Stage stage, const std::string& cat);
  bool has_report(Split split, Stage stage, const std::string& cat) const;

  void finish(CategoryStageReport& rep, const std::vector<fs::path>& files) const;
  void warn(CategoryStageReport& rep, const std::string& message) const {
    if (opt_.log) *opt_.log << "warning: [" << rep.category << "] " << message << '\n';
    rep.warnings.push_back(message);
  }

  Stage stage_;
  Split split_;
  const PipelineConfig& config_;
  const RunOptions& opt_;
  std::map<std::string, StageReport> report_cache_;
  std::set<std::string> consumed_chains_;
  std::vector<MetricRow> rows_;
};

fs::path report_file(const fs::path& output, Split split, Stage stage) {
  return output / "reports" / (std::string(to_string(split)) + "." + std::string(to_string(stage)) + ".json");
}

std::optional<StageReport> StageRun::load_report(Split split, Stage stage) const {
  const fs::path path = report_file(opt_.output, split, stage);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    return report_from_json(json::parse(in));
  } catch (const std::exception& e) {
    throw PreconditionError("unreadable stage report " + path.string() + ": " + e.what());
  }
}

bool StageRun::has_report(Split split, Stage stage, const std::string& cat) const {
  const auto rep = load_report(split, stage);
  if (!rep) return false;
  return std::any_of(rep->categories.begin(), rep->categories.end(),
                     [&](const CategoryStageReport& c) { return c.category == cat; });
}

const CategoryStageReport& StageRun::require(Split split, Stage stage, const std::string& cat) {
  const std::string name = std::string(to_string(split)) + "." + std::string(to_string(stage));
  auto it = report_cache_.find(name);
  if (it == report_cache_.end()) {
    auto rep = load_report(split, stage);
    if (!rep) {
      throw PreconditionError("missing artifact " + report_file(opt_.output, split, stage).string() +
                              ": run the " + std::string(to_string(stage)) + " stage" +
                              (split == Split::kTrain ? " with --train" : "") + " first");
    }
    it = report_cache_.emplace(name, std::move(*rep)).first;
  }
  const StageReport& report = it->second;
  const auto cat_it = std::find_if(report.categories.begin(), report.categories.end(),
                                   [&](const CategoryStageReport& c) { return c.category == cat; });
  if (cat_it == report.categories.end()) {
    throw PreconditionError("stage report " + name + " has no entry for category '" + cat + "'");
  }
  for (const auto& f : cat_it->outputs) {
    const fs::path p = opt_.output / f.relative_path;
    if (!fs::exists(p)) throw PreconditionError("missing artifact " + p.string() + " (from " + name + ")");
    if (sha256_file(p) != f.sha256) {
      throw PreconditionError("artifact " + p.string() + " changed after the " + name +
                              " stage recorded it");
    }
  }
  consumed_chains_.insert(report.chain_digest);
  return *cat_it;
}

void StageRun::finish(CategoryStageReport& rep, const std::vector<fs::path>& files) const {
  rep.outputs.clear();
  for (const auto& f : files) {
    rep.outputs.push_back({fs::relative(f, opt_.output).generic_string(), sha256_file(f)});
  }
  std::sort(rep.outputs.begin(), rep.outputs.end(),
            [](const FileDigest& a, const FileDigest& b) { return a.relative_path < b.relative_path; });
  rep.output_digest = combine_digests(rep.outputs);
}

StageReport StageRun::run() {
  const auto start = Clock::now();
  if (!fs::is_directory(opt_.input)) {
    throw PreconditionError("input directory " + opt_.input.string() + " does not exist");
  }
  StageReport report;
  report.stage = stage_;
  report.split = split_;
  for (const auto& cfg : config_.categories) report.categories.push_back(run_category(cfg));

  if (stage_ == Stage::kEval) {
    Summary summary;
    summary.rows = rows_;
    summary.mean.category = "mean";
    auto mean_of = [&](auto member) -> std::optional<double> {
      double sum = 0.0;
      int n = 0;
      for (const auto& r : rows_) {
        if (r.*member) {
          sum += *(r.*member);
          ++n;
        }
      }
      return n == 0 ? std::nullopt : std::optional<double>(sum / n);
    };
    summary.mean.aupro = mean_of(&MetricRow::aupro);
    summary.mean.class_f1 = mean_of(&MetricRow::class_f1);
    summary.mean.seg_f1 = mean_of(&MetricRow::seg_f1);
    summary.mean.f1_max = mean_of(&MetricRow::f1_max);
    for (const auto& r : rows_) summary.mean.images += r.images;
    json j;
    json rows = json::array();
    for (const auto& r : summary.rows) rows.push_back(row_to_json(r));
    j["rows"] = rows;
    j["mean"] = row_to_json(summary.mean);
    const fs::path path = opt_.output / "summary.json";
    write_text(path, j.dump(2) + "\n");
    CategoryStageReport shared;
    shared.category = "*";
    finish(shared, {path});
    report.categories.push_back(std::move(shared));
  }

  std::string chain = std::string(to_string(split_)) + "." + std::string(to_string(stage_)) + "\n";
  for (const auto& c : report.categories) chain += c.category + "=" + c.output_digest + "\n";
  for (const auto& u : consumed_chains_) chain += "upstream=" + u + "\n";
  report.chain_digest = sha256_hex(chain);
  report.elapsed_ms = ms_since(start);
  write_text(report_file(opt_.output, split_, stage_), report_to_json(report).dump(2) + "\n");
  return report;
}

CategoryStageReport StageRun::run_category(const CategoryConfig& cfg) {
  const auto start = Clock::now();
  CategoryStageReport rep;
  rep.category = cfg.category;
  switch (stage_) {
    case Stage::kTile: tile(cfg, rep); break;
    case Stage::kAugment: augment(cfg, rep); break;
    case Stage::kScore:
      if (split_ == Split::kTrain) fit(cfg, rep); else score(cfg, rep);
      break;
    case Stage::kMerge: merge(cfg, rep); break;
    case Stage::kBinarize: binarize(cfg, rep); break;
    case Stage::kRefine: refine(cfg, rep); break;
    case Stage::kEval: eval(cfg, rep); break;
  }
  rep.elapsed_ms = ms_since(start);
  return rep;
}

void StageRun::tile(const CategoryConfig& cfg, CategoryStageReport& rep) {
  const fs::path src = input_dir(cfg.category, split_);
  const fs::path dst = split_dir(cfg.category, split_) / "tiles";
  fs::remove_all(dst);
  fs::create_directories(dst);
  if (!fs::is_directory(src)) warn(rep, "no input directory " + src.string());

  const auto images = list_pngs(src);
  std::vector<std::vector<TileRecord>> records(images.size());
  std::vector<std::vector<fs::path>> written(images.size());
  parallel_for(images.size(), opt_.workers, [&](std::size_t i) {
    const ImageBuffer image = read_png(images[i]);
    const std::string id = images[i].stem().string();
    const TilePlan plan = plan_tiles(image.width(), image.height(), cfg.window, cfg.overlap_fraction);
    records[i] = manifest_records(id, plan);
    for (const auto& rect : plan.tiles) {
      const fs::path out = dst / (tile_key(id, rect.row_index, rect.col_index) + ".png");
      write_png(out, crop_tile(image, rect, cfg.window));
      written[i].push_back(out);
    }
  });

  std::vector<TileRecord> all;
  std::vector<fs::path> files;
  for (std::size_t i = 0; i < images.size(); ++i) {
    all.insert(all.end(), records[i].begin(), records[i].end());
    files.insert(files.end(), written[i].begin(), written[i].end());
  }
  const fs::path manifest = dst / "manifest.jsonl";
  write_tile_manifest(manifest, all);
  files.push_back(manifest);
  rep.images = images.size();
  rep.items = all.size();
  finish(rep, files);
}

AugmentParams effective_augment(const CategoryConfig& cfg, const RunOptions& opt) {
  AugmentParams p = cfg.augment;
  if (opt.seed) p.seed = *opt.seed;
  return p;
}

void StageRun::augment(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTrain, Stage::kTile, cfg.category);
  const fs::path dir = split_dir(cfg.category, Split::kTrain) / "tiles";
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > 8 && name.ends_with("_aug.png")) fs::remove(e.path());
  }
  const auto records = read_tile_manifest(manifest_path(cfg.category, Split::kTrain));
  const AugmentParams params = effective_augment(cfg, opt_);
  validate(params);

  std::vector<AugmentRecord> draws(records.size());
  std::vector<std::optional<fs::path>> written(records.size());
  parallel_for(records.size(), opt_.workers, [&](std::size_t i) {
    draws[i] = draw_augmentation(params, i);
    if (!draws[i].applied) return;
    const auto& r = records[i];
    const std::string key = tile_key(r.image_id, r.row_index, r.col_index);
    const ImageBuffer tile = read_png(dir / (key + ".png"));
    const fs::path out = dir / (key + "_aug.png");
    write_png(out, apply_augmentation(tile, params, draws[i]));
    written[i] = out;
  });

  std::string sidecar;
  std::vector<fs::path> files;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    json j;
    j["tile"] = tile_key(r.image_id, r.row_index, r.col_index) + ".png";
    j["applied"] = draws[i].applied;
    j["lambda"] = draws[i].lambda;
    j["noise_seed"] = draws[i].noise_seed;
    sidecar += j.dump() + "\n";
    if (written[i]) {
      files.push_back(*written[i]);
      ++rep.items;
    }
  }
  const fs::path manifest = dir / "augment_manifest.jsonl";
  write_text(manifest, sidecar);
  files.push_back(manifest);
  rep.images = group_by_image(records).size();
  finish(rep, files);
}

void StageRun::fit(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTrain, Stage::kTile, cfg.category);
  const fs::path dir = split_dir(cfg.category, Split::kTrain) / "tiles";
  const auto records = read_tile_manifest(manifest_path(cfg.category, Split::kTrain));
  rep.images = group_by_image(records).size();
  if (cfg.scorer.type != ScorerType::kStat) {
    warn(rep, "scorer '" + std::string(to_string(cfg.scorer.type)) + "' has nothing to fit");
    finish(rep, {});
    return;
  }
  if (records.empty()) throw PreconditionError("no training tiles for category '" + cfg.category + "'");

  std::vector<bool> augmented(records.size(), false);
  if (has_report(Split::kTrain, Stage::kAugment, cfg.category)) {
    require(Split::kTrain, Stage::kAugment, cfg.category);
    const auto lines = read_lines(dir / "augment_manifest.jsonl");
    if (lines.size() != records.size()) {
      throw PreconditionError("augment manifest does not match the train tile manifest");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      augmented[i] = json::parse(lines[i]).at("applied").get<bool>();
    }
  } else {
    warn(rep, "no augment stage output; fitting on unaugmented tiles");
  }

  // Augmented copies join the originals rather than replacing them.
  std::vector<std::optional<ImageBuffer>> tiles(records.size());
  std::vector<std::optional<ImageBuffer>> extra(records.size());
  parallel_for(records.size(), opt_.workers, [&](std::size_t i) {
    const auto& r = records[i];
    const std::string key = tile_key(r.image_id, r.row_index, r.col_index);
    tiles[i] = read_png(dir / (key + ".png"));
    if (augmented[i]) extra[i] = read_png(dir / (key + "_aug.png"));
  });
  std::vector<TrainingTile> training;
  training.reserve(2 * records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const GridPosition pos{records[i].row_index, records[i].col_index};
    training.push_back({std::cref(*tiles[i]), pos});
    if (extra[i]) training.push_back({std::cref(*extra[i]), pos});
  }
  const StatModel model = fit_stat_scorer(training, cfg.model_resolution, opt_.workers);
  const fs::path out = category_dir(cfg.category) / "model" / "stat_model.bin";
  save_stat_model(out, model);
  rep.items = model.positions.size();
  finish(rep, {out});
}

void StageRun::score(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTest, Stage::kTile, cfg.category);
  const fs::path tiles_dir = split_dir(cfg.category, Split::kTest) / "tiles";
  const auto records = read_tile_manifest(manifest_path(cfg.category, Split::kTest));

  ScorerKind scorer = IntensityScorer{};
  switch (cfg.scorer.type) {
    case ScorerType::kStat: {
      require(Split::kTrain, Stage::kScore, cfg.category);
      const fs::path model_path = category_dir(cfg.category) / "model" / "stat_model.bin";
      if (!fs::exists(model_path)) {
        throw PreconditionError("missing artifact " + model_path.string() +
                                ": run the score stage with --train first");
      }
      scorer = StatScorer{std::make_shared<const StatModel>(load_stat_model(model_path))};
      break;
    }
    case ScorerType::kFile:
      if (!fs::is_directory(cfg.scorer.directory)) {
        throw PreconditionError("missing artifact " + cfg.scorer.directory.string() +
                                ": file scorer directory does not exist");
      }
      scorer = FileScorer{cfg.scorer.directory};
      break;
    case ScorerType::kIntensity:
      break;
  }

  const fs::path dst = split_dir(cfg.category, Split::kTest) / "maps";
  fs::remove_all(dst);
  fs::create_directories(dst);
  std::vector<fs::path> files(records.size());
  parallel_for(records.size(), opt_.workers, [&](std::size_t i) {
    const auto& r = records[i];
    const ImageBuffer tile = read_png(tiles_dir / (tile_key(r.image_id, r.row_index, r.col_index) + ".png"));
    const AnomalyMap map = score_tile(scorer, tile, r);
    files[i] = dst / tile_map_filename(r.image_id, r.row_index, r.col_index);
    write_amap(files[i], map);
  });
  rep.images = group_by_image(records).size();
  rep.items = records.size();
  finish(rep, files);
}

void StageRun::merge(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTest, Stage::kTile, cfg.category);
  require(Split::kTest, Stage::kScore, cfg.category);
  const fs::path test = split_dir(cfg.category, Split::kTest);
  const auto groups = group_by_image(read_tile_manifest(manifest_path(cfg.category, Split::kTest)));
  const fs::path dst = test / "merged";
  fs::remove_all(dst);
  fs::create_directories(dst);

  std::vector<fs::path> files(groups.size());
  parallel_for(groups.size(), opt_.workers, [&](std::size_t g) {
    const auto& group = groups[g];
    const auto& first = group.records.front();
    const TilePlan plan =
        plan_tiles(first.image_width, first.image_height, cfg.window, cfg.overlap_fraction);
    const auto expected = manifest_records(group.image_id, plan);
    if (expected != group.records) {
      throw PreconditionError("tile manifest for '" + group.image_id +
                              "' does not match the configured window/overlap");
    }
    std::vector<TileMap> maps;
    for (const auto& r : group.records) {
      const fs::path p = test / "maps" / tile_map_filename(r.image_id, r.row_index, r.col_index);
      if (fs::exists(p)) maps.push_back({r.rect(), read_amap(p)});
    }
    const AnomalyMap merged = merge_maps(maps, plan);
    files[g] = dst / merged_map_filename(group.image_id);
    write_amap(files[g], merged);
  });
  rep.images = groups.size();
  rep.items = groups.size();
  finish(rep, files);
}

void StageRun::binarize(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTest, Stage::kTile, cfg.category);
  require(Split::kTest, Stage::kMerge, cfg.category);
  const fs::path test = split_dir(cfg.category, Split::kTest);
  const auto groups = group_by_image(read_tile_manifest(manifest_path(cfg.category, Split::kTest)));
  const fs::path dst = test / "masks" / "coarse";
  fs::remove_all(dst);
  fs::create_directories(dst);

  std::vector<fs::path> files(groups.size());
  std::vector<std::string> lines(groups.size());
  parallel_for(groups.size(), opt_.workers, [&](std::size_t g) {
    const std::string& id = groups[g].image_id;
    const AnomalyMap map = read_amap(test / "merged" / merged_map_filename(id));
    const CoarseMask coarse = coarse_mask(map, cfg.mebin);
    // Union must contain both branches on every run.
    const bool superset = coarse.combined.contains(coarse.statistical.mask) &&
                          coarse.combined.contains(coarse.adaptive.mask);
    if (!superset) throw std::logic_error("binarize: OR fusion lost pixels for " + id);
    files[g] = dst / (id + ".png");
    write_mask_png(files[g], coarse.combined);
    json j;
    j["image_id"] = id;
    j["mean3std_threshold"] = *coarse.statistical.threshold;
    j["mebin_threshold"] = optional_number(coarse.adaptive.threshold);
    j["mebin_level"] = coarse.adaptive.level;
    j["mebin_run"] = {coarse.adaptive.run_low, coarse.adaptive.run_high};
    j["mean3std_pixels"] = coarse.statistical.mask.popcount();
    j["mebin_pixels"] = coarse.adaptive.mask.popcount();
    j["combined_pixels"] = coarse.combined.popcount();
    j["superset"] = superset;
    lines[g] = j.dump() + "\n";
  });
  std::string text;
  for (const auto& l : lines) text += l;
  const fs::path sidecar = test / "masks" / "binarize.jsonl";
  write_text(sidecar, text);
  files.push_back(sidecar);
  rep.images = groups.size();
  rep.items = groups.size();
  finish(rep, files);
}

void StageRun::refine(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTest, Stage::kTile, cfg.category);
  require(Split::kTest, Stage::kBinarize, cfg.category);
  const fs::path test = split_dir(cfg.category, Split::kTest);
  const auto groups = group_by_image(read_tile_manifest(manifest_path(cfg.category, Split::kTest)));
  const fs::path dst = test / "masks" / "final";
  fs::remove_all(dst);
  fs::create_directories(dst);

  std::shared_ptr<Segmenter> segmenter = opt_.segmenter;
  if (!segmenter && cfg.refine_mode != RefineMode::kSkip) {
    std::string endpoint = opt_.segmenter_endpoint;
    if (endpoint.empty()) {
      if (const char* env = std::getenv(kSegmenterEnv)) endpoint = env;
    }
    if (endpoint.empty()) {
      warn(rep, std::string("no segmenter endpoint configured (") + kSegmenterEnv +
                    "); using the null segmenter");
      segmenter = std::make_shared<NullSegmenter>();
    } else {
      segmenter = std::make_shared<SocketSegmenter>(endpoint);
    }
  }

  std::vector<fs::path> files(groups.size());
  std::vector<std::string> lines(groups.size());
  std::vector<std::string> failures(groups.size());
  parallel_for(groups.size(), opt_.workers, [&](std::size_t g) {
    const std::string& id = groups[g].image_id;
    const BinaryMask coarse = read_mask_png(test / "masks" / "coarse" / (id + ".png"));
    json j;
    j["image_id"] = id;
    j["mode"] = to_string(cfg.refine_mode);
    BinaryMask final_mask = coarse;
    std::size_t refined = 0;
    std::size_t fallback = 0;
    std::size_t failed = 0;
    if (cfg.refine_mode != RefineMode::kSkip) {
      const fs::path image_path = fs::absolute(input_dir(cfg.category, Split::kTest) / (id + ".png"));
      const ImageBuffer image = read_png(image_path);
      try {
        RefineOutcome out = refine_mask(coarse, image, *segmenter, cfg.refine_mode,
                                        {cfg.category + "/" + id, image_path.string(),
                                         cfg.segmenter_variant});
        final_mask = std::move(out.mask);
        for (BoxStatus s : out.box_status) {
          refined += s == BoxStatus::kRefined;
          fallback += s == BoxStatus::kFallback;
        }
      } catch (const RefineError& e) {
        failed = e.box_status().size();
        failures[g] = id + ": " + e.what() + "; kept the coarse mask";
      }
    }
    j["boxes"] = refined + fallback + failed;
    j["refined"] = refined;
    j["fallback"] = fallback;
    j["transport_failed"] = failed;
    files[g] = dst / (id + ".png");
    write_mask_png(files[g], final_mask);
    lines[g] = j.dump() + "\n";
  });
  for (const auto& f : failures) {
    if (!f.empty()) warn(rep, f);
  }
  std::string text;
  for (const auto& l : lines) text += l;
  const fs::path sidecar = test / "masks" / "refine.jsonl";
  write_text(sidecar, text);
  files.push_back(sidecar);
  rep.images = groups.size();
  rep.items = groups.size();
  finish(rep, files);
}

void StageRun::eval(const CategoryConfig& cfg, CategoryStageReport& rep) {
  require(Split::kTest, Stage::kTile, cfg.category);
  require(Split::kTest, Stage::kMerge, cfg.category);
  require(Split::kTest, Stage::kRefine, cfg.category);
  const fs::path test = split_dir(cfg.category, Split::kTest);
  const auto groups = group_by_image(read_tile_manifest(manifest_path(cfg.category, Split::kTest)));

  std::vector<std::optional<AnomalyMap>> maps(groups.size());
  std::vector<std::optional<BinaryMask>> preds(groups.size());
  std::vector<std::optional<BinaryMask>> gts(groups.size());
  parallel_for(groups.size(), opt_.workers, [&](std::size_t g) {
    const std::string& id = groups[g].image_id;
    maps[g] = read_amap(test / "merged" / merged_map_filename(id));
    preds[g] = read_mask_png(test / "masks" / "final" / (id + ".png"));
    const fs::path gt_path = opt_.input / cfg.category / "ground_truth" / (id + ".png");
    if (fs::exists(gt_path)) {
      gts[g] = read_mask_png(gt_path);
      if (gts[g]->width() != maps[g]->width() || gts[g]->height() != maps[g]->height()) {
        throw PreconditionError("ground truth " + gt_path.string() + " does not match the image size");
      }
    } else {
      gts[g] = BinaryMask(maps[g]->width(), maps[g]->height());
    }
  });

  std::vector<AnomalyMap> map_list;
  std::vector<BinaryMask> pred_list;
  std::vector<BinaryMask> gt_list;
  std::vector<double> scores;
  std::vector<ImageLabel> labels;
  json per_image = json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    scores.push_back(image_score(*maps[g]));
    labels.push_back(gts[g]->empty_mask() ? ImageLabel::kGood : ImageLabel::kAnomalous);
    per_image.push_back({{"image_id", groups[g].image_id},
                         {"label", labels.back() == ImageLabel::kGood ? "good" : "anomalous"},
                         {"image_score", scores.back()}});
    map_list.push_back(std::move(*maps[g]));
    pred_list.push_back(std::move(*preds[g]));
    gt_list.push_back(std::move(*gts[g]));
  }

  MetricRow row;
  row.category = cfg.category;
  row.images = groups.size();
  json extra;
  if (!groups.empty()) {
    const SegF1 seg = seg_f1(pred_list, gt_list);
    row.seg_f1 = seg.value;
    row.seg_f1_undefined_as_one = seg.undefined_as_one;
    const ThresholdedScore best = f1_max(map_list, gt_list);
    row.f1_max = best.value;
    extra["f1_max_threshold"] = best.threshold;
    extra["pixel_counts"] = {{"tp", seg.counts.tp}, {"fp", seg.counts.fp},
                             {"fn", seg.counts.fn}, {"tn", seg.counts.tn}};
    try {
      const ThresholdedScore cls = class_f1(scores, labels);
      row.class_f1 = cls.value;
      extra["class_f1_threshold"] = cls.threshold;
    } catch (const UndefinedMetric& e) {
      warn(rep, e.what());
    }
    try {
      row.aupro = aupro(map_list, gt_list, kDefaultFprLimit);
    } catch (const UndefinedMetric& e) {
      warn(rep, e.what());
    }
  } else {
    warn(rep, "no test images");
  }

  json j = row_to_json(row);
  for (auto& [k, v] : extra.items()) j[k] = v;
  j["per_image"] = per_image;
  const fs::path out = category_dir(cfg.category) / "metrics.json";
  write_text(out, j.dump(2) + "\n");
  rows_.push_back(row);
  rep.images = groups.size();
  rep.items = 1;
  finish(rep, {out});
}

}  // namespace

StageReport run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options) {
  Split split = Split::kTest;
  if (stage == Stage::kAugment) split = Split::kTrain;
  if ((stage == Stage::kTile || stage == Stage::kScore) && options.train) split = Split::kTrain;
  StageRun run(stage, split, config, options);
  return run.run();
}

Summary run_all(const PipelineConfig& config, const RunOptions& options) {
  if (options.train) {
    for (Stage s : {Stage::kTile, Stage::kAugment, Stage::kScore}) run_stage(s, config, options);
  }
  RunOptions test = options;
  test.train = false;
  for (Stage s : {Stage::kTile, Stage::kScore, Stage::kMerge, Stage::kBinarize, Stage::kRefine,
                  Stage::kEval}) {
    run_stage(s, config, test);
  }
  return read_summary(options.output);
}

Summary read_summary(const fs::path& output) {
  const fs::path path = output / "summary.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("missing artifact " + path.string());
  const json j = json::parse(in);
  Summary s;
  for (const auto& r : j.at("rows")) s.rows.push_back(row_from_json(r));
  s.mean = row_from_json(j.at("mean"));
  return s;
}

std::string format_summary(const Summary& summary) {
  std::ostringstream out;
  auto cell = [&](const std::optional<double>& v) {
    out << std::setw(13);
    if (v) {
      out << std::fixed << std::setprecision(2) << 100.0 * *v;
    } else {
      out << "-";
    }
  };
  auto line = [&](const MetricRow& r) {
    out << std::left << std::setw(16) << r.category << std::right;
    cell(r.aupro);
    cell(r.class_f1);
    cell(r.seg_f1);
    cell(r.f1_max);
    out << '\n';
  };
  out << std::left << std::setw(16) << "Object" << std::right << std::setw(13) << "AucPro_0.05"
      << std::setw(13) << "ClassF1" << std::setw(13) << "SegF1" << std::setw(13) << "F1-max" << '\n';
  for (const auto& r : summary.rows) line(r);
  line(summary.mean);
  return out.str();
}

}  // namespace tilebin
