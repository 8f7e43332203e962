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
#include "tilebin/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tilebin/error.hpp"

namespace tilebin {

using nlohmann::json;

namespace {

const std::set<std::string> kCategoryFields = {
    "category", "window", "overlap_fraction", "model_resolution", "augment",
    "scorer", "mebin", "refine_mode", "segmenter_variant"};
const std::set<std::string> kAugmentFields = {"sigma", "lambda_low", "lambda_high",
                                              "apply_probability", "seed"};
const std::set<std::string> kScorerFields = {"kind", "directory"};
const std::set<std::string> kMebinFields = {"levels", "min_area", "connectivity", "pick"};

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config field '" + path + "': " + message);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

void check_category_keys(const json& j, const std::string& path) {
  check_keys(j, kCategoryFields, path);
  if (j.contains("augment")) check_keys(j["augment"], kAugmentFields, path + ".augment");
  if (j.contains("scorer")) check_keys(j["scorer"], kScorerFields, path + ".scorer");
  if (j.contains("mebin")) check_keys(j["mebin"], kMebinFields, path + ".mebin");
}

json merged(const json& defaults, const json& overrides) {
  json out = defaults;
  for (const auto& [key, value] : overrides.items()) {
    if (value.is_object() && out.contains(key) && out[key].is_object()) {
      for (const auto& [k, v] : value.items()) out[key][k] = v;
    } else {
      out[key] = value;
    }
  }
  return out;
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& path) {
  if (!obj.contains(key)) return;
  const std::string field = path + "." + key;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) fail(field, "expected a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail(field, "expected a number");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned()) fail(field, "expected a non-negative integer");
    }
  }
  target = v.get<T>();
}

CategoryConfig parse_category(const json& j, const std::string& path,
                              const std::filesystem::path& base_dir) {
  CategoryConfig c;
  if (!j.contains("category")) fail(path + ".category", "missing");
  read(j, "category", c.category, path);
  if (c.category.empty() || c.category.find_first_of("/\\") != std::string::npos ||
      c.category == "." || c.category == "..") {
    fail(path + ".category", "must be a non-empty plain name");
  }
  read(j, "window", c.window, path);
  read(j, "overlap_fraction", c.overlap_fraction, path);
  read(j, "model_resolution", c.model_resolution, path);
  if (c.window < 2) fail(path + ".window", "must be >= 2");
  if (!(c.overlap_fraction >= 0.0 && c.overlap_fraction < 1.0)) {
    fail(path + ".overlap_fraction", "must lie in [0, 1)");
  }
  if (c.model_resolution < 1) fail(path + ".model_resolution", "must be >= 1");

  if (j.contains("augment")) {
    const json& a = j["augment"];
    const std::string ap = path + ".augment";
    read(a, "sigma", c.augment.sigma, ap);
    read(a, "lambda_low", c.augment.lambda_low, ap);
    read(a, "lambda_high", c.augment.lambda_high, ap);
    read(a, "apply_probability", c.augment.apply_probability, ap);
    read(a, "seed", c.augment.seed, ap);
    try {
      validate(c.augment);
    } catch (const InvalidArgument& e) {
      fail(ap, e.what());
    }
  }

  if (j.contains("scorer")) {
    const json& s = j["scorer"];
    const std::string sp = path + ".scorer";
    std::string kind = "stat";
    read(s, "kind", kind, sp);
    if (kind == "stat") {
      c.scorer.type = ScorerType::kStat;
    } else if (kind == "file") {
      c.scorer.type = ScorerType::kFile;
    } else if (kind == "intensity") {
      c.scorer.type = ScorerType::kIntensity;
    } else {
      fail(sp + ".kind", "expected stat, file or intensity, got '" + kind + "'");
    }
    std::string dir;
    read(s, "directory", dir, sp);
    if (c.scorer.type == ScorerType::kFile) {
      if (dir.empty()) fail(sp + ".directory", "required for the file scorer");
      std::filesystem::path p(dir);
      c.scorer.directory = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
  }

  if (j.contains("mebin")) {
    const json& m = j["mebin"];
    const std::string mp = path + ".mebin";
    read(m, "levels", c.mebin.levels, mp);
    read(m, "min_area", c.mebin.min_area, mp);
    int connectivity = 8;
    read(m, "connectivity", connectivity, mp);
    if (connectivity != 4 && connectivity != 8) fail(mp + ".connectivity", "must be 4 or 8");
    c.mebin.connectivity = connectivity == 4 ? Connectivity::kFour : Connectivity::kEight;
    std::string pick = "upper_end";
    read(m, "pick", pick, mp);
    if (pick == "upper_end") {
      c.mebin.pick = MebinPick::kUpperEnd;
    } else if (pick == "midpoint") {
      c.mebin.pick = MebinPick::kMidpoint;
    } else {
      fail(mp + ".pick", "expected upper_end or midpoint");
    }
    try {
      validate(c.mebin);
    } catch (const InvalidArgument& e) {
      fail(mp, e.what());
    }
  }

  c.refine_mode = default_refine_mode(c.category);
  if (j.contains("refine_mode")) {
    std::string mode;
    read(j, "refine_mode", mode, path);
    const auto parsed = parse_refine_mode(mode);
    if (!parsed) fail(path + ".refine_mode", "expected or_of_three, top_confidence or skip");
    c.refine_mode = *parsed;
  }
  read(j, "segmenter_variant", c.segmenter_variant, path);
  return c;
}

std::string line_of(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
  return std::to_string(line);
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config syntax error at line " + line_of(text, e.byte) + ": " + e.what());
  }
  check_keys(root, {"defaults", "categories"}, "");
  json defaults = json::object();
  if (root.contains("defaults")) {
    defaults = root["defaults"];
    check_category_keys(defaults, "defaults");
    if (defaults.contains("category")) fail("defaults.category", "not allowed in defaults");
  }
  if (!root.contains("categories") || !root["categories"].is_array() || root["categories"].empty()) {
    fail("categories", "expected a non-empty array");
  }

  PipelineConfig config;
  std::set<std::string> seen;
  const json& list = root["categories"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "categories[" + std::to_string(i) + "]";
    check_category_keys(list[i], path);
    try {
      config.categories.push_back(parse_category(merged(defaults, list[i]), path, base_dir));
    } catch (const json::exception& e) {
      fail(path, e.what());
    }
    if (!seen.insert(config.categories.back().category).second) {
      fail(path + ".category", "duplicate category '" + config.categories.back().category + "'");
    }
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string_view to_string(ScorerType type) {
  switch (type) {
    case ScorerType::kStat:
      return "stat";
    case ScorerType::kFile:
      return "file";
    case ScorerType::kIntensity:
      return "intensity";
  }
  return "unknown";
}

std::string_view to_string(MebinPick pick) {
  return pick == MebinPick::kUpperEnd ? "upper_end" : "midpoint";
}

}  // namespace tilebin
