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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tilebin/augment.hpp"
#include "tilebin/binarize.hpp"
#include "tilebin/geometry.hpp"
#include "tilebin/refine.hpp"
#include "tilebin/scorer.hpp"

namespace tilebin {

enum class ScorerType { kStat, kFile, kIntensity };

struct ScorerSpec {
  ScorerType type = ScorerType::kStat;
  std::filesystem::path directory;  // kFile only; relative paths resolve against the config file
};

struct CategoryConfig {
  std::string category;
  int window = kDefaultWindow;
  double overlap_fraction = kDefaultOverlap;
  int model_resolution = kDefaultModelResolution;
  AugmentParams augment;
  ScorerSpec scorer;
  MebinConfig mebin;
  RefineMode refine_mode = RefineMode::kTopConfidence;
  std::string segmenter_variant = "default";
};

struct PipelineConfig {
  std::vector<CategoryConfig> categories;
};

/// Parses the JSON pipeline config:
///
///   {"defaults": {<fields>}, "categories": [{"category": "fabric", <fields>}, ...]}
///
/// <fields> are the CategoryConfig members with nested objects for augment,
/// scorer ({"kind": "stat" | "file" | "intensity", "directory": ...}) and
/// mebin ({..., "connectivity": 4 | 8, "pick": "upper_end" | "midpoint"}).
/// Per-category fields override defaults member by member. refine_mode falls
/// back to default_refine_mode(category) when neither level sets it.
///
/// Throws ConfigError carrying the line for syntax errors and the field path
/// for unknown fields, bad types and invalid values.
PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

std::string_view to_string(ScorerType type);
std::string_view to_string(MebinPick pick);

}  // namespace tilebin
