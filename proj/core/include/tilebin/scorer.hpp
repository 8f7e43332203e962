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

#include <compare>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "tilebin/anomaly_map.hpp"
#include "tilebin/geometry.hpp"
#include "tilebin/image.hpp"

namespace tilebin {

inline constexpr int kDefaultModelResolution = 518;
inline constexpr double kScaleFloor = 1e-6;
inline constexpr double kMadToSigma = 1.4826;

struct GridPosition {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const GridPosition&, const GridPosition&) = default;
};

/// Per-pixel robust statistics for one grid position at model resolution.
struct PixelStatistics {
  std::vector<double> location;  // median
  std::vector<double> scale;     // 1.4826 * MAD, floored at kScaleFloor
};

struct StatModel {
  int resolution = kDefaultModelResolution;
  std::map<GridPosition, PixelStatistics> positions;
};

struct TrainingTile {
  std::reference_wrapper<const ImageBuffer> tile;
  GridPosition position;
};

/// Channel-mean intensity of `tile` times `gain`, as a map of the same size.
AnomalyMap intensity_map(const ImageBuffer& tile, double gain = 1.0);

/// Fits median/MAD statistics per grid position on tiles bilinearly resized to
/// `model_resolution`. Throws InvalidArgument on an empty training set.
StatModel fit_stat_scorer(std::span<const TrainingTile> training_tiles,
                          int model_resolution = kDefaultModelResolution,
                          int workers = 1);

void save_stat_model(const std::filesystem::path& path, const StatModel& model);
StatModel load_stat_model(const std::filesystem::path& path);

/// Reads `.amap` blobs produced by an external model, keyed by tile identity.
struct FileScorer {
  std::filesystem::path directory;
};

/// |x - median| / scale against a fitted StatModel.
struct StatScorer {
  std::shared_ptr<const StatModel> model;
};

/// Map = tile intensity / 255 at tile resolution. Useful as a reference
/// scorer: merging its maps reproduces the source intensity exactly.
struct IntensityScorer {};

using ScorerKind = std::variant<FileScorer, StatScorer, IntensityScorer>;

/// Scores one window x window tile. Thread-safe for a shared scorer.
/// FileScorer throws NotFound naming the missing key and FormatError on a
/// corrupt blob; StatScorer throws InvalidArgument for an untrained grid
/// position.
AnomalyMap score_tile(const ScorerKind& scorer, const ImageBuffer& tile,
                      const TileRecord& identity);

}  // namespace tilebin
