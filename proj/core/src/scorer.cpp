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
#include "tilebin/scorer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <type_traits>
#include <string>

#include "tilebin/error.hpp"
#include "tilebin/merger.hpp"
#include "tilebin/parallel.hpp"

namespace tilebin {

namespace {

double median_in_place(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return (lower + upper) / 2.0;
}

AnomalyMap model_input(const ImageBuffer& tile, int resolution) {
  return resize_map_bilinear(intensity_map(tile), resolution, resolution);
}

std::string position_name(GridPosition p) {
  return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

// Little-endian stream helpers for the model file.
template <class T>
void put(std::ofstream& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

template <class T>
T get(std::span<const std::uint8_t> b, std::size_t& at) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  if (at + sizeof(T) > b.size()) throw FormatError("stat model: truncated file");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(b[at + i]) << (8 * i);
  at += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

AnomalyMap intensity_map(const ImageBuffer& tile, double gain) {
  AnomalyMap out(tile.width(), tile.height());
  for (int y = 0; y < tile.height(); ++y) {
    for (int x = 0; x < tile.width(); ++x) {
      out.at(x, y) = static_cast<float>(tile.gray(x, y) * gain);
    }
  }
  return out;
}

StatModel fit_stat_scorer(std::span<const TrainingTile> training_tiles,
                          int model_resolution, int workers) {
  if (training_tiles.empty()) throw InvalidArgument("fit_stat_scorer: empty training set");
  if (model_resolution < 1) throw InvalidArgument("fit_stat_scorer: bad model resolution");

  std::map<GridPosition, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < training_tiles.size(); ++i) {
    groups[training_tiles[i].position].push_back(i);
  }

  StatModel model;
  model.resolution = model_resolution;
  const std::size_t pixels =
      static_cast<std::size_t>(model_resolution) * static_cast<std::size_t>(model_resolution);
  for (const auto& [position, members] : groups) {
    std::vector<std::optional<AnomalyMap>> inputs(members.size());
    parallel_for(members.size(), workers, [&](std::size_t k) {
      inputs[k] = model_input(training_tiles[members[k]].tile.get(), model_resolution);
    });

    PixelStatistics stats;
    stats.location.resize(pixels);
    stats.scale.resize(pixels);
    constexpr std::size_t kChunk = 4096;
    parallel_for((pixels + kChunk - 1) / kChunk, workers, [&](std::size_t chunk) {
      std::vector<double> samples(members.size());
      const std::size_t end = std::min(pixels, (chunk + 1) * kChunk);
      for (std::size_t p = chunk * kChunk; p < end; ++p) {
        for (std::size_t k = 0; k < members.size(); ++k) samples[k] = inputs[k]->values()[p];
        const double med = median_in_place(samples);
        for (double& s : samples) s = std::abs(s - med);
        const double mad = median_in_place(samples);
        stats.location[p] = med;
        stats.scale[p] = std::max(kScaleFloor, kMadToSigma * mad);
      }
    });
    model.positions.emplace(position, std::move(stats));
  }
  return model;
}

void save_stat_model(const std::filesystem::path& path, const StatModel& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write("SMDL", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.resolution));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.positions.size()));
  for (const auto& [pos, stats] : model.positions) {
    put<std::int32_t>(out, pos.row);
    put<std::int32_t>(out, pos.col);
    for (double v : stats.location) put<double>(out, v);
    for (double v : stats.scale) put<double>(out, v);
  }
}

StatModel load_stat_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("stat model not found: " + path.string());
  const std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (blob.size() < 4 || std::memcmp(blob.data(), "SMDL", 4) != 0) {
    throw FormatError("stat model: bad magic in " + path.string());
  }
  std::size_t at = 4;
  if (get<std::uint32_t>(blob, at) != 1) throw FormatError("stat model: unsupported version");
  StatModel model;
  model.resolution = static_cast<int>(get<std::uint32_t>(blob, at));
  const std::uint32_t count = get<std::uint32_t>(blob, at);
  const std::size_t pixels = static_cast<std::size_t>(model.resolution) * model.resolution;
  if (model.resolution < 1 || blob.size() != 16 + count * (8 + 16 * pixels)) {
    throw FormatError("stat model: size mismatch in " + path.string());
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    GridPosition pos;
    pos.row = get<std::int32_t>(blob, at);
    pos.col = get<std::int32_t>(blob, at);
    PixelStatistics stats;
    stats.location.resize(pixels);
    stats.scale.resize(pixels);
    for (auto& v : stats.location) v = get<double>(blob, at);
    for (auto& v : stats.scale) v = get<double>(blob, at);
    model.positions.emplace(pos, std::move(stats));
  }
  return model;
}

AnomalyMap score_tile(const ScorerKind& scorer, const ImageBuffer& tile,
                      const TileRecord& identity) {
  if (tile.width() != identity.window || tile.height() != identity.window) {
    throw InvalidArgument("score_tile: tile is " + std::to_string(tile.width()) + "x" +
                          std::to_string(tile.height()) + ", expected window " +
                          std::to_string(identity.window));
  }
  return std::visit(
      [&](const auto& s) -> AnomalyMap {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FileScorer>) {
          const auto path = s.directory / tile_map_filename(identity.image_id,
                                                            identity.row_index,
                                                            identity.col_index);
          if (!std::filesystem::exists(path)) {
            throw NotFound("no anomaly map for tile " +
                           tile_key(identity.image_id, identity.row_index,
                                    identity.col_index) +
                           " in " + s.directory.string());
          }
          return read_amap(path);
        } else if constexpr (std::is_same_v<T, StatScorer>) {
          if (!s.model) throw InvalidArgument("score_tile: stat scorer has no model");
          const GridPosition pos{identity.row_index, identity.col_index};
          const auto it = s.model->positions.find(pos);
          if (it == s.model->positions.end()) {
            throw InvalidArgument("score_tile: grid position " + position_name(pos) +
                                  " was never trained");
          }
          const AnomalyMap input = model_input(tile, s.model->resolution);
          AnomalyMap out(input.width(), input.height());
          const auto& stats = it->second;
          for (std::size_t p = 0; p < input.size(); ++p) {
            out.values()[p] = static_cast<float>(
                std::abs(input.values()[p] - stats.location[p]) / stats.scale[p]);
          }
          return out;
        } else {
          return intensity_map(tile, 1.0 / 255.0);
        }
      },
      scorer);
}

}  // namespace tilebin
