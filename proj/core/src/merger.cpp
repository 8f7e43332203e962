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
#include "tilebin/merger.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tilebin/error.hpp"
#include "tilebin/parallel.hpp"

namespace tilebin {

namespace {

struct Sample {
  int lo;
  int hi;
  double frac;
};

std::vector<Sample> sample_positions(int src, int dst) {
  std::vector<Sample> out(static_cast<std::size_t>(dst));
  for (int i = 0; i < dst; ++i) {
    const double pos = dst == 1 ? (src - 1) / 2.0
                                : static_cast<double>(i) * (src - 1) / (dst - 1);
    const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, src - 1);
    const int hi = std::min(lo + 1, src - 1);
    out[static_cast<std::size_t>(i)] = {lo, hi, pos - lo};
  }
  return out;
}

}  // namespace

AnomalyMap resize_map_bilinear(const AnomalyMap& map, int target_width,
                               int target_height) {
  if (target_width < 1 || target_height < 1) {
    throw InvalidArgument("resize_map_bilinear: target dimensions must be >= 1");
  }
  if (target_width == map.width() && target_height == map.height()) return map;

  const auto xs = sample_positions(map.width(), target_width);
  const auto ys = sample_positions(map.height(), target_height);
  AnomalyMap out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const Sample& sy = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_width; ++x) {
      const Sample& sx = xs[static_cast<std::size_t>(x)];
      const double top = static_cast<double>(map.at(sx.lo, sy.lo)) * (1.0 - sx.frac) +
                         static_cast<double>(map.at(sx.hi, sy.lo)) * sx.frac;
      const double bottom = static_cast<double>(map.at(sx.lo, sy.hi)) * (1.0 - sx.frac) +
                            static_cast<double>(map.at(sx.hi, sy.hi)) * sx.frac;
      out.at(x, y) = static_cast<float>(top * (1.0 - sy.frac) + bottom * sy.frac);
    }
  }
  return out;
}

AnomalyMap merge_maps(std::span<const TileMap> tile_maps, const TilePlan& plan,
                      int workers) {
  // Slot each input by its grid position, resized to window size.
  std::vector<const TileMap*> slots(plan.tiles.size(), nullptr);
  for (const auto& tm : tile_maps) {
    const int r = tm.rect.row_index;
    const int c = tm.rect.col_index;
    if (r < 0 || r >= plan.rows || c < 0 || c >= plan.cols || !(plan.at(r, c) == tm.rect)) {
      throw InvalidArgument("merge_maps: tile (" + std::to_string(r) + "," +
                            std::to_string(c) + ") is not part of the plan");
    }
    auto& slot = slots[static_cast<std::size_t>(r) * plan.cols + c];
    if (slot != nullptr) {
      throw InvalidArgument("merge_maps: duplicate map for tile (" + std::to_string(r) +
                            "," + std::to_string(c) + ")");
    }
    slot = &tm;
  }
  std::string missing;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] == nullptr) {
      const auto& t = plan.tiles[i];
      missing += " (" + std::to_string(t.row_index) + "," + std::to_string(t.col_index) + ")";
    }
  }
  if (!missing.empty()) throw IncompleteInput("merge_maps: missing tile maps:" + missing);

  std::vector<std::optional<AnomalyMap>> resized(slots.size());
  parallel_for(slots.size(), workers, [&](std::size_t i) {
    const AnomalyMap& m = slots[i]->map;
    if (m.width() != plan.window || m.height() != plan.window) {
      resized[i] = resize_map_bilinear(m, plan.window, plan.window);
    }
  });
  auto window_map = [&](std::size_t i) -> const AnomalyMap& {
    return resized[i] ? *resized[i] : slots[i]->map;
  };

  const int width = plan.image_width;
  const int height = plan.image_height;
  AnomalyMap merged(width, height);

  // Rows are independent; within a row band the tile order is fixed.
  constexpr int kBand = 64;
  const int bands = (height + kBand - 1) / kBand;
  parallel_for(static_cast<std::size_t>(bands), workers, [&](std::size_t b) {
    const int y_begin = static_cast<int>(b) * kBand;
    const int y_end = std::min(height, y_begin + kBand);
    std::vector<double> sum(static_cast<std::size_t>(width) * (y_end - y_begin), 0.0);
    std::vector<std::uint16_t> weight(sum.size(), 0);
    for (std::size_t i = 0; i < plan.tiles.size(); ++i) {
      const TileRect& rect = plan.tiles[i];
      const auto [valid_w, valid_h] = unpad_region(rect, plan);
      const int ty_begin = std::max(y_begin, rect.y0);
      const int ty_end = std::min(y_end, rect.y0 + valid_h);
      if (ty_begin >= ty_end) continue;
      const AnomalyMap& m = window_map(i);
      for (int y = ty_begin; y < ty_end; ++y) {
        const std::size_t row = static_cast<std::size_t>(y - y_begin) * width;
        for (int dx = 0; dx < valid_w; ++dx) {
          const std::size_t at = row + rect.x0 + dx;
          sum[at] += static_cast<double>(m.at(dx, y - rect.y0));
          ++weight[at];
        }
      }
    }
    for (int y = y_begin; y < y_end; ++y) {
      const std::size_t row = static_cast<std::size_t>(y - y_begin) * width;
      for (int x = 0; x < width; ++x) {
        merged.at(x, y) = static_cast<float>(sum[row + x] / weight[row + x]);
      }
    }
  });
  return merged;
}

}  // namespace tilebin
