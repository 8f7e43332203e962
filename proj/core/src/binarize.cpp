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
#include "tilebin/binarize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tilebin/error.hpp"

namespace tilebin {

ThresholdedMask threshold_mean3std(const AnomalyMap& map) {
  const auto values = map.values();
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (float v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (float v : values) {
    const double d = v - mean;
    var += d * d;
  }
  const double threshold = mean + 3.0 * std::sqrt(var / n);

  BinaryMask mask(map.width(), map.height());
  auto bits = mask.bits();
  for (std::size_t i = 0; i < values.size(); ++i) bits[i] = values[i] > threshold ? 1 : 0;
  return {std::move(mask), threshold};
}

void validate(const MebinConfig& cfg) {
  if (cfg.levels < 2) throw InvalidArgument("mebin: levels must be >= 2");
  if (cfg.min_area < 1) throw InvalidArgument("mebin: min_area must be >= 1");
}

namespace {

constexpr double kLevelSnap = 1e-4;

// Disjoint sets with per-root area, counting roots whose area reaches a floor.
class AreaForest {
 public:
  AreaForest(std::size_t n, std::int64_t min_area)
      : parent_(n, -1), area_(n, 0), min_area_(min_area) {}

  bool active(std::size_t i) const { return parent_[i] >= 0; }

  void activate(std::size_t i) {
    parent_[i] = static_cast<std::int64_t>(i);
    area_[i] = 1;
    if (area_[i] >= min_area_) ++large_;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (area_[a] < area_[b]) std::swap(a, b);
    large_ -= (area_[a] >= min_area_) + (area_[b] >= min_area_);
    parent_[b] = static_cast<std::int64_t>(a);
    area_[a] += area_[b];
    large_ += area_[a] >= min_area_;
  }

  int large_components() const { return large_; }

 private:
  std::size_t find(std::size_t x) {
    while (static_cast<std::size_t>(parent_[x]) != x) {
      const auto p = static_cast<std::size_t>(parent_[x]);
      parent_[x] = parent_[p];
      x = p;
    }
    return x;
  }

  std::vector<std::int64_t> parent_;
  std::vector<std::int64_t> area_;
  std::int64_t min_area_;
  int large_ = 0;
};

BinaryMask drop_small(const BinaryMask& mask, int min_area, Connectivity conn) {
  const Components cc = connected_components(mask, conn);
  BinaryMask out(mask.width(), mask.height());
  auto bits = out.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const std::int32_t l = cc.labels[i];
    bits[i] = (l > 0 && cc.stats[static_cast<std::size_t>(l) - 1].area >= min_area) ? 1 : 0;
  }
  return out;
}

}  // namespace

MebinResult mebin_threshold(const AnomalyMap& map, const MebinConfig& cfg) {
  validate(cfg);
  const int w = map.width();
  const int h = map.height();
  const auto values = map.values();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double vmin = *lo_it;
  const double vmax = *hi_it;
  const int top = cfg.levels - 1;

  MebinResult result{BinaryMask(w, h), std::nullopt, -1, std::vector<int>(cfg.levels, 0), -1, -1};
  if (!(vmax > vmin)) return result;

  // Normalized value and the highest level at which each pixel is set:
  // (n > t) holds exactly for t <= ceil(n) - 1.
  const double span = vmax - vmin;
  std::vector<double> normalized(values.size());
  std::vector<std::vector<std::size_t>> entering(static_cast<std::size_t>(cfg.levels));
  for (std::size_t i = 0; i < values.size(); ++i) {
    double n = (values[i] - vmin) / span * top;
    // Snap values within float rounding noise of a level so that affinely
    // rescaled maps land on the same side of every level.
    const double nearest = std::round(n);
    if (std::abs(n - nearest) <= kLevelSnap) n = nearest;
    normalized[i] = n;
    const int entry = static_cast<int>(std::ceil(n)) - 1;
    if (entry >= 0) entering[static_cast<std::size_t>(std::min(entry, top))].push_back(i);
  }

  AreaForest forest(values.size(), cfg.min_area);
  const bool eight = cfg.connectivity == Connectivity::kEight;
  for (int t = top; t >= 0; --t) {
    for (std::size_t i : entering[static_cast<std::size_t>(t)]) {
      forest.activate(i);
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
          if (forest.active(j)) forest.unite(i, j);
        }
      }
    }
    result.counts[static_cast<std::size_t>(t)] = forest.large_components();
  }

  // Longest run of equal nonzero counts, scanning from the top so that ties
  // keep the higher run.
  int best_len = 0;
  for (int t = top; t >= 0;) {
    const int c = result.counts[static_cast<std::size_t>(t)];
    int s = t;
    while (s - 1 >= 0 && result.counts[static_cast<std::size_t>(s - 1)] == c) --s;
    const int len = t - s + 1;
    if (c >= 1 && len > best_len) {
      best_len = len;
      result.run_high = t;
      result.run_low = s;
    }
    t = s - 1;
  }
  if (best_len == 0) return result;

  result.level = cfg.pick == MebinPick::kUpperEnd
                     ? result.run_high
                     : (result.run_low + result.run_high) / 2;
  result.threshold = vmin + static_cast<double>(result.level) / top * span;

  BinaryMask raw(w, h);
  auto bits = raw.bits();
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    bits[i] = normalized[i] > result.level ? 1 : 0;
  }
  result.mask = drop_small(raw, cfg.min_area, cfg.connectivity);
  return result;
}

CoarseMask coarse_mask(const AnomalyMap& map, const MebinConfig& cfg) {
  ThresholdedMask statistical = threshold_mean3std(map);
  MebinResult adaptive = mebin_threshold(map, cfg);
  BinaryMask combined = combine_or(statistical.mask, adaptive.mask);
  if (!combined.contains(statistical.mask) || !combined.contains(adaptive.mask)) {
    throw std::logic_error("coarse_mask: union does not contain both branches");
  }
  return {std::move(statistical), std::move(adaptive), std::move(combined)};
}

}  // namespace tilebin
