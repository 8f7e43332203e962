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

#include <optional>
#include <vector>

#include "tilebin/anomaly_map.hpp"
#include "tilebin/components.hpp"

namespace tilebin {

struct ThresholdedMask {
  BinaryMask mask;
  std::optional<double> threshold;
};

/// Per-map statistical rule: t = mean + 3 * population std, bit = value > t.
/// Always yields a threshold.
ThresholdedMask threshold_mean3std(const AnomalyMap& map);

enum class MebinPick { kUpperEnd, kMidpoint };

struct MebinConfig {
  int levels = 256;
  int min_area = 5;
  Connectivity connectivity = Connectivity::kEight;
  MebinPick pick = MebinPick::kUpperEnd;
};

void validate(const MebinConfig& cfg);

struct MebinResult {
  BinaryMask mask;
  /// In score units; empty when no level has a surviving component.
  std::optional<double> threshold;
  /// Chosen level on the normalized [0, levels - 1] scale, -1 when none.
  int level = -1;
  /// counts[t] = components of area >= min_area in (normalized > t).
  std::vector<int> counts;
  /// Inclusive bounds of the selected stable run, -1 when none.
  int run_low = -1;
  int run_high = -1;
};

/// Stable-component adaptive threshold. The map is normalized affinely onto
/// [0, levels - 1]; for every integer level t the map is binarized with
/// (value > t), components smaller than min_area are dropped and the rest
/// counted. The longest run of consecutive levels with one unchanging nonzero
/// count is selected (ties go to the run at higher levels) and the threshold
/// is taken from that run per `pick`. The returned mask keeps only components
/// of at least min_area pixels.
///
/// The sweep is a single pass: pixels enter a disjoint-set forest in order of
/// decreasing level, so all counts cost O(N alpha(N)) after bucketing.
MebinResult mebin_threshold(const AnomalyMap& map, const MebinConfig& cfg = {});

struct CoarseMask {
  ThresholdedMask statistical;
  MebinResult adaptive;
  BinaryMask combined;
};

/// OR of the two rules. Throws std::logic_error if the union fails to contain
/// either branch.
CoarseMask coarse_mask(const AnomalyMap& map, const MebinConfig& cfg = {});

}  // namespace tilebin
