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

#include <cstddef>
#include <cstdint>
#include <span>

#include "tilebin/anomaly_map.hpp"
#include "tilebin/components.hpp"

namespace tilebin {

struct PixelCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  PixelCounts& operator+=(const PixelCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

/// 2TP / (2TP + FP + FN), 0 when the denominator is 0.
double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn);

PixelCounts count_pixels(const BinaryMask& pred, const BinaryMask& gt);

struct SegF1 {
  double value = 0.0;
  /// No positives anywhere in prediction or ground truth; value is 1.
  bool undefined_as_one = false;
  PixelCounts counts;
};

/// Pixel F1 with TP/FP/FN pooled over all image pairs. Throws
/// InvalidArgument on a size mismatch or unequal list lengths.
SegF1 seg_f1(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts);
SegF1 seg_f1(const BinaryMask& pred, const BinaryMask& gt);

struct ThresholdedScore {
  double value = 0.0;
  double threshold = 0.0;
};

inline constexpr std::size_t kF1MaxCandidates = 1024;

/// Best pooled pixel F1 over thresholds t (positive = score >= t). Candidates
/// are the distinct map values, subsampled to `max_candidates` quantile-spaced
/// values when there are more. Throws InvalidArgument on empty input.
ThresholdedScore f1_max(std::span<const AnomalyMap> maps, std::span<const BinaryMask> gts,
                        std::size_t max_candidates = kF1MaxCandidates);

enum class ImageLabel : std::uint8_t { kGood, kAnomalous };

/// Maximum pixel score.
double image_score(const AnomalyMap& map);

/// Best image-level F1 (anomalous = positive, positive = score >= t) over all
/// distinct scores. Throws UndefinedMetric without an anomalous label.
ThresholdedScore class_f1(std::span<const double> scores, std::span<const ImageLabel> labels);

inline constexpr double kDefaultFprLimit = 0.05;

/// Normalized area under the per-region-overlap curve for FPR in
/// [0, fpr_limit]. Regions are 8-connected ground-truth components; FPR is
/// pooled over all normal pixels. Every distinct score is a threshold, the
/// curve starts at (0, 0) and the last segment is interpolated at fpr_limit.
/// Throws UndefinedMetric without ground-truth regions or normal pixels.
double aupro(std::span<const AnomalyMap> maps, std::span<const BinaryMask> gts,
             double fpr_limit = kDefaultFprLimit);

}  // namespace tilebin
