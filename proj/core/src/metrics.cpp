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
#include "tilebin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tilebin/error.hpp"

namespace tilebin {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": " + std::to_string(a) + " predictions vs " +
                          std::to_string(b) + " ground truths");
  }
}

template <class A, class B>
void check_same_size(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidArgument(std::string(what) + ": prediction " + std::to_string(a.width()) +
                          "x" + std::to_string(a.height()) + " vs ground truth " +
                          std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

struct ScoredPixel {
  float value;
  std::int32_t tag;  // f1_max: 1 = positive, 0 = negative; aupro: region id or -1
};

}  // namespace

double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  const std::int64_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

PixelCounts count_pixels(const BinaryMask& pred, const BinaryMask& gt) {
  check_same_size(pred, gt, "count_pixels");
  PixelCounts c;
  const auto p = pred.bits();
  const auto g = gt.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]) {
      if (g[i]) ++c.tp; else ++c.fp;
    } else {
      if (g[i]) ++c.fn; else ++c.tn;
    }
  }
  return c;
}

SegF1 seg_f1(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts) {
  check_aligned(preds.size(), gts.size(), "seg_f1");
  SegF1 out;
  for (std::size_t i = 0; i < preds.size(); ++i) out.counts += count_pixels(preds[i], gts[i]);
  const auto& c = out.counts;
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) {
    out.value = 1.0;
    out.undefined_as_one = true;
  } else {
    out.value = f1_score(c.tp, c.fp, c.fn);
  }
  return out;
}

SegF1 seg_f1(const BinaryMask& pred, const BinaryMask& gt) {
  return seg_f1(std::span(&pred, 1), std::span(&gt, 1));
}

ThresholdedScore f1_max(std::span<const AnomalyMap> maps, std::span<const BinaryMask> gts,
                        std::size_t max_candidates) {
  check_aligned(maps.size(), gts.size(), "f1_max");
  if (maps.empty()) throw InvalidArgument("f1_max: empty input");
  if (max_candidates < 2) throw InvalidArgument("f1_max: need at least 2 candidates");

  std::vector<ScoredPixel> pixels;
  std::int64_t positives = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    check_same_size(maps[i], gts[i], "f1_max");
    const auto v = maps[i].values();
    const auto g = gts[i].bits();
    for (std::size_t p = 0; p < v.size(); ++p) {
      pixels.push_back({v[p], g[p] ? 1 : 0});
      positives += g[p] ? 1 : 0;
    }
  }
  std::sort(pixels.begin(), pixels.end(),
            [](const ScoredPixel& a, const ScoredPixel& b) { return a.value > b.value; });

  // Cumulative counts at every distinct value, from the highest down.
  struct Level {
    float value;
    std::int64_t tp;
    std::int64_t fp;
  };
  std::vector<Level> levels;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < pixels.size();) {
    const float value = pixels[i].value;
    for (; i < pixels.size() && pixels[i].value == value; ++i) {
      if (pixels[i].tag) ++tp; else ++fp;
    }
    levels.push_back({value, tp, fp});
  }
  std::reverse(levels.begin(), levels.end());  // ascending by value

  const std::size_t distinct = levels.size();
  auto evaluate = [&](const Level& l) { return f1_score(l.tp, l.fp, positives - l.tp); };
  ThresholdedScore best{-1.0, 0.0};
  auto consider = [&](const Level& l) {
    const double f = evaluate(l);
    if (f > best.value) best = {f, static_cast<double>(l.value)};
  };
  if (distinct <= max_candidates) {
    for (const auto& l : levels) consider(l);
  } else {
    for (std::size_t k = 0; k < max_candidates; ++k) {
      const auto idx = static_cast<std::size_t>(std::llround(
          static_cast<double>(k) * static_cast<double>(distinct - 1) /
          static_cast<double>(max_candidates - 1)));
      consider(levels[idx]);
    }
  }
  return best;
}

double image_score(const AnomalyMap& map) {
  const auto v = map.values();
  return *std::max_element(v.begin(), v.end());
}

ThresholdedScore class_f1(std::span<const double> scores, std::span<const ImageLabel> labels) {
  check_aligned(scores.size(), labels.size(), "class_f1");
  std::vector<std::pair<double, bool>> items;
  std::int64_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool anomalous = labels[i] == ImageLabel::kAnomalous;
    items.emplace_back(scores[i], anomalous);
    positives += anomalous ? 1 : 0;
  }
  if (positives == 0) throw UndefinedMetric("class_f1: no anomalous images");
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  ThresholdedScore best{-1.0, 0.0};
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < items.size();) {
    const double value = items[i].first;
    for (; i < items.size() && items[i].first == value; ++i) {
      if (items[i].second) ++tp; else ++fp;
    }
    const double f = f1_score(tp, fp, positives - tp);
    if (f > best.value) best = {f, value};
  }
  return best;
}

double aupro(std::span<const AnomalyMap> maps, std::span<const BinaryMask> gts,
             double fpr_limit) {
  check_aligned(maps.size(), gts.size(), "aupro");
  if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) {
    throw InvalidArgument("aupro: fpr_limit must lie in (0, 1]");
  }

  std::vector<ScoredPixel> pixels;
  std::vector<double> inverse_area;
  std::int64_t normals = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    check_same_size(maps[i], gts[i], "aupro");
    const Components cc = connected_components(gts[i], Connectivity::kEight);
    const auto base = static_cast<std::int32_t>(inverse_area.size());
    for (const auto& s : cc.stats) inverse_area.push_back(1.0 / static_cast<double>(s.area));
    const auto v = maps[i].values();
    for (std::size_t p = 0; p < v.size(); ++p) {
      const std::int32_t l = cc.labels[p];
      pixels.push_back({v[p], l == 0 ? -1 : base + l - 1});
      normals += l == 0 ? 1 : 0;
    }
  }
  if (inverse_area.empty()) throw UndefinedMetric("aupro: no ground-truth regions");
  if (normals == 0) throw UndefinedMetric("aupro: no normal pixels");
  std::sort(pixels.begin(), pixels.end(),
            [](const ScoredPixel& a, const ScoredPixel& b) { return a.value > b.value; });

  const double regions = static_cast<double>(inverse_area.size());
  double overlap_sum = 0.0;
  std::int64_t false_pos = 0;
  double prev_fpr = 0.0;
  double prev_pro = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < pixels.size();) {
    const float value = pixels[i].value;
    for (; i < pixels.size() && pixels[i].value == value; ++i) {
      if (pixels[i].tag < 0) {
        ++false_pos;
      } else {
        overlap_sum += inverse_area[static_cast<std::size_t>(pixels[i].tag)];
      }
    }
    const double fpr = static_cast<double>(false_pos) / static_cast<double>(normals);
    const double pro = overlap_sum / regions;
    if (fpr >= fpr_limit) {
      const double at_limit =
          fpr == prev_fpr ? pro : prev_pro + (pro - prev_pro) * (fpr_limit - prev_fpr) / (fpr - prev_fpr);
      area += (fpr_limit - prev_fpr) * (prev_pro + at_limit) / 2.0;
      return area / fpr_limit;
    }
    area += (fpr - prev_fpr) * (prev_pro + pro) / 2.0;
    prev_fpr = fpr;
    prev_pro = pro;
  }
  // The final threshold marks every pixel, so FPR reaches 1 above.
  return area / fpr_limit;
}

}  // namespace tilebin
