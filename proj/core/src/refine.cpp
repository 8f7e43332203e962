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
#include "tilebin/refine.hpp"

#include <algorithm>

namespace tilebin {

std::string_view to_string(RefineMode mode) {
  switch (mode) {
    case RefineMode::kOrOfThree:
      return "or_of_three";
    case RefineMode::kTopConfidence:
      return "top_confidence";
    case RefineMode::kSkip:
      return "skip";
  }
  return "unknown";
}

std::optional<RefineMode> parse_refine_mode(std::string_view text) {
  if (text == "or_of_three") return RefineMode::kOrOfThree;
  if (text == "top_confidence") return RefineMode::kTopConfidence;
  if (text == "skip") return RefineMode::kSkip;
  return std::nullopt;
}

RefineMode default_refine_mode(std::string_view category) {
  if (category == "fabric" || category == "walnuts") return RefineMode::kOrOfThree;
  if (category == "rice") return RefineMode::kSkip;
  return RefineMode::kTopConfidence;
}

std::vector<BoxPrompt> extract_boxes(const Components& components) {
  std::vector<BoxPrompt> boxes;
  boxes.reserve(components.stats.size());
  for (std::size_t k = 0; k < components.stats.size(); ++k) {
    const auto& s = components.stats[k];
    boxes.push_back({s.x_min, s.y_min, s.x_max, s.y_max, static_cast<int>(k) + 1});
  }
  return boxes;
}

std::vector<BoxPrompt> extract_boxes(const BinaryMask& mask) {
  return extract_boxes(connected_components(mask, Connectivity::kEight));
}

RefineOutcome refine_mask(const BinaryMask& mask, const ImageBuffer& image,
                          Segmenter& segmenter, RefineMode mode,
                          const RefineRequest& request) {
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw InvalidArgument("refine_mask: mask and image sizes differ");
  }
  if (mode == RefineMode::kSkip) return {mask, {}};

  const Components cc = connected_components(mask, Connectivity::kEight);
  if (cc.count == 0) return {mask, {}};

  SegmentRequest wire{request.request_id, request.image_path, request.variant,
                      extract_boxes(cc)};
  SegmentResponse response;
  try {
    response = segmenter.segment(wire, SegmentContext{image, cc});
  } catch (const Error& e) {
    throw RefineError(std::string("refine_mask: ") + e.what(),
                      std::vector<BoxStatus>(wire.boxes.size(), BoxStatus::kTransportFailed));
  }

  std::vector<const BoxResult*> per_box(wire.boxes.size(), nullptr);
  for (const auto& r : response.results) {
    if (r.box_index < per_box.size()) per_box[r.box_index] = &r;
  }

  RefineOutcome out{BinaryMask(mask.width(), mask.height()),
                    std::vector<BoxStatus>(wire.boxes.size(), BoxStatus::kFallback)};
  auto bits = out.mask.bits();
  for (std::size_t b = 0; b < wire.boxes.size(); ++b) {
    bool any = false;
    if (per_box[b] != nullptr && !per_box[b]->masks.empty()) {
      const auto& masks = per_box[b]->masks;
      const std::size_t take = mode == RefineMode::kOrOfThree ? std::min<std::size_t>(3, masks.size()) : 1;
      // Candidates arrive sorted, but pick the top one explicitly.
      std::vector<const CandidateMask*> chosen;
      if (take == 1) {
        chosen.push_back(&*std::max_element(
            masks.begin(), masks.end(),
            [](const CandidateMask& a, const CandidateMask& c) { return a.confidence < c.confidence; }));
      } else {
        for (std::size_t k = 0; k < take; ++k) chosen.push_back(&masks[k]);
      }
      for (const CandidateMask* m : chosen) {
        if (m->mask.width() != mask.width() || m->mask.height() != mask.height()) continue;
        const auto src = m->mask.bits();
        for (std::size_t i = 0; i < bits.size(); ++i) {
          if (src[i] != 0) {
            bits[i] = 1;
            any = true;
          }
        }
      }
    }
    if (any) {
      out.box_status[b] = BoxStatus::kRefined;
      continue;
    }
    const std::int32_t label = wire.boxes[b].source_component_label;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (cc.labels[i] == label) bits[i] = 1;
    }
  }
  return out;
}

}  // namespace tilebin
