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
#include <string>
#include <string_view>
#include <vector>

#include "tilebin/components.hpp"
#include "tilebin/error.hpp"
#include "tilebin/image.hpp"
#include "tilebin/segmenter.hpp"

namespace tilebin {

enum class RefineMode { kOrOfThree, kTopConfidence, kSkip };

std::string_view to_string(RefineMode mode);
/// Accepts "or_of_three", "top_confidence", "skip".
std::optional<RefineMode> parse_refine_mode(std::string_view text);

/// fabric, walnuts -> or_of_three; rice -> skip; everything else ->
/// top_confidence.
RefineMode default_refine_mode(std::string_view category);

/// One tight box per 8-connected component, in label order.
std::vector<BoxPrompt> extract_boxes(const BinaryMask& mask);
std::vector<BoxPrompt> extract_boxes(const Components& components);

enum class BoxStatus {
  kRefined,
  kFallback,         // segmenter returned nothing usable; source component kept
  kTransportFailed,  // request never completed
};

struct RefineOutcome {
  BinaryMask mask;
  std::vector<BoxStatus> box_status;
};

class RefineError : public Error {
 public:
  RefineError(const std::string& what, std::vector<BoxStatus> status)
      : Error(what), status_(std::move(status)) {}
  const std::vector<BoxStatus>& box_status() const noexcept { return status_; }

 private:
  std::vector<BoxStatus> status_;
};

struct RefineRequest {
  std::string request_id;
  std::string image_path;
  std::string variant;
};

/// Box-prompted refinement. Each component of `mask` becomes a box prompt;
/// returned candidates are fused per `mode` and the per-box results are ORed.
/// A box with no usable candidate keeps its original component pixels.
/// Throws InvalidArgument when mask and image sizes differ and RefineError
/// when the segmenter transport fails.
RefineOutcome refine_mask(const BinaryMask& mask, const ImageBuffer& image,
                          Segmenter& segmenter, RefineMode mode,
                          const RefineRequest& request = {});

}  // namespace tilebin
