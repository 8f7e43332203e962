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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tilebin/components.hpp"
#include "tilebin/error.hpp"
#include "tilebin/image.hpp"

namespace tilebin {

/// Inclusive full-image box around one coarse-mask component.
struct BoxPrompt {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;
  int source_component_label = 0;

  friend bool operator==(const BoxPrompt&, const BoxPrompt&) = default;
};

struct CandidateMask {
  BinaryMask mask;
  double confidence = 0.0;
};

struct BoxResult {
  std::size_t box_index = 0;
  std::vector<CandidateMask> masks;  // <= 3, descending confidence
};

struct SegmentRequest {
  std::string request_id;
  std::string image_path;
  std::string variant;
  std::vector<BoxPrompt> boxes;
};

struct SegmentResponse {
  std::string request_id;
  std::vector<BoxResult> results;
};

/// Local data a segmenter may use besides the wire request.
struct SegmentContext {
  const ImageBuffer& image;
  const Components& components;
};

/// The segmenter could not be reached or kept answering garbage.
class TransportError : public Error {
 public:
  using Error::Error;
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  /// Must be safe to call concurrently.
  virtual SegmentResponse segment(const SegmentRequest& request,
                                  const SegmentContext& context) = 0;
};

/// Answers every box with its source component at confidence 1.0.
class NullSegmenter final : public Segmenter {
 public:
  SegmentResponse segment(const SegmentRequest& request,
                          const SegmentContext& context) override;
};

/// Client for the line-delimited JSON protocol. `endpoint` is either
/// "unix:/path/to.sock" or "host:port". Each request opens one connection,
/// writes one line and reads one line back.
class SocketSegmenter final : public Segmenter {
 public:
  explicit SocketSegmenter(std::string endpoint, int attempts = 3,
                           std::chrono::milliseconds timeout = std::chrono::seconds(60));

  SegmentResponse segment(const SegmentRequest& request,
                          const SegmentContext& context) override;

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string round_trip(const std::string& line) const;

  std::string endpoint_;
  int attempts_;
  std::chrono::milliseconds timeout_;
};

// Wire codec. A mask travels either as {"png_path": ...} or as run lengths
// {"rle": {"width": W, "height": H, "counts": [...]}} where counts alternate
// zero/one runs over the row-major bits, starting with zeros.

std::vector<std::int64_t> rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(int width, int height, const std::vector<std::int64_t>& counts);

std::string encode_request(const SegmentRequest& request);
SegmentRequest decode_request(const std::string& line);

std::string encode_response(const SegmentResponse& response);
std::string encode_error_response(const std::string& request_id, const std::string& message);

/// Masks are validated against width x height, sorted by descending confidence
/// and truncated to 3. Throws FormatError on malformed input or an error
/// response.
SegmentResponse decode_response(const std::string& line, int width, int height);

}  // namespace tilebin
