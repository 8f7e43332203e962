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
#include <filesystem>
#include <span>
#include <vector>

namespace tilebin {

/// Row-major anomaly (1) / normal (0) decisions.
class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) noexcept { bits_[index(x, y)] = v ? 1 : 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::size_t popcount() const noexcept;
  bool empty_mask() const noexcept { return popcount() == 0; }
  /// True when every set bit of `other` is also set here.
  bool contains(const BinaryMask& other) const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Bitwise OR. Throws InvalidArgument on a dimension mismatch.
BinaryMask combine_or(const BinaryMask& a, const BinaryMask& b);

/// Nonzero gray value = anomalous.
BinaryMask read_mask_png(const std::filesystem::path& path);
/// Writes 0 / 255 single-channel PNG.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

enum class Connectivity { kFour = 4, kEight = 8 };

struct ComponentStats {
  std::int64_t area = 0;
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;
};

struct Components {
  int width = 0;
  int height = 0;
  /// 0 = background, 1..count in order of first encounter in a row-major scan.
  std::vector<std::int32_t> labels;
  int count = 0;
  /// stats[k] describes label k + 1.
  std::vector<ComponentStats> stats;

  std::int32_t label_at(int x, int y) const noexcept {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

Components connected_components(const BinaryMask& mask,
                                Connectivity connectivity = Connectivity::kEight);

}  // namespace tilebin
