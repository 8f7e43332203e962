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

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
class ImageBuffer {
 public:
  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t sample_count() const noexcept { return data_.size(); }

  std::uint8_t& at(int x, int y, int c = 0) noexcept {
    return data_[index(x, y, c)];
  }
  std::uint8_t at(int x, int y, int c = 0) const noexcept {
    return data_[index(x, y, c)];
  }

  std::span<std::uint8_t> samples() noexcept { return data_; }
  std::span<const std::uint8_t> samples() const noexcept { return data_; }

  std::span<std::uint8_t> row(int y) noexcept {
    return std::span(data_).subspan(row_offset(y), row_stride());
  }
  std::span<const std::uint8_t> row(int y) const noexcept {
    return std::span(data_).subspan(row_offset(y), row_stride());
  }

  /// Mean over channels at (x, y).
  double gray(int x, int y) const noexcept;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t row_stride() const noexcept {
    return static_cast<std::size_t>(width_) * channels_;
  }
  std::size_t row_offset(int y) const noexcept {
    return static_cast<std::size_t>(y) * row_stride();
  }
  std::size_t index(int x, int y, int c) const noexcept {
    return row_offset(y) + static_cast<std::size_t>(x) * channels_ + c;
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> data_;
};

/// Loads a PNG as 8-bit gray or RGB. Alpha is dropped, 16-bit samples are
/// reduced, palettes are expanded.
ImageBuffer read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const ImageBuffer& image);

}  // namespace tilebin
