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
#include <string>
#include <vector>

namespace tilebin {

/// Row-major real-valued anomaly scores; larger means more anomalous.
class AnomalyMap {
 public:
  AnomalyMap(int width, int height, float fill = 0.0F);
  AnomalyMap(int width, int height, std::vector<float> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  float& at(int x, int y) noexcept { return values_[index(x, y)]; }
  float at(int x, int y) const noexcept { return values_[index(x, y)]; }

  std::span<float> values() noexcept { return values_; }
  std::span<const float> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const AnomalyMap&, const AnomalyMap&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<float> values_;
};

// Blob layout: "AMAP", u16 version (1), u32 width, u32 height, then
// width*height little-endian IEEE-754 binary32 values, row-major.
inline constexpr std::uint16_t kAmapVersion = 1;

std::vector<std::uint8_t> encode_amap(const AnomalyMap& map);
/// Throws FormatError on bad magic, version, size or non-finite values.
AnomalyMap decode_amap(std::span<const std::uint8_t> blob);

void write_amap(const std::filesystem::path& path, const AnomalyMap& map);
/// Throws NotFound when the file is absent, FormatError when corrupt.
AnomalyMap read_amap(const std::filesystem::path& path);

/// `{image_id}__r{row}_c{col}.amap`
std::string tile_map_filename(const std::string& image_id, int row, int col);
/// `{image_id}__merged.amap`
std::string merged_map_filename(const std::string& image_id);

}  // namespace tilebin
