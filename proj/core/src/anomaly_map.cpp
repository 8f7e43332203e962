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
#include "tilebin/anomaly_map.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tilebin/error.hpp"
#include "tilebin/geometry.hpp"

namespace tilebin {

namespace {

constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4;

void put_u16(std::uint8_t* out, std::uint16_t v) {
  out[0] = static_cast<std::uint8_t>(v & 0xFF);
  out[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

AnomalyMap::AnomalyMap(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidArgument("anomaly map dimensions must be >= 1");
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

AnomalyMap::AnomalyMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 1 || height < 1) throw InvalidArgument("anomaly map dimensions must be >= 1");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("anomaly map value count does not match dimensions");
  }
}

bool AnomalyMap::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](float v) { return std::isfinite(v); });
}

std::vector<std::uint8_t> encode_amap(const AnomalyMap& map) {
  std::vector<std::uint8_t> out(kHeaderSize + map.size() * 4);
  std::uint8_t* p = out.data();
  std::memcpy(p, "AMAP", 4);
  put_u16(p + 4, kAmapVersion);
  put_u32(p + 6, static_cast<std::uint32_t>(map.width()));
  put_u32(p + 10, static_cast<std::uint32_t>(map.height()));
  p += kHeaderSize;
  for (float v : map.values()) {
    put_u32(p, std::bit_cast<std::uint32_t>(v));
    p += 4;
  }
  return out;
}

AnomalyMap decode_amap(std::span<const std::uint8_t> blob) {
  if (blob.size() < kHeaderSize) throw FormatError("amap: truncated header");
  if (std::memcmp(blob.data(), "AMAP", 4) != 0) throw FormatError("amap: bad magic");
  const auto version = static_cast<std::uint16_t>(blob[4] | (blob[5] << 8));
  if (version != kAmapVersion) {
    throw FormatError("amap: unsupported version " + std::to_string(version));
  }
  const std::uint32_t w = get_u32(blob, 6);
  const std::uint32_t h = get_u32(blob, 10);
  if (w == 0 || h == 0 || w > (1U << 20) || h > (1U << 20)) {
    throw FormatError("amap: invalid dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (blob.size() != kHeaderSize + count * 4) {
    throw FormatError("amap: payload size " + std::to_string(blob.size() - kHeaderSize) +
                      " does not match " + std::to_string(w) + "x" + std::to_string(h));
  }
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(get_u32(blob, kHeaderSize + 4 * i));
    if (!std::isfinite(values[i])) throw FormatError("amap: non-finite value");
  }
  return AnomalyMap(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

void write_amap(const std::filesystem::path& path, const AnomalyMap& map) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto blob = encode_amap(map);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size()));
}

AnomalyMap read_amap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("anomaly map not found: " + path.string());
  const std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  try {
    return decode_amap(blob);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string tile_map_filename(const std::string& image_id, int row, int col) {
  return tile_key(image_id, row, col) + ".amap";
}

std::string merged_map_filename(const std::string& image_id) {
  return image_id + "__merged.amap";
}

}  // namespace tilebin
