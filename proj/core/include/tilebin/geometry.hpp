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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tilebin/image.hpp"

namespace tilebin {

inline constexpr int kDefaultWindow = 1024;
inline constexpr double kDefaultOverlap = 0.10;

/// One square window of a tile plan. Origins sit on the stride lattice; the
/// window may run past the right/bottom image edge.
struct TileRect {
  int row_index = 0;
  int col_index = 0;
  int x0 = 0;
  int y0 = 0;
  int size = 0;

  friend bool operator==(const TileRect&, const TileRect&) = default;
};

struct TilePlan {
  int image_width = 0;
  int image_height = 0;
  int window = kDefaultWindow;
  double overlap_fraction = kDefaultOverlap;
  int stride = 0;
  int rows = 0;
  int cols = 0;
  std::vector<TileRect> tiles;  // row-major

  const TileRect& at(int row, int col) const {
    return tiles[static_cast<std::size_t>(row) * cols + col];
  }

  friend bool operator==(const TilePlan&, const TilePlan&) = default;
};

/// floor(window * (1 - overlap)), never below 1.
int tile_stride(int window, double overlap_fraction);

/// Origins 0, stride, 2*stride, ... per axis until origin + window covers the
/// dimension. Throws InvalidArgument on bad dimensions, window < 2 or overlap
/// outside [0, 1).
TilePlan plan_tiles(int width, int height, int window = kDefaultWindow,
                    double overlap_fraction = kDefaultOverlap);

/// window x window copy of `rect`; samples past the image edge are zero.
ImageBuffer crop_tile(const ImageBuffer& image, const TileRect& rect, int window);

/// Width and height of the part of `rect` that lies inside the image.
std::pair<int, int> unpad_region(const TileRect& rect, const TilePlan& plan);

/// Tile manifest record. Serialized as one JSON object per line with exactly
/// these field names.
struct TileRecord {
  std::string image_id;
  int row_index = 0;
  int col_index = 0;
  int x0 = 0;
  int y0 = 0;
  int window = 0;
  int image_width = 0;
  int image_height = 0;

  TileRect rect() const { return {row_index, col_index, x0, y0, window}; }

  friend bool operator==(const TileRecord&, const TileRecord&) = default;
};

std::vector<TileRecord> manifest_records(const std::string& image_id,
                                         const TilePlan& plan);

std::string tile_record_to_line(const TileRecord& record);
TileRecord tile_record_from_line(const std::string& line);

void write_tile_manifest(const std::filesystem::path& path,
                         const std::vector<TileRecord>& records);
std::vector<TileRecord> read_tile_manifest(const std::filesystem::path& path);

/// `{image_id}__r{row}_c{col}`, shared by tile PNGs and map blobs.
std::string tile_key(const std::string& image_id, int row, int col);

}  // namespace tilebin
