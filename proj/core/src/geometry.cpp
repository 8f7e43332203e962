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
#include "tilebin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "tilebin/error.hpp"

namespace tilebin {

namespace {

std::vector<int> axis_origins(int dimension, int window, int stride) {
  std::vector<int> origins{0};
  while (origins.back() + window < dimension) {
    origins.push_back(origins.back() + stride);
  }
  return origins;
}

}  // namespace

int tile_stride(int window, double overlap_fraction) {
  // The epsilon absorbs representation error in (1 - overlap) so that exact
  // products such as 10 * 0.9 do not floor to 8.
  const double raw = static_cast<double>(window) * (1.0 - overlap_fraction);
  return std::max(1, static_cast<int>(std::floor(raw + 1e-9)));
}

TilePlan plan_tiles(int width, int height, int window, double overlap_fraction) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("plan_tiles: image dimensions must be >= 1");
  }
  if (window < 2) {
    throw InvalidArgument("plan_tiles: window must be >= 2");
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw InvalidArgument("plan_tiles: overlap_fraction must lie in [0, 1)");
  }

  TilePlan plan;
  plan.image_width = width;
  plan.image_height = height;
  plan.window = window;
  plan.overlap_fraction = overlap_fraction;
  plan.stride = tile_stride(window, overlap_fraction);

  const auto xs = axis_origins(width, window, plan.stride);
  const auto ys = axis_origins(height, window, plan.stride);
  plan.rows = static_cast<int>(ys.size());
  plan.cols = static_cast<int>(xs.size());
  plan.tiles.reserve(xs.size() * ys.size());
  for (int r = 0; r < plan.rows; ++r) {
    for (int c = 0; c < plan.cols; ++c) {
      plan.tiles.push_back({r, c, xs[c], ys[r], window});
    }
  }
  return plan;
}

ImageBuffer crop_tile(const ImageBuffer& image, const TileRect& rect, int window) {
  if (window < 1) throw InvalidArgument("crop_tile: window must be >= 1");
  if (rect.x0 < 0 || rect.y0 < 0 || rect.x0 >= image.width() ||
      rect.y0 >= image.height()) {
    throw InvalidArgument("crop_tile: tile origin (" + std::to_string(rect.x0) +
                          "," + std::to_string(rect.y0) + ") lies outside a " +
                          std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + " image");
  }
  ImageBuffer tile(window, window, image.channels(), 0);
  const int valid_w = std::min(window, image.width() - rect.x0);
  const int valid_h = std::min(window, image.height() - rect.y0);
  const std::size_t nbytes = static_cast<std::size_t>(valid_w) * image.channels();
  for (int y = 0; y < valid_h; ++y) {
    const auto src = image.row(rect.y0 + y).subspan(
        static_cast<std::size_t>(rect.x0) * image.channels(), nbytes);
    std::memcpy(tile.row(y).data(), src.data(), nbytes);
  }
  return tile;
}

std::pair<int, int> unpad_region(const TileRect& rect, const TilePlan& plan) {
  return {std::clamp(plan.image_width - rect.x0, 0, rect.size),
          std::clamp(plan.image_height - rect.y0, 0, rect.size)};
}

std::vector<TileRecord> manifest_records(const std::string& image_id,
                                         const TilePlan& plan) {
  std::vector<TileRecord> out;
  out.reserve(plan.tiles.size());
  for (const auto& t : plan.tiles) {
    out.push_back({image_id, t.row_index, t.col_index, t.x0, t.y0, t.size,
                   plan.image_width, plan.image_height});
  }
  return out;
}

std::string tile_record_to_line(const TileRecord& r) {
  nlohmann::ordered_json j;
  j["image_id"] = r.image_id;
  j["row_index"] = r.row_index;
  j["col_index"] = r.col_index;
  j["x0"] = r.x0;
  j["y0"] = r.y0;
  j["window"] = r.window;
  j["image_width"] = r.image_width;
  j["image_height"] = r.image_height;
  return j.dump();
}

TileRecord tile_record_from_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TileRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.row_index = j.at("row_index").get<int>();
    r.col_index = j.at("col_index").get<int>();
    r.x0 = j.at("x0").get<int>();
    r.y0 = j.at("y0").get<int>();
    r.window = j.at("window").get<int>();
    r.image_width = j.at("image_width").get<int>();
    r.image_height = j.at("image_height").get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad tile manifest record: ") + e.what());
  }
}

void write_tile_manifest(const std::filesystem::path& path,
                         const std::vector<TileRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (const auto& r : records) out << tile_record_to_line(r) << '\n';
}

std::vector<TileRecord> read_tile_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("tile manifest not found: " + path.string());
  std::vector<TileRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(tile_record_from_line(line));
  }
  return out;
}

std::string tile_key(const std::string& image_id, int row, int col) {
  return image_id + "__r" + std::to_string(row) + "_c" + std::to_string(col);
}

}  // namespace tilebin
