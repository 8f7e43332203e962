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

#include <span>

#include "tilebin/anomaly_map.hpp"
#include "tilebin/geometry.hpp"

namespace tilebin {

/// Bilinear resize with corner-aligned sampling: output pixel x samples the
/// source at x * (src_w - 1) / (dst_w - 1). A 1-pixel target samples the
/// source centre.
AnomalyMap resize_map_bilinear(const AnomalyMap& map, int target_width,
                               int target_height);

struct TileMap {
  TileRect rect;
  AnomalyMap map;
};

/// Reassembles per-tile maps into an image_width x image_height map. Maps are
/// resized to window size first; padded pixels never contribute and overlaps
/// are averaged. Accumulation order is the plan's row-major tile order for
/// every pixel, so the result does not depend on `workers`.
///
/// Throws IncompleteInput listing the (row, col) of every missing tile and
/// InvalidArgument for duplicates or tiles not in the plan.
AnomalyMap merge_maps(std::span<const TileMap> tile_maps, const TilePlan& plan,
                      int workers = 1);

}  // namespace tilebin
