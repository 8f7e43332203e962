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
#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "support/test_utils.hpp"
#include "tilebin/error.hpp"
#include "tilebin/geometry.hpp"

namespace tilebin {
namespace {

std::vector<int> per_pixel_cover_count(const TilePlan& plan) {
  std::vector<int> count(static_cast<std::size_t>(plan.image_width) * plan.image_height, 0);
  for (const auto& t : plan.tiles) {
    for (int y = t.y0; y < std::min(plan.image_height, t.y0 + t.size); ++y)
      for (int x = t.x0; x < std::min(plan.image_width, t.x0 + t.size); ++x)
        ++count[static_cast<std::size_t>(y) * plan.image_width + x];
  }
  return count;
}

TEST(PlanTiles, DefaultWindowOn2048Square) {
  const TilePlan plan = plan_tiles(2048, 2048, 1024, 0.10);
  EXPECT_EQ(plan.stride, 921);
  EXPECT_EQ(plan.rows, 3);
  EXPECT_EQ(plan.cols, 3);
  ASSERT_EQ(plan.tiles.size(), 9U);
  const std::vector<int> expected = oracle::lattice_origins(2048, 1024, 921);
  EXPECT_EQ(expected, (std::vector<int>{0, 921, 1842}));
  for (const auto& t : plan.tiles) {
    EXPECT_EQ(t.x0, expected[t.col_index]);
    EXPECT_EQ(t.y0, expected[t.row_index]);
  }
  const auto cover = per_pixel_cover_count(plan);
  EXPECT_TRUE(std::all_of(cover.begin(), cover.end(), [](int c) { return c >= 1; }));
}

TEST(PlanTiles, ImageSmallerThanWindowIsOneTile) {
  const TilePlan plan = plan_tiles(1000, 800, 1024, 0.10);
  ASSERT_EQ(plan.tiles.size(), 1U);
  EXPECT_EQ(plan.tiles[0], (TileRect{0, 0, 0, 0, 1024}));
}

TEST(PlanTiles, OnePixelPastWindowForcesSecondColumn) {
  const TilePlan plan = plan_tiles(1025, 1024, 1024, 0.10);
  ASSERT_EQ(plan.tiles.size(), 2U);
  EXPECT_EQ(plan.tiles[0].x0, 0);
  EXPECT_EQ(plan.tiles[1].x0, 921);
  EXPECT_EQ(plan.tiles[1].y0, 0);
  EXPECT_EQ(oracle::lattice_origins(1025, 1024, 921), (std::vector<int>{0, 921}));
}

TEST(PlanTiles, RowMajorOrder) {
  const TilePlan plan = plan_tiles(3000, 2000, 1024, 0.10);
  for (std::size_t i = 1; i < plan.tiles.size(); ++i) {
    const auto& a = plan.tiles[i - 1];
    const auto& b = plan.tiles[i];
    EXPECT_TRUE(a.row_index < b.row_index || (a.row_index == b.row_index && a.col_index + 1 == b.col_index));
  }
}

TEST(PlanTiles, RejectsBadArguments) {
  EXPECT_THROW(plan_tiles(0, 10, 1024, 0.1), InvalidArgument);
  EXPECT_THROW(plan_tiles(10, -1, 1024, 0.1), InvalidArgument);
  EXPECT_THROW(plan_tiles(10, 10, 1, 0.1), InvalidArgument);
  EXPECT_THROW(plan_tiles(10, 10, 16, 1.0), InvalidArgument);
  EXPECT_THROW(plan_tiles(10, 10, 16, -0.1), InvalidArgument);
}

TEST(PlanTiles, StrideNeverUndershootsOverlap) {
  for (int window = 2; window <= 2048; ++window) {
    const int stride = tile_stride(window, 0.10);
    // shared columns >= 10% of the window, in exact integer arithmetic
    EXPECT_GE(10 * (window - stride), window) << "window " << window;
    EXPECT_GE(stride, 1);
  }
}

TEST(PlanTiles, CoversEveryPixelOnRandomSmallSizes) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 300);
  std::uniform_int_distribution<int> win(2, 128);
  std::uniform_real_distribution<double> ov(0.0, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = dim(rng);
    const int h = dim(rng);
    const TilePlan plan = plan_tiles(w, h, win(rng), ov(rng));
    const auto cover = per_pixel_cover_count(plan);
    ASSERT_TRUE(std::all_of(cover.begin(), cover.end(), [](int c) { return c >= 1; }))
        << w << "x" << h << " window " << plan.window;
    for (const auto& t : plan.tiles) {
      EXPECT_LT(t.x0, w);
      EXPECT_LT(t.y0, h);
      EXPECT_EQ(t.x0, t.col_index * plan.stride);
      EXPECT_EQ(t.y0, t.row_index * plan.stride);
    }
    if (w <= plan.window) EXPECT_EQ(plan.cols, 1);
    if (h <= plan.window) EXPECT_EQ(plan.rows, 1);
  }
}

TEST(PlanTiles, Deterministic) {
  EXPECT_EQ(plan_tiles(2448, 2048), plan_tiles(2448, 2048));
}

TEST(CropTile, PadsBeyondImageWithZeros) {
  const ImageBuffer img(100, 100, 1, 50);
  const ImageBuffer tile = crop_tile(img, {0, 0, 0, 0, 128}, 128);
  ASSERT_EQ(tile.width(), 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) ASSERT_EQ(tile.at(x, y), (x < 100 && y < 100) ? 50 : 0);
}

TEST(CropTile, InteriorRectIsExactCopy) {
  std::mt19937_64 rng(1);
  const ImageBuffer img = testing::random_image(64, 48, 3, rng);
  const ImageBuffer tile = crop_tile(img, {0, 0, 10, 5, 16}, 16);
  EXPECT_EQ(tile.channels(), 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) ASSERT_EQ(tile.at(x, y, c), img.at(10 + x, 5 + y, c));
}

TEST(CropTile, OutsideImageIsAnError) {
  const ImageBuffer img(10, 10, 1);
  EXPECT_THROW(crop_tile(img, {0, 0, 10, 0, 8}, 8), InvalidArgument);
  EXPECT_THROW(crop_tile(img, {0, 0, 0, 12, 8}, 8), InvalidArgument);
}

TEST(CropTile, DefaultPlanRoundTripReproducesEveryPixel) {
  std::mt19937_64 rng(3);
  const ImageBuffer img = testing::random_image(2048, 2048, 1, rng);
  const TilePlan plan = plan_tiles(2048, 2048);
  std::vector<int> seen(2048 * 2048, 0);
  for (const auto& rect : plan.tiles) {
    const ImageBuffer tile = crop_tile(img, rect, plan.window);
    const auto [vw, vh] = unpad_region(rect, plan);
    for (int y = 0; y < vh; ++y) {
      for (int x = 0; x < vw; ++x) {
        ASSERT_EQ(tile.at(x, y), img.at(rect.x0 + x, rect.y0 + y));
        ++seen[static_cast<std::size_t>(rect.y0 + y) * 2048 + rect.x0 + x];
      }
    }
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c >= 1; }));
}

TEST(UnpadRegion, ValidExtent) {
  const TilePlan plan = plan_tiles(2048, 2048);
  EXPECT_EQ(unpad_region(plan.at(0, 0), plan), std::make_pair(1024, 1024));
  EXPECT_EQ(unpad_region(plan.at(2, 2), plan), std::make_pair(206, 206));
  const TilePlan single = plan_tiles(1000, 800);
  EXPECT_EQ(unpad_region(single.tiles[0], single), std::make_pair(1000, 800));
}

TEST(TileManifest, LineFormatAndFileRoundTrip) {
  const TilePlan plan = plan_tiles(2448, 2048);
  const auto records = manifest_records("img_01", plan);
  EXPECT_EQ(tile_record_to_line(records[1]),
            R"({"image_id":"img_01","row_index":0,"col_index":1,"x0":921,"y0":0,"window":1024,"image_width":2448,"image_height":2048})");
  testing::TempDir dir;
  write_tile_manifest(dir.path() / "m.jsonl", records);
  EXPECT_EQ(read_tile_manifest(dir.path() / "m.jsonl"), records);
  EXPECT_THROW(tile_record_from_line(R"({"image_id":"x"})"), FormatError);
  EXPECT_THROW(read_tile_manifest(dir.path() / "absent.jsonl"), NotFound);
}

TEST(TileKey, Format) { EXPECT_EQ(tile_key("a", 2, 10), "a__r2_c10"); }

}  // namespace
}  // namespace tilebin
