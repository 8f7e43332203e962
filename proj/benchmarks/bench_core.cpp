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
#include <benchmark/benchmark.h>

#include <random>

#include "support/test_utils.hpp"
#include "tilebin/augment.hpp"
#include "tilebin/binarize.hpp"
#include "tilebin/components.hpp"
#include "tilebin/geometry.hpp"
#include "tilebin/merger.hpp"
#include "tilebin/metrics.hpp"
#include "tilebin/scorer.hpp"

namespace {

using namespace tilebin;

void BM_PlanTiles(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(1, 4096);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_tiles(dim(rng), dim(rng)));
  }
}
BENCHMARK(BM_PlanTiles);

void BM_CropScoreMerge(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const ImageBuffer image = testing::random_image(2448, 2048, 3, rng);
  const TilePlan plan = plan_tiles(image.width(), image.height());
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    std::vector<TileMap> maps;
    for (const auto& rect : plan.tiles) {
      const TileRecord id{"b", rect.row_index, rect.col_index, rect.x0, rect.y0, plan.window,
                          plan.image_width, plan.image_height};
      maps.push_back({rect, score_tile(IntensityScorer{}, crop_tile(image, rect, plan.window), id)});
    }
    benchmark::DoNotOptimize(merge_maps(maps, plan, workers));
  }
}
BENCHMARK(BM_CropScoreMerge)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_MergeLowResolution(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const TilePlan plan = plan_tiles(2448, 2048);
  std::vector<TileMap> maps;
  for (const auto& rect : plan.tiles) maps.push_back({rect, testing::random_map(518, 518, rng)});
  for (auto _ : state) benchmark::DoNotOptimize(merge_maps(maps, plan, 4));
}
BENCHMARK(BM_MergeLowResolution)->Unit(benchmark::kMillisecond);

void BM_ConnectedComponents(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int side = static_cast<int>(state.range(0));
  const BinaryMask mask = testing::random_mask(side, side, 0.4, rng);
  for (auto _ : state) benchmark::DoNotOptimize(connected_components(mask));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_ConnectedComponents)->Arg(256)->Arg(2048);

void BM_Mebin(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const int side = static_cast<int>(state.range(0));
  const AnomalyMap map = testing::random_map(side, side, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mebin_threshold(map));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Mebin)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_AugmentBatch(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::vector<ImageBuffer> tiles;
  for (int i = 0; i < 16; ++i) tiles.push_back(testing::random_image(256, 256, 3, rng));
  AugmentParams params;
  for (auto _ : state) benchmark::DoNotOptimize(augment_batch(tiles, params, 4));
}
BENCHMARK(BM_AugmentBatch)->Unit(benchmark::kMillisecond);

void BM_Aupro(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::vector<AnomalyMap> maps;
  std::vector<BinaryMask> gts;
  for (int i = 0; i < 8; ++i) {
    maps.push_back(testing::random_map(512, 512, rng));
    gts.push_back(testing::random_mask(512, 512, 0.02, rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(aupro(maps, gts));
}
BENCHMARK(BM_Aupro)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
