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
#include "tilebin/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tilebin/error.hpp"
#include "tilebin/parallel.hpp"

namespace tilebin {

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 255.0)));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void validate(const AugmentParams& p) {
  if (!(p.sigma >= 0.0)) throw InvalidArgument("augment: sigma must be >= 0");
  if (!(p.lambda_low <= p.lambda_high)) {
    throw InvalidArgument("augment: lambda_low must be <= lambda_high");
  }
  if (!(p.apply_probability >= 0.0 && p.apply_probability <= 1.0)) {
    throw InvalidArgument("augment: apply_probability must lie in [0, 1]");
  }
}

ImageBuffer add_gaussian_noise(const ImageBuffer& tile, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("add_gaussian_noise: sigma must be >= 0");
  ImageBuffer out = tile;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& s : out.samples()) s = quantize(s + noise(rng));
  return out;
}

ImageBuffer adjust_exposure(const ImageBuffer& tile, double lambda) {
  ImageBuffer out = tile;
  const double gain = std::exp2(lambda);
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = quantize(v * gain);
  for (auto& s : out.samples()) s = lut[s];
  return out;
}

AugmentRecord draw_augmentation(const AugmentParams& params, std::uint64_t index) {
  Rng rng(splitmix64(params.seed ^ splitmix64(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentRecord rec;
  rec.applied = unit(rng) < params.apply_probability;
  if (rec.applied) {
    rec.lambda = params.lambda_low == params.lambda_high
                     ? params.lambda_low
                     : std::uniform_real_distribution<double>(
                           params.lambda_low, params.lambda_high)(rng);
    rec.noise_seed = rng();
  }
  return rec;
}

ImageBuffer apply_augmentation(const ImageBuffer& tile, const AugmentParams& params,
                               const AugmentRecord& record) {
  if (!record.applied) return tile;
  Rng noise_rng(record.noise_seed);
  return adjust_exposure(add_gaussian_noise(tile, params.sigma, noise_rng),
                         record.lambda);
}

AugmentedBatch augment_batch_audited(std::span<const ImageBuffer> tiles,
                                     const AugmentParams& params, int workers) {
  validate(params);
  AugmentedBatch batch;
  batch.records.resize(tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    batch.records[i] = draw_augmentation(params, i);
  }
  batch.tiles.assign(tiles.begin(), tiles.end());
  parallel_for(tiles.size(), workers, [&](std::size_t i) {
    if (batch.records[i].applied) {
      batch.tiles[i] = apply_augmentation(tiles[i], params, batch.records[i]);
    }
  });
  return batch;
}

std::vector<ImageBuffer> augment_batch(std::span<const ImageBuffer> tiles,
                                       const AugmentParams& params, int workers) {
  return augment_batch_audited(tiles, params, workers).tiles;
}

}  // namespace tilebin
