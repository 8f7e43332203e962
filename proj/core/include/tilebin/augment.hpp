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

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tilebin/image.hpp"

namespace tilebin {

using Rng = std::mt19937_64;

struct AugmentParams {
  double sigma = 15.0;
  double lambda_low = -0.2;
  double lambda_high = 0.2;
  double apply_probability = 0.5;
  std::uint64_t seed = 0;
};

/// Throws InvalidArgument when sigma < 0, lambda_low > lambda_high or the
/// probability is outside [0, 1].
void validate(const AugmentParams& params);

/// x -> round(clamp(x + n, 0, 255)), n ~ N(0, sigma^2) drawn per sample.
ImageBuffer add_gaussian_noise(const ImageBuffer& tile, double sigma, Rng& rng);

/// x -> round(clamp(x * 2^lambda, 0, 255)).
ImageBuffer adjust_exposure(const ImageBuffer& tile, double lambda);

/// What happened to one tile of a batch.
struct AugmentRecord {
  bool applied = false;
  double lambda = 0.0;
  std::uint64_t noise_seed = 0;
};

struct AugmentedBatch {
  std::vector<ImageBuffer> tiles;
  std::vector<AugmentRecord> records;
};

/// Decision, exposure and noise stream for tile `index`; depends only on
/// (params, index).
AugmentRecord draw_augmentation(const AugmentParams& params, std::uint64_t index);

/// Noise then exposure on a draw_augmentation() ratio of the tiles; others pass
/// through. Output is independent of `workers`.
AugmentedBatch augment_batch_audited(std::span<const ImageBuffer> tiles,
                                     const AugmentParams& params, int workers = 1);

std::vector<ImageBuffer> augment_batch(std::span<const ImageBuffer> tiles,
                                       const AugmentParams& params, int workers = 1);

/// Applies one recorded augmentation to a tile.
ImageBuffer apply_augmentation(const ImageBuffer& tile, const AugmentParams& params,
                               const AugmentRecord& record);

}  // namespace tilebin
