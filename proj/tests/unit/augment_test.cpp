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

#include <cmath>
#include <random>

#include "support/test_utils.hpp"
#include "tilebin/augment.hpp"
#include "tilebin/error.hpp"

namespace tilebin {
namespace {

double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

TEST(GaussianNoise, ZeroSigmaIsIdentity) {
  std::mt19937_64 gen(1);
  const ImageBuffer tile = testing::random_image(64, 64, 3, gen);
  Rng rng(5);
  EXPECT_EQ(add_gaussian_noise(tile, 0.0, rng), tile);
}

TEST(GaussianNoise, MomentsOverOneMillionSamples) {
  const ImageBuffer tile(1000, 1000, 1, 128);
  Rng rng(11);
  const ImageBuffer noisy = add_gaussian_noise(tile, 15.0, rng);
  std::vector<double> delta;
  delta.reserve(noisy.sample_count());
  for (auto s : noisy.samples()) delta.push_back(static_cast<double>(s) - 128.0);
  EXPECT_NEAR(sample_mean(delta), 0.0, 1.0);
  EXPECT_NEAR(sample_std(delta), 15.0, 1.0);
}

TEST(GaussianNoise, ClampsAtWhite) {
  const ImageBuffer tile(200, 200, 1, 255);
  Rng rng(3);
  const ImageBuffer noisy = add_gaussian_noise(tile, 15.0, rng);
  const auto s = noisy.samples();
  EXPECT_TRUE(std::all_of(s.begin(), s.end(), [](auto v) { return v <= 255; }));
  EXPECT_LT(sample_mean(std::vector<double>(s.begin(), s.end())), 255.0);
  EXPECT_TRUE(std::any_of(s.begin(), s.end(), [](auto v) { return v == 255; }));
}

TEST(GaussianNoise, NegativeSigmaRejected) {
  const ImageBuffer tile(2, 2, 1);
  Rng rng(0);
  EXPECT_THROW(add_gaussian_noise(tile, -1.0, rng), InvalidArgument);
}

TEST(Exposure, ZeroLambdaIsIdentity) {
  std::mt19937_64 gen(2);
  const ImageBuffer tile = testing::random_image(50, 40, 1, gen);
  EXPECT_EQ(adjust_exposure(tile, 0.0), tile);
}

TEST(Exposure, DoublingAndClamp) {
  const ImageBuffer tile(1, 1, 1, 100);
  EXPECT_EQ(adjust_exposure(tile, 1.0).at(0, 0), 200);
  EXPECT_EQ(adjust_exposure(ImageBuffer(1, 1, 1, 200), 1.0).at(0, 0), 255);
  // 200 * 2^0.2 = 229.74
  EXPECT_EQ(adjust_exposure(ImageBuffer(1, 1, 1, 200), 0.2).at(0, 0), 230);
  EXPECT_EQ(adjust_exposure(ImageBuffer(1, 1, 1, 0), 0.2).at(0, 0), 0);
}

TEST(Exposure, MonotoneInLambda) {
  for (int v = 0; v < 256; v += 5) {
    const ImageBuffer tile(1, 1, 1, static_cast<std::uint8_t>(v));
    int prev = -1;
    for (double lambda = -0.2; lambda <= 0.2001; lambda += 0.05) {
      const int out = adjust_exposure(tile, lambda).at(0, 0);
      EXPECT_GE(out, prev);
      prev = out;
    }
  }
}

TEST(Exposure, MatchesClosedForm) {
  std::mt19937_64 gen(9);
  const ImageBuffer tile = testing::random_image(32, 32, 3, gen);
  const double lambda = -0.137;
  const ImageBuffer out = adjust_exposure(tile, lambda);
  for (std::size_t i = 0; i < tile.sample_count(); ++i) {
    const double expect = std::round(std::min(255.0, tile.samples()[i] * std::pow(2.0, lambda)));
    ASSERT_EQ(out.samples()[i], static_cast<int>(expect));
  }
}

TEST(AugmentBatch, ZeroProbabilityReturnsInputs) {
  std::mt19937_64 gen(4);
  std::vector<ImageBuffer> tiles;
  for (int i = 0; i < 10; ++i) tiles.push_back(testing::random_image(16, 16, 1, gen));
  AugmentParams p;
  p.apply_probability = 0.0;
  EXPECT_EQ(augment_batch(tiles, p), tiles);
}

TEST(AugmentBatch, DegenerateParametersAreIdentity) {
  std::mt19937_64 gen(4);
  std::vector<ImageBuffer> tiles;
  for (int i = 0; i < 10; ++i) tiles.push_back(testing::random_image(16, 16, 3, gen));
  AugmentParams p;
  p.sigma = 0.0;
  p.lambda_low = 0.0;
  p.lambda_high = 0.0;
  p.apply_probability = 1.0;
  const auto batch = augment_batch_audited(tiles, p);
  EXPECT_EQ(batch.tiles, tiles);
  for (const auto& r : batch.records) {
    EXPECT_TRUE(r.applied);
    EXPECT_EQ(r.lambda, 0.0);
  }
}

TEST(AugmentBatch, ApplicationCountIsBinomial) {
  AugmentParams p;
  p.seed = 2024;
  int applied = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) applied += draw_augmentation(p, i).applied ? 1 : 0;
  EXPECT_GE(applied, 4700);
  EXPECT_LE(applied, 5300);
}

TEST(AugmentBatch, LambdaWithinRange) {
  AugmentParams p;
  p.apply_probability = 1.0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto r = draw_augmentation(p, i);
    EXPECT_GE(r.lambda, p.lambda_low);
    EXPECT_LE(r.lambda, p.lambda_high);
  }
}

TEST(AugmentBatch, DeterministicAcrossWorkerCounts) {
  std::mt19937_64 gen(8);
  std::vector<ImageBuffer> tiles;
  for (int i = 0; i < 24; ++i) tiles.push_back(testing::random_image(32, 32, 1, gen));
  AugmentParams p;
  p.seed = 77;
  const auto one = augment_batch(tiles, p, 1);
  EXPECT_EQ(one, augment_batch(tiles, p, 4));
  EXPECT_EQ(one, augment_batch(tiles, p, 1));
  p.seed = 78;
  EXPECT_NE(one, augment_batch(tiles, p, 1));
}

TEST(AugmentBatch, InvalidParameters) {
  std::vector<ImageBuffer> tiles{ImageBuffer(4, 4, 1)};
  AugmentParams p;
  p.apply_probability = 1.5;
  EXPECT_THROW(augment_batch(tiles, p), InvalidArgument);
  p = {};
  p.lambda_low = 0.3;
  EXPECT_THROW(augment_batch(tiles, p), InvalidArgument);
  p = {};
  p.sigma = -2;
  EXPECT_THROW(augment_batch(tiles, p), InvalidArgument);
}

TEST(AugmentBatch, EmptyBatch) {
  EXPECT_TRUE(augment_batch({}, AugmentParams{}).empty());
}

}  // namespace
}  // namespace tilebin
