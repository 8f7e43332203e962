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
#include "tilebin/components.hpp"
#include "tilebin/error.hpp"

namespace tilebin {
namespace {

void expect_matches_oracle(const BinaryMask& mask, Connectivity conn) {
  int expect_count = 0;
  const auto expect = oracle::flood_fill_labels(mask, static_cast<int>(conn), &expect_count);
  const Components got = connected_components(mask, conn);
  ASSERT_EQ(got.count, expect_count);
  ASSERT_EQ(got.labels, expect);
  ASSERT_EQ(got.stats.size(), static_cast<std::size_t>(got.count));
  std::vector<std::int64_t> area(static_cast<std::size_t>(got.count), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int l = got.label_at(x, y);
      if (l == 0) continue;
      ++area[static_cast<std::size_t>(l - 1)];
      const auto& s = got.stats[static_cast<std::size_t>(l - 1)];
      ASSERT_TRUE(x >= s.x_min && x <= s.x_max && y >= s.y_min && y <= s.y_max);
    }
  }
  for (int k = 0; k < got.count; ++k) ASSERT_EQ(area[k], got.stats[k].area);
}

TEST(ConnectedComponents, EmptyMask) {
  const Components c = connected_components(BinaryMask(9, 4));
  EXPECT_EQ(c.count, 0);
  EXPECT_TRUE(c.stats.empty());
  for (auto l : c.labels) EXPECT_EQ(l, 0);
}

TEST(ConnectedComponents, DiagonalDependsOnConnectivity) {
  BinaryMask m(3, 3);
  m.set(0, 0);
  m.set(1, 1);
  m.set(2, 2);
  EXPECT_EQ(connected_components(m, Connectivity::kFour).count, 3);
  EXPECT_EQ(connected_components(m, Connectivity::kEight).count, 1);
  const Components c = connected_components(m, Connectivity::kEight);
  EXPECT_EQ(c.stats[0].area, 3);
  EXPECT_EQ(c.stats[0].x_min, 0);
  EXPECT_EQ(c.stats[0].x_max, 2);
}

TEST(ConnectedComponents, UShapeMergesLate) {
  // two arms only join on the bottom row
  BinaryMask m(5, 4);
  for (int y = 0; y < 4; ++y) {
    m.set(0, y);
    m.set(4, y);
  }
  for (int x = 0; x < 5; ++x) m.set(x, 3);
  const Components c = connected_components(m, Connectivity::kFour);
  EXPECT_EQ(c.count, 1);
  EXPECT_EQ(c.label_at(4, 0), 1);
  EXPECT_EQ(c.stats[0].area, 11);
}

TEST(ConnectedComponents, ExhaustiveFourByFour) {
  for (std::uint32_t bits = 0; bits < (1U << 16); ++bits) {
    BinaryMask m(4, 4);
    for (int i = 0; i < 16; ++i) m.bits()[i] = (bits >> i) & 1U;
    expect_matches_oracle(m, Connectivity::kFour);
    expect_matches_oracle(m, Connectivity::kEight);
    if (::testing::Test::HasFatalFailure()) FAIL() << "mask bits " << bits;
  }
}

TEST(ConnectedComponents, RandomMasksMatchFloodFill) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> density(0.05, 0.8);
  for (int trial = 0; trial < 2000; ++trial) {
    const BinaryMask m = testing::random_mask(32, 32, density(rng), rng);
    expect_matches_oracle(m, Connectivity::kFour);
    expect_matches_oracle(m, Connectivity::kEight);
    if (::testing::Test::HasFatalFailure()) FAIL() << "trial " << trial;
  }
}

TEST(ConnectedComponents, NonSquareShapes) {
  std::mt19937_64 rng(5);
  for (auto [w, h] : {std::pair{1, 50}, std::pair{50, 1}, std::pair{17, 3}, std::pair{1, 1}}) {
    const BinaryMask m = testing::random_mask(w, h, 0.5, rng);
    expect_matches_oracle(m, Connectivity::kFour);
    expect_matches_oracle(m, Connectivity::kEight);
  }
}

TEST(BinaryMask, CombineAndContain) {
  std::mt19937_64 rng(1);
  const BinaryMask a = testing::random_mask(20, 10, 0.3, rng);
  const BinaryMask b = testing::random_mask(20, 10, 0.3, rng);
  const BinaryMask u = combine_or(a, b);
  EXPECT_TRUE(u.contains(a));
  EXPECT_TRUE(u.contains(b));
  EXPECT_EQ(combine_or(a, a), a);
  EXPECT_EQ(combine_or(a, BinaryMask(20, 10)), a);
  EXPECT_EQ(combine_or(a, b), combine_or(b, a));
  EXPECT_THROW(combine_or(a, BinaryMask(10, 20)), InvalidArgument);
}

TEST(BinaryMask, PngRoundTrip) {
  std::mt19937_64 rng(2);
  const BinaryMask m = testing::random_mask(33, 17, 0.4, rng);
  testing::TempDir dir;
  write_mask_png(dir.path() / "m.png", m);
  EXPECT_EQ(read_mask_png(dir.path() / "m.png"), m);
  ImageBuffer gray(2, 1, 1, 0);
  gray.at(1, 0) = 7;
  write_png(dir.path() / "g.png", gray);
  const BinaryMask g = read_mask_png(dir.path() / "g.png");
  EXPECT_FALSE(g.at(0, 0));
  EXPECT_TRUE(g.at(1, 0));
}

}  // namespace
}  // namespace tilebin
