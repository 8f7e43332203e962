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

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "support/test_utils.hpp"
#include "tilebin/anomaly_map.hpp"
#include "tilebin/error.hpp"

namespace tilebin {
namespace {

TEST(Amap, RoundTripIsBitExact) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 97);
  for (int trial = 0; trial < 50; ++trial) {
    AnomalyMap m = testing::random_map(dim(rng), dim(rng), rng);
    m.at(0, 0) = -0.0F;
    if (m.size() > 1) m.values()[1] = std::numeric_limits<float>::denorm_min();
    const AnomalyMap back = decode_amap(encode_amap(m));
    ASSERT_EQ(back.width(), m.width());
    ASSERT_EQ(back.height(), m.height());
    for (std::size_t i = 0; i < m.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint32_t>(back.values()[i]),
                std::bit_cast<std::uint32_t>(m.values()[i]));
    }
  }
}

TEST(Amap, HeaderLayout) {
  AnomalyMap m(3, 2, 1.0F);
  const auto blob = encode_amap(m);
  ASSERT_EQ(blob.size(), 4U + 2U + 4U + 4U + 6U * 4U);
  EXPECT_EQ(std::string(blob.begin(), blob.begin() + 4), "AMAP");
  EXPECT_EQ(blob[4], 1);
  EXPECT_EQ(blob[5], 0);
  EXPECT_EQ(blob[6], 3);
  EXPECT_EQ(blob[10], 2);
  // 1.0f = 0x3f800000 little-endian
  EXPECT_EQ(blob[14], 0x00);
  EXPECT_EQ(blob[17], 0x3f);
}

TEST(Amap, CorruptBlobsAreRejected) {
  const auto good = encode_amap(AnomalyMap(4, 4, 0.5F));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_amap(bad_magic), FormatError);
  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_THROW(decode_amap(bad_version), FormatError);
  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(decode_amap(truncated), FormatError);
  auto extra = good;
  extra.push_back(0);
  EXPECT_THROW(decode_amap(extra), FormatError);
  EXPECT_THROW(decode_amap(std::vector<std::uint8_t>(5, 0)), FormatError);
  auto nan = good;
  nan[14] = 0x00;
  nan[15] = 0x00;
  nan[16] = 0xc0;
  nan[17] = 0x7f;
  EXPECT_THROW(decode_amap(nan), FormatError);
  auto zero_dim = good;
  zero_dim[6] = 0;
  EXPECT_THROW(decode_amap(zero_dim), FormatError);
}

TEST(Amap, FileRoundTripAndMissingFile) {
  testing::TempDir dir;
  std::mt19937_64 rng(1);
  const AnomalyMap m = testing::random_map(17, 9, rng);
  write_amap(dir.path() / "x.amap", m);
  EXPECT_EQ(read_amap(dir.path() / "x.amap"), m);
  EXPECT_THROW(read_amap(dir.path() / "y.amap"), NotFound);
}

TEST(Amap, FileNames) {
  EXPECT_EQ(tile_map_filename("img", 1, 2), "img__r1_c2.amap");
  EXPECT_EQ(merged_map_filename("img"), "img__merged.amap");
}

TEST(AnomalyMap, Validation) {
  EXPECT_THROW(AnomalyMap(0, 3), InvalidArgument);
  EXPECT_THROW(AnomalyMap(2, 2, std::vector<float>(3)), InvalidArgument);
  AnomalyMap m(2, 2);
  EXPECT_TRUE(m.all_finite());
  m.at(1, 1) = std::numeric_limits<float>::infinity();
  EXPECT_FALSE(m.all_finite());
}

}  // namespace
}  // namespace tilebin
