// Copyright 2026 The ldpmarket Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <numeric>
#include <set>

#include "gtest/gtest.h"
#include "ldpmarket/common/bytes.h"
#include "ldpmarket/common/random_stream.h"

namespace ldpmarket {
namespace {

struct TestTag { static constexpr const char* kName = "test value"; };
using Four = FixedBytes<4, TestTag>;

TEST(HexTest, RoundTrip) {
  const Bytes data = {0x00, 0x01, 0xab, 0xff};
  EXPECT_EQ(ToHex(data), "0001abff");
  EXPECT_EQ(*FromHex("0001abff"), data);
  EXPECT_EQ(*FromHex("0x0001ABFF"), data);
}

TEST(HexTest, RejectsBadInput) {
  EXPECT_FALSE(FromHex("abc").ok());
  EXPECT_FALSE(FromHex("zz").ok());
}

TEST(FixedBytesTest, SizeIsChecked) {
  auto bad = Four::FromHex("010203");
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find("test value"), absl::string_view::npos);
  auto good = Four::FromHex("01020304");
  ASSERT_TRUE(good.ok());
  EXPECT_EQ(good->ToHex(), "01020304");
  EXPECT_LT(*Four::FromHex("01020304"), *Four::FromHex("01020305"));
}

TEST(ByteCodecTest, BigEndianIntegers) {
  ByteWriter w;
  w.PutU8(0x7f);
  w.PutU32(0x01020304);
  w.PutU64(0x0102030405060708ULL);
  w.PutString("hi");
  EXPECT_EQ(ToHex(w.bytes()), "7f010203040102030405060708000000026869");

  ByteReader r(w.bytes());
  EXPECT_EQ(*r.ReadU8(), 0x7f);
  EXPECT_EQ(*r.ReadU32(), 0x01020304u);
  EXPECT_EQ(*r.ReadU64(), 0x0102030405060708ULL);
  EXPECT_EQ(*r.ReadString(), "hi");
  EXPECT_TRUE(r.done());
  EXPECT_TRUE(r.ExpectDone().ok());
}

TEST(ByteCodecTest, TruncationIsDataLoss) {
  const Bytes data = {0x00, 0x00, 0x00, 0x05, 0x01};
  ByteReader r(data);
  auto s = r.ReadLengthPrefixed();
  ASSERT_FALSE(s.ok());
  EXPECT_TRUE(absl::IsDataLoss(s.status()));

  ByteReader r2(data);
  ASSERT_TRUE(r2.ReadU8().ok());
  EXPECT_FALSE(r2.ExpectDone().ok());
}

// Reference values from an independent SplitMix64 / mt19937_64 implementation.
TEST(RandomStreamTest, MatchesReferenceGenerator) {
  RandomStream standard(5489);
  EXPECT_EQ(standard.NextU64(), 14514284786278117030ULL);

  RandomStream rng(42);
  EXPECT_EQ(rng.NextU64(), 13930160852258120406ULL);
  RandomStream again(42);
  EXPECT_DOUBLE_EQ(again.UniformDouble(), 0.755155532954539);
}

TEST(RandomStreamTest, DeriveSeedReference) {
  EXPECT_EQ(DeriveSeed(42, seed_domain::kTrial, 0), 17495621436967208134ULL);
  EXPECT_NE(DeriveSeed(42, seed_domain::kTrial, 0),
            DeriveSeed(42, seed_domain::kTrial, 1));
  EXPECT_NE(DeriveSeed(42, seed_domain::kTrial, 0),
            DeriveSeed(42, seed_domain::kOperatorResponse, 0));
}

TEST(RandomStreamTest, FillBytesIsLittleEndianWords) {
  RandomStream a(42);
  std::array<uint8_t, 8> out{};
  a.FillBytes(out);
  const uint64_t word = 13930160852258120406ULL;
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(out[i], static_cast<uint8_t>(word >> (8 * i)));
  }
}

TEST(RandomStreamTest, UniformIntStaysInRange) {
  RandomStream rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const uint64_t v = rng.UniformInt(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(RandomStreamTest, NormalMoments) {
  RandomStream rng(3);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.Normal(10.0, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 10.0, 0.02);
  EXPECT_NEAR(var, 4.0, 0.06);
}

TEST(RandomStreamTest, ShuffleIsSeededPermutation) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  RandomStream r1(9), r2(9);
  SeededShuffle(std::span<int>(a), r1);
  SeededShuffle(std::span<int>(b), r2);
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(50);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(sorted, expected);
  EXPECT_NE(a, expected);
}

}  // namespace
}  // namespace ldpmarket
