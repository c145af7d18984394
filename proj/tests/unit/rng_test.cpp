// Copyright 2026 The prspider Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "prspider/rng.hpp"

namespace prspider {
namespace {

TEST(Mix64, MatchesReferenceSplitMix64) {
  // First output of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(mix64(0x9E3779B97F4A7C15ULL), 0xE220A8397B1DCDAFULL);
}

TEST(RngStream, SameKeySameSequence) {
  RngStream a(42, {1, 2, 3}), b(42, {1, 2, 3});
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.draws(), 1000u);
}

TEST(RngStream, DistinctKeysDiffer) {
  const std::vector<StreamKey> keys{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  std::set<std::uint64_t> first;
  for (const auto& k : keys) first.insert(RngStream(7, k).next_u64());
  first.insert(RngStream(8, {0, 0, 0}).next_u64());
  EXPECT_EQ(first.size(), keys.size() + 1);
}

TEST(RngStream, UniformIndexRangeAndBalance) {
  RngStream rng(3, {0, 0, 0});
  EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto k = rng.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, draws / 7.0, 5.0 * std::sqrt(draws / 7.0));
}

TEST(RngStream, UniformAndNormalMoments) {
  RngStream rng(11, {2, 5, 9});
  const int n = 200000;
  double s = 0.0, s2 = 0.0, z = 0.0, z2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
    const double g = rng.normal();
    ASSERT_TRUE(std::isfinite(g));
    z += g;
    z2 += g * g;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - 0.25, 1.0 / 12.0, 0.002);
  EXPECT_NEAR(z / n, 0.0, 0.01);
  EXPECT_NEAR(z2 / n, 1.0, 0.02);
}

TEST(RngStream, NeighbouringStreamsAreUncorrelated) {
  const int n = 20000;
  double sum = 0.0;
  for (std::uint64_t w = 0; w < 8; ++w) {
    RngStream a(5, {w, 0, 0}), b(5, {w + 1, 0, 0});
    for (int i = 0; i < n / 8; ++i) sum += (a.uniform01() - 0.5) * (b.uniform01() - 0.5);
  }
  // Var of the product is 1/144, so the mean has sd 1/(12 sqrt(n)).
  EXPECT_NEAR(sum / n, 0.0, 4.0 / (12.0 * std::sqrt(n)));
}

}  // namespace
}  // namespace prspider
