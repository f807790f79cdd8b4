// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
#include "mobgen/rng.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

namespace mobgen {
namespace {

// Known-answer vectors published with the Random123 reference
// implementation of Philox4x32-10.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                       {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, SameKeySameSequence) {
  CounterRng a(7, 3, Stream::kObjectYaw), b(7, 3, Stream::kObjectYaw);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, KeysAreIndependent) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t e = 0; e < 4; ++e)
      for (std::uint32_t st = 1; st < 5; ++st)
        firsts.insert(CounterRng(s, e, st).next_u64());
  EXPECT_EQ(firsts.size(), 64u);
}

TEST(CounterRng, UniformMoments) {
  CounterRng r(0, 0, Stream::kTest);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(1, 0, Stream::kTest);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(CounterRng, BelowCoversRange) {
  CounterRng r(2, 0, Stream::kTest);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) ++hist[r.below(7)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(MixSeed, DistinguishesArgumentOrder) {
  EXPECT_NE(mix_seed(1, 2, 3), mix_seed(2, 1, 3));
  EXPECT_NE(mix_seed(0, 0, 0), mix_seed(0, 0, 1));
  EXPECT_EQ(mix_seed(5, 6, 7), mix_seed(5, 6, 7));
}

}  // namespace
}  // namespace mobgen
