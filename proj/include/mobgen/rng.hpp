// Copyright 2026 The mobgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers (Philox4x32-10). A stream is keyed by
// (seed, episode, stream id); draws depend only on the key and the draw
// index, so episodes can be produced in any order or in parallel.

#pragma once

#include <array>
#include <cstdint>

namespace mobgen {

/// Stream identifiers. Values are part of the on-disk reproducibility
/// contract; append only.
enum class Stream : std::uint32_t {
  kObjectPosition = 1,
  kObjectYaw = 2,
  kObjectScale = 3,
  kArmJoints = 4,
  kDepthNoise = 5,
  kFlowNoise = 6,
  kFlowTime = 7,
  kBatch = 8,
  kInit = 9,
  kSourceSelect = 10,
  kEval = 11,
  kTest = 100,
};

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Derives an independent 64-bit seed from a tuple of integers.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t episode, Stream stream);
  CounterRng(std::uint64_t seed, std::uint64_t episode, std::uint32_t stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller; both outputs of a pair are used.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t draws() const { return counter_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;

  std::uint32_t next_u32();
};

}  // namespace mobgen
