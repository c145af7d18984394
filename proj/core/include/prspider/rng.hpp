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


#pragma once

#include <cstddef>
#include <cstdint>

namespace prspider {

/// Identifies one independent random stream: which worker draws, in which
/// epoch, at which inner iteration.
struct StreamKey {
  std::uint64_t worker = 0;
  std::uint64_t epoch = 0;
  std::uint64_t iteration = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Reserved epoch tags for draws that do not belong to an inner iteration.
inline constexpr std::uint64_t kInitEpoch = ~std::uint64_t{0};
inline constexpr std::uint64_t kProblemEpoch = ~std::uint64_t{0} - 1;

/// Counter-based generator: draw k of stream (seed, key) is a fixed function
/// of (seed, key, k). Nothing is shared between streams, so any worker's
/// draws can be replayed in isolation and in any thread.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamKey key);

  std::uint64_t next_u64() noexcept;

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (two uniforms per call, no caching).
  double normal() noexcept;

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace prspider
