// Copyright 2026 The xcorpus Authors
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

#pragma once

#include <cstdint>
#include <string_view>

namespace xcorpus {

/// SplitMix64 (Steele, Lea & Flood). 64-bit state, exactly specified output
/// stream, so manifests and seeded experiments reproduce on any platform.
/// Distributions are implemented here instead of <random> because the
/// standard library leaves their algorithms unspecified.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64/v1";

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent child stream keyed by `stream`; same (seed, stream) always
  /// yields the same child.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one value per call; the pair's second
  /// half is cached).
  double normal();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stateless 64-bit finalizer used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace xcorpus
