// SPDX-License-Identifier: Apache-2.0
//
// mimo-precode: real-valued SVD precoding and fast ML decoding for MIMO QAM
// Copyright (C) 2026 The mimo-precode authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <limits>

namespace mimo_precode {

// SplitMix64 step: advances state and returns a mixed 64-bit value.
std::uint64_t splitmix64(std::uint64_t& state);

// xoshiro256** generator; satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::array<std::uint64_t, 4> s_;
};

// Deterministic per-trial stream. The sampling routines below are written out
// explicitly (rather than std::normal_distribution) so that draws are
// identical across standard library implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t next_u64() { return gen_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n), n >= 1 (Lemire's nearly-divisionless method).
  int uniform_int(int n);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  // Circularly symmetric complex Gaussian with the given variance per real dimension.
  std::complex<double> complex_normal(double variance_per_dim);

 private:
  Xoshiro256 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Substream for one trial: the seed is derived from (master_seed, trial_index)
// by SplitMix64 mixing, so results never depend on how trials are scheduled.
RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index);

}  // namespace mimo_precode
