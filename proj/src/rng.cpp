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

#include "mimo_precode/rng.hpp"

#include <cmath>
#include <numbers>

namespace mimo_precode {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

namespace {

std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  std::uint64_t state = master_seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (stream_index * 0xd1b54a32d192ed03ULL);
  splitmix64(state);
  return splitmix64(state);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : gen_(stream_seed(master_seed, stream_index)) {}

double RandomStream::uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

int RandomStream::uniform_int(int n) {
  const std::uint64_t range = std::uint64_t(n);
  std::uint64_t x = gen_() >> 32;
  std::uint64_t m = x * range;
  std::uint64_t low = m & 0xffffffffULL;
  if (low < range) {
    const std::uint64_t threshold = (0x100000000ULL - range) % range;
    while (low < threshold) {
      x = gen_() >> 32;
      m = x * range;
      low = m & 0xffffffffULL;
    }
  }
  return int(m >> 32);
}

double RandomStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // 1 - uniform() lies in (0, 1], keeping the logarithm finite.
  const double radius = std::sqrt(-2.0 * std::log(1.0 - uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::complex<double> RandomStream::complex_normal(double variance_per_dim) {
  const double scale = std::sqrt(variance_per_dim);
  const double re = normal();
  const double im = normal();
  return {scale * re, scale * im};
}

RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t trial_index) {
  return RandomStream(master_seed, trial_index);
}

}  // namespace mimo_precode
