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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mimo_precode/rng.hpp"

using namespace mimo_precode;

static_assert(std::uniform_random_bit_generator<Xoshiro256>);

TEST_CASE("splitmix64 reference outputs") {
  // First outputs for state 0 of the reference implementation.
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(state) == 0x06c45d188009454fULL);
}

TEST_CASE("streams are deterministic and distinct") {
  auto a = derive_stream(7, 3);
  auto b = derive_stream(7, 3);
  auto c = derive_stream(7, 4);
  auto d = derive_stream(8, 3);
  int same_c = 0, same_d = 0;
  for (int k = 0; k < 64; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
}

TEST_CASE("uniform draws stay in range with the right moments") {
  auto rng = derive_stream(1, 0);
  constexpr int n = 200000;
  double sum = 0, sum2 = 0;
  long outside = 0;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    outside += u < 0.0 || u >= 1.0;
    sum += u;
    sum2 += u * u;
  }
  CHECK(outside == 0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
}

TEST_CASE("uniform_int is unbiased over small ranges") {
  auto rng = derive_stream(2, 0);
  for (int range : {1, 4, 16, 7}) {
    std::vector<long> counts(range, 0);
    constexpr int n = 160000;
    long outside = 0;
    for (int k = 0; k < n; ++k) {
      const int v = rng.uniform_int(range);
      if (v < 0 || v >= range) ++outside;
      else ++counts[v];
    }
    CHECK(outside == 0);
    // Chi-square against the uniform law; 6 sigma of its spread.
    double chi2 = 0;
    const double expected = double(n) / range;
    for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
    const double dof = range - 1;
    CHECK(chi2 <= dof + 6 * std::sqrt(2 * dof) + 1e-9);
  }
}

TEST_CASE("normal and complex normal moments") {
  auto rng = derive_stream(3, 0);
  constexpr int n = 400000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  CHECK(std::abs(m1 / n) < 0.01);
  CHECK(m2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m4 / n == doctest::Approx(3.0).epsilon(0.03));

  double re2 = 0, im2 = 0, cross = 0;
  for (int k = 0; k < n; ++k) {
    const auto c = rng.complex_normal(0.5);
    re2 += c.real() * c.real();
    im2 += c.imag() * c.imag();
    cross += c.real() * c.imag();
  }
  CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(im2 / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(cross / n) < 0.005);
}
