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

#include <set>
#include <stdexcept>

#include "doctest.h"
#include "mimo_precode/constellation.hpp"
#include "mimo_precode/errors.hpp"

using namespace mimo_precode;

TEST_CASE("qam construction matches the index layout and average energy") {
  for (int order : {4, 16, 64, 256}) {
    const auto qam = make_qam(order);
    const int side = qam.side();
    CHECK(side * side == order);
    CHECK(qam.points().size() == std::size_t(order));
    double energy = 0;
    for (int k = 0; k < order; ++k) {
      const auto x = qam.point(k);
      CHECK(x.re == qam.pam_levels()[k / side]);
      CHECK(x.im == qam.pam_levels()[k % side]);
      CHECK(qam.index_of(x) == k);
      energy += x.re * x.re + x.im * x.im;
    }
    CHECK(energy / order == doctest::Approx(2.0 * (order - 1) / 3));
    CHECK(qam.avg_energy() == doctest::Approx(2.0 * (order - 1) / 3));
  }
  CHECK(make_qam(4).pam_levels() == std::vector<int>{-1, 1});
  CHECK(make_qam(16).pam_levels() == std::vector<int>{-3, -1, 1, 3});
}

TEST_CASE("unsupported orders are rejected") {
  for (int order : {0, 2, 8, 12, 32, -4}) {
    CHECK_FALSE(is_supported_order(order));
    CHECK_THROWS_AS(qam_side(order), UnsupportedError);
  }
  CHECK(qam_side(1024) == 32);
}

TEST_CASE("pam index inverts the level layout") {
  for (int side : {2, 4, 8})
    for (int k = 0; k < side; ++k) CHECK(pam_index(2 * k - side + 1, side) == k);
}

TEST_CASE("difference pair counts and canonical reduction") {
  for (int order : {4, 16, 64}) {
    const int side = qam_side(order);
    const auto full = difference_pairs(order);
    const auto half = difference_pairs(order, PairReduction::canonical);
    const std::size_t expected = std::size_t((2 * side - 1) * (2 * side - 1) - 1);
    CHECK(full.size() == expected);
    CHECK(half.size() * 2 == expected);
    std::set<DifferencePair> canon;
    for (auto pq : full) canon.insert(canonical(pq));
    CHECK(std::set<DifferencePair>(half.begin(), half.end()) == canon);
    for (auto pq : half) {
      CHECK((pq.p > 0 || (pq.p == 0 && pq.q > 0)));
      CHECK(canonical(DifferencePair{-pq.p, -pq.q}) == pq);
    }
  }
}

TEST_CASE("superposition round trip covers the larger constellation exactly") {
  for (int order : {4, 16}) {
    const auto small = make_qam(order);
    const auto large = make_qam(order * order);
    std::set<QamPoint> image;
    for (auto x1 : small.points())
      for (auto x2 : small.points()) {
        const auto xp = compose_superposed(x1, x2, order);
        CHECK(large.contains(xp));
        const auto [y1, y2] = decompose_superposed(xp, order);
        CHECK(y1 == x1);
        CHECK(y2 == x2);
        image.insert(xp);
      }
    CHECK(image == std::set<QamPoint>(large.points().begin(), large.points().end()));
  }
}

TEST_CASE("decompose rejects points outside the larger constellation") {
  // 5 - j has real part beyond the 16-QAM levels.
  CHECK_THROWS_AS(decompose_superposed(QamPoint{5, -1}, 4), std::invalid_argument);
  CHECK_THROWS_AS(decompose_superposed(QamPoint{2, 1}, 4), std::invalid_argument);
  const auto [x1, x2] = decompose_superposed(QamPoint{3, -1}, 4);
  CHECK(x1 == QamPoint{1, -1});
  CHECK(x2 == QamPoint{1, 1});
}
