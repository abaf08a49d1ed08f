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
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mimo_precode/errors.hpp"
#include "mimo_precode/simulator.hpp"
#include "support/fixtures.hpp"

using namespace mimo_precode;
using mimo_precode::testing::profile_for;

namespace {

SimConfig config(int n, int order, PrecoderKind kind, std::vector<double> grid, long trials) {
  SimConfig c;
  c.n_t = c.n_r = n;
  c.order = order;
  c.kind = kind;
  c.snr_grid_db = std::move(grid);
  c.trials_per_point = trials;
  c.seed = 17;
  c.tables.profile = &profile_for(order);
  return c;
}

}  // namespace

TEST_CASE("binomial interval half-widths") {
  constexpr double z = 1.959963984540054;
  CHECK(binomial_halfwidth(100, 10000) == doctest::Approx(z * std::sqrt(0.01 * 0.99 / 1e4)).epsilon(1e-12));
  // Wilson score interval below 30 errors.
  const double n = 1000, p = 5 / n;
  const double wilson = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n);
  CHECK(binomial_halfwidth(5, 1000) == doctest::Approx(wilson).epsilon(1e-12));
  CHECK(binomial_halfwidth(0, 1000) > 0.0);
  CHECK(binomial_halfwidth(0, 0) == 0.0);
}

TEST_CASE("slope estimate on synthetic curves") {
  std::vector<WepPoint> curve;
  for (double db : {10.0, 12.0, 14.0, 16.0}) {
    WepPoint p;
    p.snr_db = db;
    p.trials = 1000000000;
    p.wep = std::pow(10.0, -3.0 * db / 10);
    p.word_errors = long(p.wep * p.trials);
    curve.push_back(p);
  }
  CHECK(estimate_slope(curve) == doctest::Approx(-3.0).epsilon(1e-6));
  curve.back().word_errors = 5;  // dropped by the error floor
  curve.back().wep = 1.0;
  CHECK(estimate_slope(curve) == doctest::Approx(-3.0).epsilon(1e-6));
  std::vector<WepPoint> one(curve.begin(), curve.begin() + 1);
  CHECK_THROWS_AS(estimate_slope(one), std::invalid_argument);
}

TEST_CASE("wep curves do not depend on the worker count") {
  auto c = config(2, 4, PrecoderKind::proposed, {0, 5, 10}, 3000);
  const auto one = run_wep(c);
  c.workers = 3;
  const auto three = run_wep(c);
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].word_errors == three[i].word_errors);
    CHECK(one[i].trials == 3000);
    CHECK(one[i].wep == double(one[i].word_errors) / 3000);
  }
}

TEST_CASE("wep sanity at the ends of the SNR range") {
  for (auto kind : {PrecoderKind::proposed, PrecoderKind::edmin, PrecoderKind::x, PrecoderKind::y,
                    PrecoderKind::lattice}) {
    const auto curve = run_wep(config(2, 4, kind, {-10, 60}, 2000));
    CAPTURE(to_string(kind));
    CHECK(curve[0].wep > 0.5);
    CHECK(curve[1].word_errors == 0);
  }
}

TEST_CASE("proposed beats the lattice rotation on 4x4") {
  const auto proposed = run_wep(config(4, 4, PrecoderKind::proposed, {10}, 3000));
  auto lc = config(4, 4, PrecoderKind::lattice, {10}, 3000);
  const LatticeStore store(MIMO_PRECODE_TEST_LATTICE_DIR);
  const auto l4 = store.load(4);
  lc.tables.lattice = &l4;
  const auto lattice = run_wep(lc);
  CHECK(proposed[0].word_errors < lattice[0].word_errors);
}

TEST_CASE("fixed channel errors stay below the union bound") {
  auto rng = derive_stream(71, 0);
  const auto channel = sample_rayleigh(2, 2, rng);
  const auto dec = decompose(channel);
  PrecoderTables tables;
  tables.profile = &profile_for(4);
  const auto pre = assemble(dec, PrecoderKind::proposed, 4, tables);
  double snr = 1;
  while (union_bound(pre.eta, 4, 2, snr) > 0.3) snr *= 1.25;
  const auto result = run_fixed_channel(channel, PrecoderKind::proposed, 4, snr, 20000, 5, tables);
  const double wep = double(result.word_errors) / result.trials;
  CHECK(wep <= union_bound(pre.eta, 4, 2, snr) + 3 * std::sqrt(wep * (1 - wep) / result.trials));
  const auto again = run_fixed_channel(channel, PrecoderKind::proposed, 4, snr, 20000, 5, tables, 3);
  CHECK(again.word_errors == result.word_errors);
}

TEST_CASE("zeta and no-search statistics") {
  const auto z2 = run_zeta_stats(2, 2, profile_for(4), 2000, 3);
  CHECK(z2.zeta_min == 1.0);
  CHECK(z2.p_zeta == 0.0);
  const auto z4 = run_zeta_stats(4, 4, profile_for(4), 4000, 3, 2);
  CHECK(z4.p_zeta > 0.0);
  CHECK(z4.p_zeta < 1.0);
  CHECK(z4.zeta_min > 0.0);
  CHECK(z4.p_zeta == run_zeta_stats(4, 4, profile_for(4), 4000, 3, 1).p_zeta);

  const auto ns = run_nosearch(4, 4, profile_for(4), 4000, 3);
  REQUIRE(ns.size() == 2);
  CHECK(ns[0].pair_index == 1);
  CHECK(ns[1].pair_index == 2);
  // The outer pair is worse conditioned, so it skips the search more often.
  CHECK(ns[0].probability > ns[1].probability);
  for (const auto& p : ns) {
    CHECK(p.probability >= 0.0);
    CHECK(p.probability <= 1.0);
  }
  const auto ns2 = run_nosearch(2, 2, profile_for(4), 10000, 3);
  CHECK(std::abs(ns2[0].probability - 0.578) < 0.03);
}

TEST_CASE("simulator argument checks") {
  auto c = config(2, 4, PrecoderKind::proposed, {}, 10);
  CHECK_THROWS_AS(run_wep(c), std::invalid_argument);
  c.snr_grid_db = {5, 5};
  CHECK_THROWS_AS(run_wep(c), std::invalid_argument);
  c.snr_grid_db = {5};
  c.trials_per_point = 0;
  CHECK_THROWS_AS(run_wep(c), std::invalid_argument);
  c.trials_per_point = 10;
  c.n_t = c.n_r = 3;
  CHECK_THROWS_AS(run_wep(c), UnsupportedError);
  auto e = config(2, 16, PrecoderKind::edmin, {5}, 10);
  CHECK_THROWS_AS(run_wep(e), UnsupportedError);
  CHECK_THROWS_AS(run_zeta_stats(3, 3, profile_for(4), 10, 1), UnsupportedError);
}
