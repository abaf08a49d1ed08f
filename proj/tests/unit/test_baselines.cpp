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
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

#include "doctest.h"
#include "mimo_precode/baselines.hpp"
#include "mimo_precode/errors.hpp"
#include "mimo_precode/optimizer.hpp"
#include "mimo_precode/system.hpp"

using namespace mimo_precode;
namespace fs = std::filesystem;

namespace {

constexpr double kQuarter = std::numbers::pi / 4;

fs::path scratch_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / ("mimo_precode_baselines_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("precoder kind names round trip") {
  for (auto kind : {PrecoderKind::proposed, PrecoderKind::edmin, PrecoderKind::x, PrecoderKind::y,
                    PrecoderKind::lattice})
    CHECK(parse_precoder_kind(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_precoder_kind("z"), std::invalid_argument);
}

TEST_CASE("E-dmin threshold and angle") {
  CHECK(edmin_gamma0() == doctest::Approx(0.3016).epsilon(5e-4));
  CHECK(edmin_psi(kQuarter) == doctest::Approx(std::numbers::pi / 8).epsilon(1e-12));
  // tan^2(g) tan^2(psi) = (sqrt 2 - 1)^2 on the whole branch.
  for (double g : {0.31, 0.45, 0.6}) {
    const double t = std::tan(g) * std::tan(edmin_psi(g));
    CHECK(t == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-12));
  }
}

TEST_CASE("E-dmin rank-one block below the threshold") {
  const std::vector<double> gammas{0.2}, rhos{1.7};
  const auto block = edmin_pair(gammas, rhos, 0, 2, 2);
  CHECK(block.tau == doctest::Approx(1.0));
  CHECK(std::abs(block.entries(1, 0)) == 0.0);
  CHECK(std::abs(block.entries(1, 1)) == 0.0);
  const std::complex<double> ratio = block.entries(0, 1) / block.entries(0, 0);
  const double s3 = std::sqrt(3.0);
  const std::complex<double> expected =
      std::sqrt((3 - s3) / 6) / std::sqrt((3 + s3) / 6) * std::polar(1.0, std::numbers::pi / 12);
  CHECK(std::abs(ratio - expected) < 1e-12);
  CHECK(block.entries.squaredNorm() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("E-dmin distance matches exhaustive evaluation of its blocks") {
  // The two branches meet at the threshold.
  const double g0 = edmin_gamma0();
  CHECK(edmin_delta(g0 * (1 - 1e-12)) == doctest::Approx(edmin_delta(g0)).epsilon(1e-9));
  for (double g : {0.05, 0.2, 0.3, 0.31, 0.45, 0.6, kQuarter}) {
    const std::vector<double> gammas{g}, rhos{1.0};
    const auto block = edmin_pair(gammas, rhos, 0, 2, 2);
    CAPTURE(g);
    CHECK(block_delta(block.entries, g, 4) == doctest::Approx(edmin_delta(g)).epsilon(1e-9));
    CHECK(edmin_delta_reference(g) == doctest::Approx(2 * edmin_delta(g)));
  }
}

TEST_CASE("E-dmin power bookkeeping over pairs") {
  const std::vector<double> gammas{0.1, 0.5}, rhos{3.0, 1.2};
  double total = 0;
  std::vector<double> products;
  for (int i = 0; i < 2; ++i) {
    const auto block = edmin_pair(gammas, rhos, i, 4, 4);
    CHECK(block.entries.squaredNorm() == doctest::Approx(2.0 * 4 * block.tau * block.tau / 4).epsilon(1e-10));
    total += block.tau * block.tau;
    products.push_back(block.tau * block.tau * rhos[i] * rhos[i] * edmin_delta(gammas[i]));
  }
  CHECK(2 * total == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(products[0] == doctest::Approx(products[1]).epsilon(1e-12));
  CHECK_THROWS_AS(edmin_pair(gammas, rhos, 0, 4, 4, 16), UnsupportedError);
}

TEST_CASE("X angle closed form with the clamp") {
  CHECK(x_theta_closed_form(kQuarter) == doctest::Approx(kQuarter));
  CHECK(x_theta_closed_form(std::numbers::pi / 6) == doctest::Approx(kQuarter).epsilon(1e-9));
  for (int k = 1; k <= 200; ++k) {
    const double t = x_theta_closed_form(kQuarter * k / 200);
    CHECK(t > 0);
    CHECK(t <= kQuarter);
  }
  CHECK_THROWS_AS(x_theta(0.3, 16, nullptr), UnsupportedError);
  const auto block = x_pair(0.3, 4, 4, 4, nullptr);
  CHECK(block.entries.squaredNorm() == doctest::Approx(2.0));
  CHECK(std::abs(block.entries(0, 0) - block.entries(1, 1)) < 1e-15);
  CHECK(std::abs(block.entries(0, 1) + block.entries(1, 0)) < 1e-15);
}

TEST_CASE("X lookup for 4-QAM agrees with the closed form") {
  const double step = 0.001;
  const auto lookup = build_x_lookup(4, step);
  CHECK(lookup.thetas.size() == std::size_t(std::floor(kQuarter / step)));
  const double root = std::atan(std::sqrt((3 - std::sqrt(5.0)) / 2));
  for (std::size_t k = 0; k < lookup.thetas.size(); ++k) {
    const double g = (k + 1) * step;
    CHECK(lookup.thetas[k] > 0);
    CHECK(lookup.thetas[k] <= kQuarter);
    if (g <= root) CHECK(std::abs(lookup.thetas[k] - x_theta_closed_form(g)) <= step);
    CHECK(lookup.theta_at(g) == lookup.thetas[k]);
  }
  const auto back = x_lookup_from_json(x_lookup_to_json(lookup));
  CHECK(back.thetas == lookup.thetas);
  CHECK(back.order == 4);
  CHECK_THROWS_AS(x_lookup_from_json("{\"order\": 4}"), std::invalid_argument);
}

TEST_CASE("X lookup for 16-QAM is a per-gamma optimum") {
  const auto lookup = build_x_lookup(16, 0.01);
  const double g = 0.5;
  const double theta = x_theta(g, 16, &lookup);
  const double found = min_epsilon(16, theta, kQuarter, g);
  double scan = 0;
  for (int j = 1; j <= 78540; ++j) scan = std::max(scan, min_epsilon(16, j * 1e-5, kQuarter, g));
  CHECK(found >= scan * (1 - 1e-6));
}

TEST_CASE("Y codebook and effective gains") {
  const auto z = y_codebook(4);
  REQUIRE(z.size() == 4);
  CHECK(z[0] == std::array<int, 2>{-3, -1});
  CHECK(z[3] == std::array<int, 2>{3, 1});
  for (int order : {4, 16}) {
    const auto book = y_codebook(order);
    CHECK(std::set<std::array<int, 2>>(book.begin(), book.end()).size() == std::size_t(order));
  }
  // Large beta: all power on the strong coordinate.
  const auto strong = y_effective(10.0, 1.0, 4, 2, 2);
  CHECK(strong.a == doctest::Approx(std::sqrt(3.0 * 2 / (2 * 15))));
  CHECK(strong.b == 0.0);
  // Below the threshold: the reference gains, and continuity at the switch.
  const double m2 = 15, beta = 1.5, mp = m2 / 9;
  const auto weak = y_effective(beta, 1.0, 4, 2, 2);
  CHECK(weak.a == doctest::Approx(std::sqrt(1 / (3 * (beta * beta + mp)))).epsilon(1e-12));
  CHECK(weak.b == doctest::Approx(beta * std::sqrt(1 / (beta * beta + mp))).epsilon(1e-12));
  // Pair power a^2 E1 + b^2 E2 = 2 n_t / n_r on both branches.
  for (int order : {4, 16})
    for (double b : {1.0, 1.5, 3.0, 9.0, 30.0})
      for (auto [n_t, n_r] : {std::pair{2, 2}, std::pair{4, 2}}) {
        const auto eff = y_effective(b, 1.0, order, n_t, n_r);
        const double e1 = 2.0 * (double(order) * order - 1) / 3, e2 = 2.0;
        CHECK(eff.a * eff.a * e1 + eff.b * eff.b * e2 ==
              doctest::Approx(2.0 * n_t / n_r).epsilon(1e-12));
      }
  CHECK_THROWS_AS(y_effective(1.0, 2.0, 4, 2, 2), std::invalid_argument);
}

TEST_CASE("two-dimensional lattice rotation") {
  const auto gen = lattice_generator_2d();
  const double a = 0.5 * std::atan(2.0);
  CHECK(a == doctest::Approx(0.5536).epsilon(1e-4));
  CHECK(gen.g(0, 0) == doctest::Approx(std::cos(a)));
  CHECK(gen.g(0, 1) == doctest::Approx(-std::sin(a)));
  CHECK(gen.g(1, 0) == doctest::Approx(std::sin(a)));
  CHECK(min_product_distance(gen) > 0.1);
  CHECK_NOTHROW(validate_lattice(gen));
}

TEST_CASE("bundled lattice generators load and validate") {
  const LatticeStore store(MIMO_PRECODE_TEST_LATTICE_DIR);
  const auto g4 = store.load(4);
  const auto g8 = store.load(8);
  CHECK(g4.dim == 4);
  CHECK(g8.dim == 8);
  CHECK(!g4.source.empty());
  CHECK((g8.g.transpose() * g8.g - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-10);
  CHECK(min_product_distance(g4) == doctest::Approx(0.47702783519995184).epsilon(1e-9));
  CHECK(min_product_distance(g8) > 1e-3);
  CHECK(lattice_precoder(2, store).dim == 2);
  CHECK(lattice_precoder(4, store).g == g4.g);
}

TEST_CASE("lattice data errors") {
  const auto dir = scratch_dir("errors");
  const LatticeStore store(dir);
  CHECK_THROWS_AS(store.load(4), DataError);
  write(dir / "rotation_4.json", "{\"dim\": 4, \"rows\": [[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], \"source\": \"t\"}");
  CHECK_THROWS_AS(store.load(4), DataError);
  // Orthogonal but with a vanishing product (identity).
  write(dir / "rotation_4.json", "{\"dim\": 4, \"rows\": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], \"source\": \"t\"}");
  CHECK_THROWS_AS(store.load(4), DataError);
  write(dir / "rotation_4.json", "{\"dim\": 4");
  CHECK_THROWS_AS(store.load(4), DataError);
  write(dir / "rotation_4.json", "{\"dim\": 2, \"rows\": [[1,0],[0,1]], \"source\": \"t\"}");
  CHECK_THROWS_AS(store.load(4), DataError);
  fs::remove_all(dir);
}

TEST_CASE("environment override selects the lattice directory") {
  const auto dir = scratch_dir("env");
  fs::copy_file(fs::path(MIMO_PRECODE_TEST_LATTICE_DIR) / "rotation_4.json", dir / "rotation_4.json");
  ::setenv("MIMO_PRECODE_DATA", dir.c_str(), 1);
  const auto store = LatticeStore::from_environment();
  CHECK(store.directory() == dir);
  CHECK(store.load(4).dim == 4);
  CHECK_THROWS_AS(store.load(8), DataError);
  ::unsetenv("MIMO_PRECODE_DATA");
  CHECK(LatticeStore::from_environment().directory() == fs::path(MIMO_PRECODE_TEST_LATTICE_DIR));
  fs::remove_all(dir);
}
