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

#include "mimo_precode/baselines.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mimo_precode/constellation.hpp"
#include "mimo_precode/errors.hpp"
#include "mimo_precode/optimizer.hpp"

#ifndef MIMO_PRECODE_DEFAULT_LATTICE_DIR
#define MIMO_PRECODE_DEFAULT_LATTICE_DIR "data/lattice"
#endif

namespace mimo_precode {

namespace {

using std::numbers::pi;
using cd = std::complex<double>;

constexpr double kQuarterPi = pi / 4;

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= kQuarterPi + 1e-12))
    throw std::invalid_argument("gamma must lie in (0, pi/4]");
}

}  // namespace

std::string to_string(PrecoderKind kind) {
  switch (kind) {
    case PrecoderKind::proposed: return "proposed";
    case PrecoderKind::edmin: return "edmin";
    case PrecoderKind::x: return "x";
    case PrecoderKind::y: return "y";
    case PrecoderKind::lattice: return "lattice";
  }
  return "unknown";
}

PrecoderKind parse_precoder_kind(std::string_view name) {
  for (auto kind : {PrecoderKind::proposed, PrecoderKind::edmin, PrecoderKind::x, PrecoderKind::y,
                    PrecoderKind::lattice})
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown precoder kind: " + std::string(name));
}

// ---- E-dmin -------------------------------------------------------------

double edmin_gamma0() {
  const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0), s2 = std::sqrt(2.0);
  return std::atan(std::sqrt((3 * s3 - 2 * s6 + 2 * s2 - 3) / (3 * s3 - 2 * s6 + 1)));
}

double edmin_psi(double gamma) { return std::atan((std::sqrt(2.0) - 1) / std::tan(gamma)); }

double edmin_delta_reference(double gamma) {
  require_gamma(gamma);
  const double c2 = std::pow(std::cos(gamma), 2);
  if (gamma < edmin_gamma0()) return (1 - 1 / std::sqrt(3.0)) * c2;
  const double s2 = std::pow(std::sin(gamma), 2);
  return (4 - 2 * std::sqrt(2.0)) * c2 * s2 / (1 + (2 - 2 * std::sqrt(2.0)) * c2);
}

double edmin_delta(double gamma) { return edmin_delta_reference(gamma) / 2; }

PairMatrix edmin_pair(std::span<const double> gammas, std::span<const double> rhos, int i, int n_t,
                      int n_min, int order) {
  if (order != 4) throw UnsupportedError("the E-dmin precoder exists only for 4-QAM");
  if (gammas.size() != rhos.size() || i < 0 || i >= int(gammas.size()))
    throw std::invalid_argument("edmin_pair: inconsistent pair lists");
  double sum = 0.0;
  for (std::size_t j = 0; j < gammas.size(); ++j)
    sum += 1.0 / (rhos[j] * rhos[j] * edmin_delta_reference(gammas[j]));
  const double gamma = gammas[i];
  const double tau2 = (n_min / 2.0) / (rhos[i] * rhos[i] * edmin_delta_reference(gamma) * sum);

  PairMatrix block;
  block.kind = PrecoderKind::edmin;
  block.tau = std::sqrt(tau2);
  if (gamma < edmin_gamma0()) {
    const double scale = std::sqrt(2.0 * n_t * tau2 / n_min);
    const double s3 = std::sqrt(3.0);
    block.entries << scale * std::sqrt((3 + s3) / 6),
        scale * std::sqrt((3 - s3) / 6) * std::polar(1.0, pi / 12), 0.0, 0.0;
  } else {
    const double scale = std::sqrt(n_t * tau2 / n_min);
    const double psi = edmin_psi(gamma);
    const cd w = std::polar(1.0, pi / 4);
    block.entries << scale * std::cos(psi), scale * std::cos(psi) * w, -scale * std::sin(psi),
        scale * std::sin(psi) * w;
  }
  return block;
}

// ---- X-precoder ---------------------------------------------------------

double x_theta_closed_form(double gamma) {
  require_gamma(gamma);
  const double t2 = std::pow(std::tan(gamma), 2);
  const double radicand = 1 + t2 * t2 - 3 * t2;
  if (radicand < 0) return kQuarterPi;
  return std::min(kQuarterPi, std::atan((1 - t2 - std::sqrt(radicand)) / t2));
}

double XLookup::theta_at(double gamma) const {
  if (thetas.empty()) throw std::invalid_argument("empty X lookup");
  const long k = std::lround(gamma / gamma_step);
  return thetas[std::size_t(std::clamp<long>(k, 1, long(thetas.size())) - 1)];
}

namespace {

// max over theta in (0, pi/4] of min-epsilon at psi = pi/4: a grid pass with
// the same step, then zooming around the three best local peaks.
double x_best_theta(int order, double gamma, double step) {
  const auto value = [&](double t) { return min_epsilon(order, t, kQuarterPi, gamma); };
  std::vector<double> grid;
  const int count = int(std::floor(kQuarterPi / step));
  for (int j = 1; j <= count; ++j) grid.push_back(j * step);
  if (kQuarterPi - grid.back() > 1e-12) grid.push_back(kQuarterPi);
  std::vector<double> values(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) values[j] = value(grid[j]);

  std::vector<std::size_t> peaks;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const bool left = j == 0 || values[j] >= values[j - 1];
    const bool right = j + 1 == grid.size() || values[j] >= values[j + 1];
    if (left && right) peaks.push_back(j);
  }
  std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return values[a] > values[b]; });
  if (peaks.size() > 3) peaks.resize(3);

  double best_theta = grid[peaks.front()], best_value = values[peaks.front()];
  for (auto j : peaks) {
    double lo = j == 0 ? 1e-9 : grid[j - 1];
    double hi = j + 1 == grid.size() ? kQuarterPi : grid[j + 1];
    double center = grid[j], center_value = values[j];
    while (hi - lo > 1e-13) {
      constexpr int kIntervals = 20;
      for (int m = 0; m <= kIntervals; ++m) {
        const double t = lo + (hi - lo) * m / kIntervals;
        const double v = value(t);
        if (v > center_value) center = t, center_value = v;
      }
      const double half = (hi - lo) / kIntervals;
      lo = std::max(lo, center - half);
      hi = std::min(hi, center + half);
    }
    if (center_value > best_value * (1 + 1e-12)) best_theta = center, best_value = center_value;
  }
  return best_theta;
}

}  // namespace

XLookup build_x_lookup(int order, double gamma_step, int workers) {
  qam_side(order);
  if (!(gamma_step > 0 && gamma_step < kQuarterPi))
    throw std::invalid_argument("gamma_step must lie in (0, pi/4)");
  XLookup lookup;
  lookup.order = order;
  lookup.gamma_step = gamma_step;
  lookup.thetas.resize(std::size_t(std::floor(kQuarterPi / gamma_step)));
  const int n = int(lookup.thetas.size());
  const int w = std::max(1, std::min(workers, n));
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&, t] {
      for (int k = t; k < n; k += w)
        lookup.thetas[k] = x_best_theta(order, (k + 1) * gamma_step, gamma_step);
    });
  for (auto& th : pool) th.join();
  return lookup;
}

std::string x_lookup_to_json(const XLookup& lookup) {
  nlohmann::json doc{{"order", lookup.order}, {"gamma_step", lookup.gamma_step},
                     {"thetas", lookup.thetas}};
  return doc.dump(2) + "\n";
}

XLookup x_lookup_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    XLookup lookup;
    lookup.order = doc.at("order").get<int>();
    lookup.gamma_step = doc.at("gamma_step").get<double>();
    lookup.thetas = doc.at("thetas").get<std::vector<double>>();
    if (lookup.thetas.empty() || !(lookup.gamma_step > 0))
      throw std::invalid_argument("empty X lookup");
    return lookup;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed X lookup JSON: ") + e.what());
  }
}

double x_theta(double gamma, int order, const XLookup* lookup) {
  require_gamma(gamma);
  if (lookup != nullptr && lookup->order == order) return lookup->theta_at(gamma);
  if (order == 4) return x_theta_closed_form(gamma);
  throw UnsupportedError("X-precoder for order " + std::to_string(order) + " needs a lookup table");
}

PairMatrix x_pair(double gamma, int order, int n_t, int n_min, const XLookup* lookup) {
  const double theta = x_theta(gamma, order, lookup);
  const double scale = std::sqrt(double(n_t) / n_min);
  PairMatrix block;
  block.kind = PrecoderKind::x;
  block.tau = 1.0;
  block.entries << scale * std::cos(theta), -scale * std::sin(theta), scale * std::sin(theta),
      scale * std::cos(theta);
  return block;
}

// ---- Y-precoder ---------------------------------------------------------

std::vector<std::array<int, 2>> y_codebook(int order) {
  qam_side(order);
  std::vector<std::array<int, 2>> points;
  for (int l = 1; l <= order; ++l) points.push_back({2 * l - order - 1, l % 2 == 0 ? 1 : -1});
  return points;
}

YEffective y_effective(double sigma_i, double sigma_partner, int order, int n_t, int n_r) {
  if (!(sigma_partner > 0 && sigma_i >= sigma_partner))
    throw std::invalid_argument("y_effective needs sigma_i >= sigma_partner > 0");
  YEffective eff;
  eff.codebook = y_codebook(order);
  const double m2 = double(order) * order - 1;
  const double beta = sigma_i / sigma_partner;
  const double ratio = double(n_t) / n_r;
  if (beta * beta >= m2 / 3) {
    eff.a = std::sqrt(3 * ratio / m2);
    eff.b = 0.0;
  } else {
    const double m_prime = m2 / 9;
    eff.a = std::sqrt(ratio / (3 * (beta * beta + m_prime)));
    eff.b = beta * std::sqrt(ratio / (beta * beta + m_prime));
  }
  return eff;
}

// ---- Lattice precoder ---------------------------------------------------

LatticeGenerator lattice_generator_2d() {
  const double a = 0.5 * std::atan(2.0);
  LatticeGenerator gen;
  gen.dim = 2;
  gen.g.resize(2, 2);
  gen.g << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  gen.source = "rotation by 0.5 * arctan(2) (built in)";
  return gen;
}

double min_product_distance(const LatticeGenerator& generator) {
  const int dim = generator.dim;
  long total = 1;
  for (int k = 0; k < dim; ++k) total *= 3;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd d(dim);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int k = 0; k < dim; ++k, c /= 3) d[k] = 2.0 * double(c % 3 - 1);
    if (d.isZero()) continue;
    const Eigen::VectorXd v = generator.g * d;
    best = std::min(best, std::abs(v.prod()));
  }
  return best;
}

void validate_lattice(const LatticeGenerator& generator) {
  if (generator.dim < 1 || generator.g.rows() != generator.dim || generator.g.cols() != generator.dim)
    throw DataError("lattice generator has the wrong shape");
  if (!generator.g.allFinite()) throw DataError("lattice generator has non-finite entries");
  const auto identity = Eigen::MatrixXd::Identity(generator.dim, generator.dim);
  if ((generator.g.transpose() * generator.g - identity).norm() > 1e-10)
    throw DataError("lattice generator is not orthogonal");
  if (!(min_product_distance(generator) > 1e-12))
    throw DataError("lattice generator has a vanishing product distance");
}

LatticeGenerator parse_lattice_generator(const std::string& json_text) {
  LatticeGenerator gen;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    gen.dim = doc.at("dim").get<int>();
    const auto rows = doc.at("rows").get<std::vector<std::vector<double>>>();
    if (gen.dim < 1 || int(rows.size()) != gen.dim) throw DataError("lattice rows do not match dim");
    gen.g.resize(gen.dim, gen.dim);
    for (int r = 0; r < gen.dim; ++r) {
      if (int(rows[r].size()) != gen.dim) throw DataError("lattice row has the wrong length");
      for (int c = 0; c < gen.dim; ++c) gen.g(r, c) = rows[r][c];
    }
    gen.source = doc.at("source").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed lattice generator JSON: ") + e.what());
  }
  validate_lattice(gen);
  return gen;
}

LatticeStore::LatticeStore(std::filesystem::path directory) : directory_(std::move(directory)) {}

LatticeStore LatticeStore::from_environment() {
  if (const char* env = std::getenv("MIMO_PRECODE_DATA"); env != nullptr && *env != '\0')
    return LatticeStore(env);
  return LatticeStore(MIMO_PRECODE_DEFAULT_LATTICE_DIR);
}

LatticeGenerator LatticeStore::load(int dim) const {
  const auto path = directory_ / ("rotation_" + std::to_string(dim) + ".json");
  std::ifstream in(path);
  if (!in) throw DataError("no lattice generator file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto gen = parse_lattice_generator(buffer.str());
  if (gen.dim != dim) throw DataError("lattice file " + path.string() + " has the wrong dim");
  return gen;
}

LatticeGenerator lattice_precoder(int n_min, const LatticeStore& store) {
  if (n_min == 2) return lattice_generator_2d();
  return store.load(n_min);
}

}  // namespace mimo_precode
