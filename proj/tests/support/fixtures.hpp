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

// Shared helpers for the unit and acceptance tests: cached profiles, random
// channels and optimizer-independent distance oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "mimo_precode/channel.hpp"
#include "mimo_precode/constellation.hpp"
#include "mimo_precode/decoder.hpp"
#include "mimo_precode/optimizer.hpp"
#include "mimo_precode/rng.hpp"
#include "mimo_precode/system.hpp"

namespace mimo_precode::testing {

inline const PrecoderProfile& profile_for(int order) {
  static std::mutex mutex;
  static std::map<int, PrecoderProfile> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_profile(order)).first;
  return it->second;
}

inline std::vector<double> random_sigmas(int n_r, int n_t, std::uint64_t seed, std::uint64_t index) {
  auto rng = derive_stream(seed, index);
  return singular_values(sample_rayleigh(n_r, n_t, rng).h);
}

// Every nonzero (p, q), without sign reduction.
inline std::vector<std::pair<int, int>> all_differences(int order) {
  const int side = qam_side(order);
  std::vector<std::pair<int, int>> pairs;
  for (int p = -side + 1; p < side; ++p)
    for (int q = -side + 1; q < side; ++q)
      if (p != 0 || q != 0) pairs.emplace_back(p, q);
  return pairs;
}

// (along, across) weights of every difference at theta, reduced to the
// Pareto-minimal ones (a dominated pair never attains the minimum).
inline std::vector<std::pair<double, double>> pareto_weights(
    const std::vector<std::pair<int, int>>& pairs, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  std::vector<std::pair<double, double>> w;
  for (auto [p, q] : pairs) {
    const double a = p * ct - q * st, b = p * st + q * ct;
    w.emplace_back(a * a, b * b);
  }
  std::sort(w.begin(), w.end());
  std::vector<std::pair<double, double>> front;
  double best_across = std::numeric_limits<double>::infinity();
  for (auto [a, b] : w)
    if (b < best_across) {
      front.emplace_back(a, b);
      best_across = b;
    }
  return front;
}

// max over (theta, psi) of min over all nonzero (p, q) of epsilon, with psi
// continuous.
//
// Shares nothing with the optimizer. For fixed theta the minimum is concave in
// u = sin^2 psi, so a ternary search finds the inner maximum. Theta runs over
// a 1e-3 grid and the best local maxima are refined by golden-section search.
inline double brute_force_delta(int order, double gamma) {
  const auto pairs = all_differences(order);
  const double c2 = std::cos(gamma) * std::cos(gamma), s2 = std::sin(gamma) * std::sin(gamma);
  const auto inner = [&](double theta) {
    const auto w = pareto_weights(pairs, theta);
    const auto f = [&](double u) {
      double best = std::numeric_limits<double>::infinity();
      for (auto [a, b] : w) best = std::min(best, c2 * (1 - u) * a + s2 * u * b);
      return best;
    };
    double lo = 0, hi = 1;
    for (int it = 0; it < 120; ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (f(m1) < f(m2)) lo = m1;
      else hi = m2;
    }
    return std::max({f(0.5 * (lo + hi)), f(0.0), f(1.0)});
  };

  constexpr double kStep = 1e-3;
  const double quarter = std::numbers::pi / 4;
  std::vector<double> thetas;
  for (int j = 1; j * kStep < quarter; ++j) thetas.push_back(j * kStep);
  thetas.push_back(quarter);
  std::vector<double> values;
  for (double t : thetas) values.push_back(inner(t));

  std::vector<std::size_t> peaks;
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    const bool left = j == 0 || values[j] >= values[j - 1];
    const bool right = j + 1 == thetas.size() || values[j] >= values[j + 1];
    if (left && right) peaks.push_back(j);
  }
  std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return values[a] > values[b]; });
  if (peaks.size() > 8) peaks.resize(8);

  double best = *std::max_element(values.begin(), values.end());
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (std::size_t j : peaks) {
    double lo = j == 0 ? 1e-9 : thetas[j - 1];
    double hi = j + 1 == thetas.size() ? quarter : thetas[j + 1];
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double fa = inner(a), fb = inner(b);
    while (hi - lo > 1e-12) {
      if (fa < fb) {
        lo = a, a = b, fa = fb;
        b = lo + g * (hi - lo), fb = inner(b);
      } else {
        hi = b, b = a, fb = fa;
        a = hi - g * (hi - lo), fa = inner(a);
      }
    }
    best = std::max({best, fa, fb});
  }
  return best;
}

// The literal grid: psi = k * step on (0, pi/2], theta = j * step on (0, pi/4],
// min over all nonzero (p, q); returns the best grid value for each gamma.
inline std::vector<double> literal_grid_delta(int order, const std::vector<double>& gammas,
                                              double step = 0.001) {
  const auto pairs = all_differences(order);
  const int psi_count = int(std::floor(std::numbers::pi / 2 / step));
  const int theta_count = int(std::floor(std::numbers::pi / 4 / step));
  std::vector<double> cos2(psi_count), sin2(psi_count);
  for (int k = 1; k <= psi_count; ++k) {
    cos2[k - 1] = std::cos(k * step) * std::cos(k * step);
    sin2[k - 1] = std::sin(k * step) * std::sin(k * step);
  }
  std::vector<double> best(gammas.size(), 0.0);
  for (int j = 1; j <= theta_count; ++j) {
    const auto w = pareto_weights(pairs, j * step);
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      const double c2 = std::cos(gammas[gi]) * std::cos(gammas[gi]);
      const double s2 = std::sin(gammas[gi]) * std::sin(gammas[gi]);
      for (int k = 0; k < psi_count; ++k) {
        double m = std::numeric_limits<double>::infinity();
        for (auto [a, b] : w) m = std::min(m, c2 * cos2[k] * a + s2 * sin2[k] * b);
        best[gi] = std::max(best[gi], m);
      }
    }
  }
  return best;
}

// One random transmission through y = sqrt(snr / n_t) H V P diag(scales) x + n.
struct Instance {
  ChannelDecomposition decomposition;
  AssembledPrecoder precoder;
  std::vector<int> symbols;
  Eigen::VectorXcd y_rot;
  Eigen::MatrixXcd g;
};

inline Instance draw_instance(int n_t, int n_r, int order, PrecoderKind kind, double snr_db,
                              const PrecoderTables& tables, std::uint64_t seed, std::uint64_t index,
                              bool noiseless = false) {
  auto rng = derive_stream(seed, index);
  const auto channel = sample_rayleigh(n_r, n_t, rng);
  Instance inst;
  inst.decomposition = decompose(channel);
  const int n_min = inst.decomposition.n_min();
  inst.symbols.resize(n_min);
  for (auto& s : inst.symbols) s = rng.uniform_int(order);
  Eigen::VectorXcd noise(n_r);
  for (int i = 0; i < n_r; ++i) noise[i] = noiseless ? 0.0 : rng.complex_normal(0.5);
  inst.precoder = assemble(inst.decomposition, kind, order, tables);
  const double snr = std::pow(10.0, snr_db / 10);
  const Eigen::VectorXcd s = inst.decomposition.v * (inst.precoder.p * inst.precoder.symbol_scales.asDiagonal() *
                                                     modulate(inst.precoder, inst.symbols));
  const Eigen::VectorXcd y = std::sqrt(snr / n_t) * (channel.h * s) + noise;
  inst.y_rot = receive(y, inst.decomposition, snr).y_rot;
  inst.g = effective_matrix(inst.precoder, inst.decomposition.sigmas, snr);
  return inst;
}

// Fast and exhaustive decoding agree when their metrics match; the decisions
// may then differ only on an exact metric tie.
struct Agreement {
  bool same = false;
  double fast_metric = 0.0;
  double oracle_metric = 0.0;
  bool ok(double tolerance = 1e-9) const {
    return std::abs(fast_metric - oracle_metric) <= tolerance * std::max(1.0, oracle_metric);
  }
};

inline Agreement compare_decoders(const Instance& inst) {
  const auto fast = decode_word(inst.y_rot, inst.g, inst.precoder);
  const auto oracle = decode_oracle(inst.y_rot, inst.g, inst.precoder);
  return {fast.symbols == oracle.symbols, fast.metric, oracle.metric};
}

}  // namespace mimo_precode::testing
