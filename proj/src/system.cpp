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

#include "mimo_precode/system.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mimo_precode/constellation.hpp"
#include "mimo_precode/errors.hpp"

namespace mimo_precode {

namespace {

using std::numbers::pi;
using cd = std::complex<double>;

const double kLatticeAngle = 0.5 * std::atan(2.0);

// Y-precoder distance for one pair, normalized like the other kinds.
double y_delta(double sigma_strong, double sigma_weak, int order) {
  const auto eff = y_effective(sigma_strong, sigma_weak, order, 2, 2);
  const double gamma = std::atan2(sigma_weak, sigma_strong);
  const double c2 = std::pow(std::cos(gamma), 2), s2 = std::pow(std::sin(gamma), 2);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eff.codebook.size(); ++i)
    for (std::size_t j = i + 1; j < eff.codebook.size(); ++j) {
      const double d1 = eff.codebook[i][0] - eff.codebook[j][0];
      const double d2 = eff.codebook[i][1] - eff.codebook[j][1];
      best = std::min(best, c2 * eff.a * eff.a * d1 * d1 + s2 * eff.b * eff.b * d2 * d2);
    }
  return make_qam(order).avg_energy() / 8 * best;
}

void place(Eigen::MatrixXcd& p, const PairMeta& meta, const Eigen::Matrix2cd& block) {
  p(meta.strong, meta.strong) = block(0, 0);
  p(meta.strong, meta.weak) = block(0, 1);
  p(meta.weak, meta.strong) = block(1, 0);
  p(meta.weak, meta.weak) = block(1, 1);
}

}  // namespace

PowerControl power_control(std::span<const double> deltas, std::span<const double> rhos) {
  if (deltas.size() != rhos.size() || deltas.empty())
    throw std::invalid_argument("power_control: need one delta and one rho per pair");
  double sum = 0.0;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    const double w = rhos[j] * rhos[j] * deltas[j];
    if (!(w > 0) || !std::isfinite(w))
      throw DegenerateChannel("power_control: a pair has zero distance");
    sum += 1.0 / w;
  }
  const double half = deltas.size();  // n_min / 2
  PowerControl out;
  for (std::size_t i = 0; i < deltas.size(); ++i)
    out.taus.push_back(std::sqrt(half / (rhos[i] * rhos[i] * deltas[i] * sum)));
  out.eta = std::sqrt(half / sum);
  return out;
}

AssembledPrecoder assemble(std::span<const double> sigmas, int n_t, PrecoderKind kind, int order,
                           const PrecoderTables& tables) {
  const int n_min = int(sigmas.size());
  qam_side(order);
  if (n_t < n_min) throw std::invalid_argument("assemble: n_t smaller than n_min");
  const auto pairs = subchannel_pairs(sigmas);
  const double floor = 1e-12 * sigmas.front();
  for (double s : sigmas)
    if (!(s > floor)) throw DegenerateChannel("assemble: a singular value vanished");

  const double energy = make_qam(order).avg_energy();
  AssembledPrecoder out;
  out.kind = kind;
  out.order = order;
  out.n_t = n_t;
  out.n_min = n_min;
  out.p = Eigen::MatrixXcd::Zero(n_t, n_min);
  out.symbol_scales = Eigen::VectorXd::Constant(n_min, 1.0 / std::sqrt(energy));
  for (const auto& pair : pairs) {
    PairMeta meta;
    meta.index = pair.index;
    meta.strong = pair.strong;
    meta.weak = pair.weak;
    meta.gamma = pair.gamma;
    meta.rho = pair.rho;
    out.pairs.push_back(meta);
  }

  std::vector<double> rhos, gammas;
  for (const auto& meta : out.pairs) rhos.push_back(meta.rho), gammas.push_back(meta.gamma);

  const auto finish_unequalized = [&] {
    out.taus.assign(out.pairs.size(), 1.0);
    out.eta = std::numeric_limits<double>::infinity();
    for (const auto& meta : out.pairs) out.eta = std::min(out.eta, meta.rho * std::sqrt(meta.delta));
  };

  switch (kind) {
    case PrecoderKind::proposed: {
      if (tables.profile == nullptr) throw std::invalid_argument("proposed precoder needs a profile");
      if (tables.profile->order != order)
        throw std::invalid_argument("profile order does not match the constellation");
      std::vector<double> deltas;
      for (auto& meta : out.pairs) {
        const auto point = eval_profile(*tables.profile, meta.gamma);
        meta.theta = point.theta_star;
        meta.psi = point.psi_star;
        meta.delta = point.delta;
        meta.segment = point.segment;
        deltas.push_back(point.delta);
      }
      const auto power = power_control(deltas, rhos);
      out.taus = power.taus;
      out.eta = power.eta;
      for (std::size_t i = 0; i < out.pairs.size(); ++i) {
        const auto& meta = out.pairs[i];
        const double scale = std::sqrt(2.0 * n_t * out.taus[i] * out.taus[i] / n_min);
        const double cp = std::cos(meta.psi), sp = std::sin(meta.psi);
        const double ct = std::cos(meta.theta), st = std::sin(meta.theta);
        Eigen::Matrix2cd block;
        block << scale * cp * ct, -scale * cp * st, scale * sp * st, scale * sp * ct;
        place(out.p, meta, block);
      }
      break;
    }
    case PrecoderKind::edmin: {
      std::vector<double> deltas;
      for (auto& meta : out.pairs) {
        const auto block = edmin_pair(gammas, rhos, meta.index, n_t, n_min, order);
        meta.delta = edmin_delta(meta.gamma);
        meta.psi = meta.gamma < edmin_gamma0() ? 0.0 : edmin_psi(meta.gamma);
        deltas.push_back(meta.delta);
        out.taus.push_back(block.tau);
        place(out.p, meta, block.entries);
      }
      out.eta = power_control(deltas, rhos).eta;
      break;
    }
    case PrecoderKind::x: {
      for (auto& meta : out.pairs) {
        const auto block = x_pair(meta.gamma, order, n_t, n_min, tables.x_lookup);
        meta.theta = x_theta(meta.gamma, order, tables.x_lookup);
        meta.psi = pi / 4;
        meta.delta = min_epsilon(order, meta.theta, pi / 4, meta.gamma);
        place(out.p, meta, block.entries);
      }
      finish_unequalized();
      break;
    }
    case PrecoderKind::y: {
      const double e1 = 2.0 * (double(order) * order - 1) / 3, e2 = 2.0;
      for (auto& meta : out.pairs) {
        // The power normalization uses n_min receive dimensions so |P|^2 = n_t.
        const auto eff = y_effective(sigmas[meta.strong], sigmas[meta.weak], order, n_t, n_min);
        out.p(meta.strong, meta.strong) = eff.a * std::sqrt(e1);
        out.p(meta.weak, meta.weak) = eff.b * std::sqrt(e2);
        out.symbol_scales[meta.strong] = 1 / std::sqrt(e1);
        out.symbol_scales[meta.weak] = 1 / std::sqrt(e2);
        meta.delta = y_delta(sigmas[meta.strong], sigmas[meta.weak], order);
      }
      finish_unequalized();
      break;
    }
    case PrecoderKind::lattice: {
      LatticeGenerator generator;
      if (n_min == 2) {
        generator = lattice_generator_2d();
      } else {
        generator = tables.lattice != nullptr
                        ? *tables.lattice
                        : lattice_precoder(n_min, LatticeStore::from_environment());
        if (generator.dim != n_min)
          throw std::invalid_argument("lattice generator dim does not match n_min");
      }
      out.lattice = generator.g;
      out.p.topRows(n_min) = std::sqrt(double(n_t) / n_min) * generator.g.cast<cd>();
      if (n_min == 2) {
        auto& meta = out.pairs.front();
        meta.theta = kLatticeAngle;
        meta.psi = pi / 4;
        meta.delta = min_epsilon(order, kLatticeAngle, pi / 4, meta.gamma);
        finish_unequalized();
      } else {
        out.taus.assign(out.pairs.size(), 1.0);
        out.eta = 0.0;
      }
      break;
    }
  }
  return out;
}

AssembledPrecoder assemble(const ChannelDecomposition& decomposition, PrecoderKind kind, int order,
                           const PrecoderTables& tables) {
  return assemble(decomposition.sigmas, decomposition.n_t(), kind, order, tables);
}

Eigen::MatrixXcd effective_matrix(const AssembledPrecoder& precoder, std::span<const double> sigmas,
                                  double snr_linear) {
  const int n = precoder.n_min;
  if (int(sigmas.size()) != n) throw std::invalid_argument("effective_matrix: sigma count mismatch");
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = sigmas[i];
  const double c = std::sqrt(snr_linear / precoder.n_t);
  return c * d.asDiagonal() * precoder.p.topRows(n) * precoder.symbol_scales.asDiagonal();
}

Eigen::VectorXcd modulate(const AssembledPrecoder& precoder, std::span<const int> symbols) {
  const int n = precoder.n_min;
  if (int(symbols.size()) != n) throw std::invalid_argument("modulate: symbol count mismatch");
  for (int s : symbols)
    if (s < 0 || s >= precoder.order) throw std::invalid_argument("modulate: symbol out of range");
  Eigen::VectorXcd x(n);
  if (precoder.kind == PrecoderKind::y) {
    const auto book = y_codebook(precoder.order);
    for (const auto& meta : precoder.pairs) {
      const auto& vi = book[symbols[meta.strong]];
      const auto& vp = book[symbols[meta.weak]];
      x[meta.strong] = cd(vi[0], vp[0]);
      x[meta.weak] = cd(vi[1], vp[1]);
    }
    return x;
  }
  const QamConstellation qam(precoder.order);
  for (int i = 0; i < n; ++i) x[i] = qam.point(symbols[i]).value();
  return x;
}

double gaussian_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double union_bound(double eta, int order, int n_min, double snr_linear, DeltaScale scale) {
  const double energy = make_qam(order).avg_energy();
  const double eta2 = (scale == DeltaScale::half_difference ? 4.0 : 1.0) * eta * eta;
  const double words = std::pow(double(order), n_min) - 1;
  const double bound = words * gaussian_q(std::sqrt(snr_linear * eta2 / (n_min * energy)));
  return std::clamp(bound, 0.0, 1.0);
}

double zeta(std::span<const double> sigmas, const PrecoderProfile& profile) {
  const auto pairs = subchannel_pairs(sigmas);
  if (pairs.size() == 1) return 1.0;
  std::vector<double> deltas, rhos;
  for (const auto& pair : pairs) {
    if (!(pair.gamma > 0)) throw DegenerateChannel("zeta: a singular value vanished");
    deltas.push_back(eval_profile(profile, pair.gamma).delta);
    rhos.push_back(pair.rho);
  }
  const auto power = power_control(deltas, rhos);
  return power.eta / (rhos.front() * std::sqrt(deltas.front()));
}

double block_delta(const Eigen::Matrix2cd& block, double gamma, int order) {
  const int side = qam_side(order);
  const Eigen::Matrix2cd normalized = block * (std::sqrt(2.0) / block.norm());
  Eigen::Matrix2cd f = Eigen::Matrix2cd::Zero();
  f(0, 0) = std::cos(gamma);
  f(1, 1) = std::sin(gamma);
  const Eigen::Matrix2cd t = f * normalized;
  std::vector<cd> diffs;
  for (int a = -side + 1; a < side; ++a)
    for (int b = -side + 1; b < side; ++b) diffs.emplace_back(2.0 * a, 2.0 * b);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d1 : diffs)
    for (const auto& d2 : diffs) {
      if (d1 == cd(0) && d2 == cd(0)) continue;
      best = std::min(best, (t * Eigen::Vector2cd(d1, d2)).squaredNorm());
    }
  return best / 8;
}

double pair_delta(PrecoderKind kind, double gamma, int order, const PrecoderTables& tables) {
  if (!(gamma > 0 && gamma <= pi / 4 + 1e-12))
    throw std::invalid_argument("pair_delta: gamma must lie in (0, pi/4]");
  switch (kind) {
    case PrecoderKind::proposed:
      if (tables.profile == nullptr || tables.profile->order != order)
        throw std::invalid_argument("pair_delta: proposed needs a matching profile");
      return eval_profile(*tables.profile, gamma).delta;
    case PrecoderKind::edmin:
      if (order != 4) throw UnsupportedError("the E-dmin precoder exists only for 4-QAM");
      return edmin_delta(gamma);
    case PrecoderKind::x:
      return min_epsilon(order, x_theta(gamma, order, tables.x_lookup), pi / 4, gamma);
    case PrecoderKind::y:
      return y_delta(std::cos(gamma), std::sin(gamma), order);
    case PrecoderKind::lattice:
      qam_side(order);
      return min_epsilon(order, kLatticeAngle, pi / 4, gamma);
  }
  return 0.0;
}

}  // namespace mimo_precode
