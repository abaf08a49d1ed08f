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

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mimo_precode/baselines.hpp"
#include "mimo_precode/channel.hpp"
#include "mimo_precode/optimizer.hpp"

namespace mimo_precode {

// Optional inputs some kinds need. Pointers are non-owning.
struct PrecoderTables {
  const PrecoderProfile* profile = nullptr;  // proposed
  const XLookup* x_lookup = nullptr;         // x with order > 4
  // Lattice with n_min > 2; read from LatticeStore::from_environment() when null.
  const LatticeGenerator* lattice = nullptr;
};

struct PairMeta {
  int index = 0;
  int strong = 0;
  int weak = 0;
  double gamma = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double psi = 0.0;
  double delta = 0.0;  // half-difference scale
  int segment = -1;    // proposed only, zero-based
};

struct AssembledPrecoder {
  PrecoderKind kind = PrecoderKind::proposed;
  int order = 0;
  int n_t = 0;
  int n_min = 0;
  // Transmit matrix in the right-singular basis: s = V * p * diag(symbol_scales) * x
  // with x integer-valued. For kind y the columns follow x_eff.
  Eigen::MatrixXcd p;
  Eigen::VectorXd symbol_scales;
  std::vector<double> taus;  // one per pair
  // Equalized distance constant. For kinds without power control it is the
  // smallest per-pair tau * rho * sqrt(delta); 0 for lattices of dim > 2.
  double eta = 0.0;
  std::vector<PairMeta> pairs;
  Eigen::MatrixXd lattice;  // generator, kind lattice only

  // True when pair i has psi* = 0 and decodes without search.
  bool scalar_case(int pair) const {
    return kind == PrecoderKind::proposed && pairs[pair].segment == 0;
  }
};

struct PowerControl {
  std::vector<double> taus;
  double eta = 0.0;
};

// tau_i^2 = (n_min / 2) / (rho_i^2 delta_i * sum_j 1 / (rho_j^2 delta_j)) over
// pairs, so 2 * sum tau_i^2 = n_min and tau_i^2 rho_i^2 delta_i = eta^2.
// Throws DegenerateChannel when some delta_i * rho_i^2 vanishes.
PowerControl power_control(std::span<const double> deltas, std::span<const double> rhos);

// Throws DegenerateChannel for a vanishing singular value, UnsupportedError for
// kind/order/dimension combinations that do not exist, std::invalid_argument
// for a missing or mismatched table.
AssembledPrecoder assemble(std::span<const double> sigmas, int n_t, PrecoderKind kind, int order,
                           const PrecoderTables& tables = {});
AssembledPrecoder assemble(const ChannelDecomposition& decomposition, PrecoderKind kind, int order,
                           const PrecoderTables& tables = {});

// sqrt(snr / n_t) * diag(sigmas) * p * diag(symbol_scales): maps the integer
// symbol vector to the noiseless rotated observation (U^H y).head(n_min).
Eigen::MatrixXcd effective_matrix(const AssembledPrecoder& precoder, std::span<const double> sigmas,
                                  double snr_linear);

// Integer-valued transmit vector for symbol indices in [0, order).
Eigen::VectorXcd modulate(const AssembledPrecoder& precoder, std::span<const int> symbols);

// Which difference vectors eta^2 refers to. half_difference: eta from deltas on
// (p, q) = (x - x') / 2, the convention of the optimizer; the pairwise
// distance is then 4 * eta^2. full_difference: eta^2 taken as is.
enum class DeltaScale { half_difference, full_difference };

// Gaussian tail probability.
double gaussian_q(double x);

// (M^n_min - 1) * Q(sqrt(snr * eta_eff^2 / (n_min * E_M))), clamped to [0, 1].
double union_bound(double eta, int order, int n_min, double snr_linear,
                   DeltaScale scale = DeltaScale::half_difference);

// eta / (rho_1 sqrt(delta_1)) of the proposed precoder; 1 for n_min = 2.
double zeta(std::span<const double> sigmas, const PrecoderProfile& profile);

// (1/8) min over nonzero full-difference complex pairs dx of
// |diag(cos g, sin g) * block * dx|^2, with block scaled so |block|_F^2 = 2.
// Equals the half-difference delta for real blocks.
double block_delta(const Eigen::Matrix2cd& block, double gamma, int order);

// Per-pair distance of `kind` at condition gamma on the half-difference scale
// (with n_t = n_min = 2, no power control).
double pair_delta(PrecoderKind kind, double gamma, int order, const PrecoderTables& tables = {});

}  // namespace mimo_precode
