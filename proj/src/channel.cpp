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

#include "mimo_precode/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "mimo_precode/errors.hpp"

namespace mimo_precode {

Eigen::MatrixXd ChannelDecomposition::d() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_r(), n_t());
  for (int k = 0; k < n_min(); ++k) out(k, k) = sigmas[k];
  return out;
}

ChannelRealization sample_rayleigh(int n_r, int n_t, RandomStream& rng) {
  ChannelRealization out{Eigen::MatrixXcd(n_r, n_t)};
  for (int r = 0; r < n_r; ++r)
    for (int c = 0; c < n_t; ++c) out.h(r, c) = rng.complex_normal(0.5);
  return out;
}

namespace {

// Orthogonalizes the columns of `a` (rows >= cols) in place. When `v` is
// non-null the same column rotations are applied to it.
void jacobi_sweeps(Eigen::MatrixXcd& a, Eigen::MatrixXcd* v, const SvdOptions& options) {
  const int n = int(a.cols());
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double alpha = a.col(i).squaredNorm();
        const double beta = a.col(j).squaredNorm();
        const std::complex<double> g = a.col(i).dot(a.col(j));  // a_i^H a_j
        const double mag = std::abs(g);
        if (mag == 0.0 || mag <= options.tolerance * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * mag);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const std::complex<double> phase = std::conj(g) / mag;  // e^{-i phi}
        Eigen::VectorXcd ai = a.col(i);
        Eigen::VectorXcd bj = phase * a.col(j);
        a.col(i) = c * ai - s * bj;
        a.col(j) = s * ai + c * bj;
        if (v) {
          Eigen::VectorXcd vi = v->col(i);
          Eigen::VectorXcd wj = phase * v->col(j);
          v->col(i) = c * vi - s * wj;
          v->col(j) = s * vi + c * wj;
        }
      }
    }
    if (!rotated) return;
  }
  throw NumericalFailure("SVD did not converge within " + std::to_string(options.max_sweeps) +
                         " Jacobi sweeps");
}

std::vector<int> descending_order(const std::vector<double>& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return values[x] > values[y]; });
  return order;
}

// Replaces columns flagged in `missing` (and fills nothing else) with unit
// vectors orthogonal to all kept columns, by Gram-Schmidt on the standard basis.
void complete_unitary(Eigen::MatrixXcd& q, const std::vector<bool>& missing) {
  const int m = int(q.rows());
  std::vector<int> kept;
  for (int k = 0; k < m; ++k)
    if (!missing[k]) kept.push_back(k);
  int candidate = 0;
  for (int k = 0; k < m; ++k) {
    if (!missing[k]) continue;
    while (true) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Unit(m, candidate++);
      for (int pass = 0; pass < 2; ++pass)
        for (int j : kept) e -= q.col(j).dot(e) * q.col(j);
      const double norm = e.norm();
      if (norm > 1e-6) {
        q.col(k) = e / norm;
        kept.push_back(k);
        break;
      }
    }
  }
}

// SVD for rows >= cols.
ChannelDecomposition decompose_tall(const Eigen::MatrixXcd& h, const SvdOptions& options) {
  const int m = int(h.rows());
  const int n = int(h.cols());
  Eigen::MatrixXcd a = h;
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);
  jacobi_sweeps(a, &v, options);

  std::vector<double> norms(n);
  for (int k = 0; k < n; ++k) norms[k] = a.col(k).norm();
  const auto order = descending_order(norms);
  const double largest = n > 0 ? norms[order[0]] : 0.0;

  ChannelDecomposition out;
  out.u = Eigen::MatrixXcd::Zero(m, m);
  out.v = Eigen::MatrixXcd(n, n);
  out.sigmas.resize(n);
  std::vector<bool> missing(m, true);
  for (int k = 0; k < n; ++k) {
    const int src = order[k];
    out.sigmas[k] = norms[src];
    out.v.col(k) = v.col(src);
    if (norms[src] > 1e-13 * largest && norms[src] > 0.0) {
      out.u.col(k) = a.col(src) / norms[src];
      missing[k] = false;
    }
  }
  complete_unitary(out.u, missing);
  return out;
}

}  // namespace

ChannelDecomposition decompose(const ChannelRealization& channel, const SvdOptions& options) {
  const Eigen::MatrixXcd& h = channel.h;
  if (!h.allFinite()) throw NumericalFailure("channel matrix has non-finite entries");
  if (h.rows() >= h.cols()) return decompose_tall(h, options);
  // H^H = U' S V'^H  =>  H = V' S U'^H
  ChannelDecomposition flipped = decompose_tall(h.adjoint(), options);
  ChannelDecomposition out;
  out.u = std::move(flipped.v);
  out.v = std::move(flipped.u);
  out.sigmas = std::move(flipped.sigmas);
  return out;
}

std::vector<double> singular_values(const Eigen::MatrixXcd& h, const SvdOptions& options) {
  if (!h.allFinite()) throw NumericalFailure("channel matrix has non-finite entries");
  Eigen::MatrixXcd a = h.rows() >= h.cols() ? Eigen::MatrixXcd(h) : Eigen::MatrixXcd(h.adjoint());
  jacobi_sweeps(a, nullptr, options);
  std::vector<double> sigmas(a.cols());
  for (int k = 0; k < int(a.cols()); ++k) sigmas[k] = a.col(k).norm();
  std::sort(sigmas.begin(), sigmas.end(), std::greater<>());
  return sigmas;
}

std::vector<SubchannelPair> subchannel_pairs(std::span<const double> sigmas) {
  const int n_min = int(sigmas.size());
  if (n_min % 2 != 0)
    throw UnsupportedError("odd n_min = " + std::to_string(n_min) +
                           " is not supported (the unpaired subchannel has no defined power share)");
  std::vector<SubchannelPair> out;
  out.reserve(n_min / 2);
  for (int i = 0; i < n_min / 2; ++i) {
    const double strong = sigmas[i];
    const double weak = sigmas[n_min - 1 - i];
    SubchannelPair pair;
    pair.index = i;
    pair.strong = i;
    pair.weak = n_min - 1 - i;
    pair.gamma = std::atan2(weak, strong);
    pair.rho = std::hypot(strong, weak);
    out.push_back(pair);
  }
  return out;
}

std::vector<SubchannelPair> subchannel_pairs(const ChannelDecomposition& decomposition) {
  return subchannel_pairs(std::span<const double>(decomposition.sigmas));
}

}  // namespace mimo_precode
