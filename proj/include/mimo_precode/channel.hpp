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

#include "mimo_precode/rng.hpp"

namespace mimo_precode {

struct ChannelRealization {
  Eigen::MatrixXcd h;  // n_r x n_t

  int n_r() const { return int(h.rows()); }
  int n_t() const { return int(h.cols()); }
};

// H = U D V^H with D the n_r x n_t matrix carrying sigmas on its leading diagonal.
struct ChannelDecomposition {
  Eigen::MatrixXcd u;  // n_r x n_r unitary
  Eigen::MatrixXcd v;  // n_t x n_t unitary
  std::vector<double> sigmas;  // n_min values, non-increasing

  int n_r() const { return int(u.rows()); }
  int n_t() const { return int(v.rows()); }
  int n_min() const { return int(sigmas.size()); }
  Eigen::MatrixXd d() const;
};

// Subchannels `strong` (index i) and `weak` (index n_min - 1 - i), zero-based.
struct SubchannelPair {
  int index = 0;
  int strong = 0;
  int weak = 0;
  double gamma = 0.0;  // arctan(sigma_weak / sigma_strong), in [0, pi/4]
  double rho = 0.0;    // sqrt(sigma_strong^2 + sigma_weak^2)
};

struct SvdOptions {
  int max_sweeps = 60;
  // Columns i, j count as orthogonal once |a_i^H a_j| <= tolerance * |a_i| |a_j|.
  double tolerance = 1e-14;
};

// Entries i.i.d. CN(0, 1): variance 0.5 per real dimension. Draw order is
// row-major, real part before imaginary part.
ChannelRealization sample_rayleigh(int n_r, int n_t, RandomStream& rng);

// Full SVD by one-sided complex Jacobi; throws NumericalFailure when the sweep
// cap is reached.
ChannelDecomposition decompose(const ChannelRealization& channel, const SvdOptions& options = {});

// Singular values only (same iteration, no singular vectors accumulated).
std::vector<double> singular_values(const Eigen::MatrixXcd& h, const SvdOptions& options = {});

// Pairs (i, n_min - 1 - i) for i < n_min / 2; throws UnsupportedError for odd n_min.
std::vector<SubchannelPair> subchannel_pairs(std::span<const double> sigmas);
std::vector<SubchannelPair> subchannel_pairs(const ChannelDecomposition& decomposition);

}  // namespace mimo_precode
