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
#include <complex>
#include <vector>

#include "mimo_precode/channel.hpp"
#include "mimo_precode/constellation.hpp"
#include "mimo_precode/system.hpp"

namespace mimo_precode {

// Nearest odd level in [-levels + 1, levels - 1]; ties round up.
int quantize_pam(double u, int levels);

struct ReceivedWord {
  Eigen::VectorXcd y;      // n_r, before rotation
  Eigen::VectorXcd y_rot;  // (U^H y).head(n_min)
  double snr_linear = 0.0;
};

ReceivedWord receive(const Eigen::VectorXcd& y, const ChannelDecomposition& decomposition,
                     double snr_linear);

struct DecodeResult {
  std::vector<int> symbols;  // constellation indices; Y-codebook indices for kind y
  double metric = 0.0;       // |y_rot - G x|^2
  long searched_points = 0;
};

struct PairDecision {
  QamPoint x1;
  QamPoint x2;
  double metric = 0.0;
  int searched_points = 0;
};

// ML decision for y = B x + n with B real and full rank, x in (M-QAM)^2.
// Real and imaginary parts are solved separately after a Givens QR of B; each
// part sweeps the sqrt(M) levels of x2. Throws DegenerateChannel for a
// rank-deficient block.
PairDecision decode_pair_fast(const Eigen::Vector2cd& y, const Eigen::Matrix2d& block, int order);

// y1 / a quantized to M^2-QAM and split by decompose_superposed. The metric is
// |y1 - a * compose_superposed(x1, x2)|^2.
PairDecision decode_scalar_case(std::complex<double> y1, double a, int order);

// Fast decoder dispatching on the precoder kind. `g` is effective_matrix(...).
DecodeResult decode_word(const Eigen::VectorXcd& y_rot, const Eigen::MatrixXcd& g,
                         const AssembledPrecoder& precoder);
DecodeResult decode_word(const ReceivedWord& word, const ChannelDecomposition& decomposition,
                         const AssembledPrecoder& precoder);

// Exhaustive minimization over all M^n_min words; split into real and imaginary
// halves when the effective matrix is real and the alphabet is QAM. Throws
// UnsupportedError when M^n_min exceeds 2^20.
DecodeResult decode_oracle(const Eigen::VectorXcd& y_rot, const Eigen::MatrixXcd& g,
                           const AssembledPrecoder& precoder);
DecodeResult decode_oracle(const ReceivedWord& word, const ChannelDecomposition& decomposition,
                           const AssembledPrecoder& precoder);

}  // namespace mimo_precode
