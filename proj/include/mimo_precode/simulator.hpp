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

#include <cstdint>
#include <span>
#include <vector>

#include "mimo_precode/baselines.hpp"
#include "mimo_precode/channel.hpp"
#include "mimo_precode/system.hpp"

namespace mimo_precode {

struct SimConfig {
  int n_t = 2;
  int n_r = 2;
  int order = 4;
  PrecoderKind kind = PrecoderKind::proposed;
  std::vector<double> snr_grid_db;
  long trials_per_point = 100000;
  std::uint64_t seed = 1;
  int workers = 1;  // hint only; results do not depend on it
  PrecoderTables tables;
};

struct WepPoint {
  double snr_db = 0.0;
  long trials = 0;
  long word_errors = 0;
  double wep = 0.0;
  double ci_halfwidth = 0.0;  // 95 %
};

// Half-width of the 95 % interval: normal approximation, Wilson score
// interval when errors < 30.
double binomial_halfwidth(long errors, long trials);

// Trial t draws, from derive_stream(seed, t): H, then the n_min symbol
// indices, then the n_r noise samples. The same draws serve every SNR point and
// every precoder kind, so curves from equal seeds are paired.
std::vector<WepPoint> run_wep(const SimConfig& config);

// Word errors of a fixed channel over `trials` symbol and noise draws.
struct FixedChannelResult {
  long trials = 0;
  long word_errors = 0;
};
FixedChannelResult run_fixed_channel(const ChannelRealization& channel, PrecoderKind kind, int order,
                                     double snr_linear, long trials, std::uint64_t seed,
                                     const PrecoderTables& tables = {}, int workers = 1);

struct ZetaStats {
  double zeta_min = 0.0;
  double p_zeta = 0.0;  // fraction of draws with zeta < 1
  long trials = 0;
};
ZetaStats run_zeta_stats(int n_t, int n_r, const PrecoderProfile& profile, long trials,
                         std::uint64_t seed, int workers = 1);

struct NoSearchPoint {
  int pair_index = 0;  // one-based
  double probability = 0.0;
  long trials = 0;
};
// Per pair, the fraction of draws with sigma_weak / sigma_strong <= tan(gamma'_2).
std::vector<NoSearchPoint> run_nosearch(int n_t, int n_r, const PrecoderProfile& profile, long trials,
                                        std::uint64_t seed, int workers = 1);

// Least-squares slope of log10(wep) against snr_db / 10 over points with at
// least `min_errors` word errors. Throws std::invalid_argument with fewer than
// two such points.
double estimate_slope(std::span<const WepPoint> curve, long min_errors = 20);

}  // namespace mimo_precode
