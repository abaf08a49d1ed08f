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
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mimo_precode/constellation.hpp"

namespace mimo_precode {

// Angle grid {step * k}: psi over (0, pi/2], theta over (0, pi/4].
struct SearchGrid {
  double step = 0.001;

  int psi_count() const { return int(std::floor(std::numbers::pi / 2 / step)); }
  int theta_count() const { return int(std::floor(std::numbers::pi / 4 / step)); }
  double at(int k) const { return step * k; }
};

// diag(cos g, sin g) * diag(cos psi, sin psi) * [[cos t, -sin t], [sin t, cos t]]
Eigen::Matrix2d f_matrix(double gamma, double psi, double theta);

// Squared norm of f_matrix(gamma, psi, theta) * (p, q)^T.
double epsilon(DifferencePair pq, double theta, double psi, double gamma);

// At fixed theta, epsilon = cos^2(g) cos^2(psi) * along + sin^2(g) sin^2(psi) * across.
struct PairWeights {
  double along = 0.0;   // (p cos t - q sin t)^2
  double across = 0.0;  // (q cos t + p sin t)^2
};
PairWeights pair_weights(DifferencePair pq, double theta);

// Minimum of epsilon over the canonical difference pairs of `order`.
double min_epsilon(int order, double theta, double psi, double gamma);

struct GridSearchResult {
  // Best point of the literal grid and its max-min value.
  double psi_star = 0.0;
  double theta_star = 0.0;
  double delta_value = 0.0;
  // Local refinement around the grid optimum: theta is zoomed within two grid
  // steps and psi is solved exactly (the inner problem is linear in sin^2 psi).
  double refined_psi = 0.0;
  double refined_theta = 0.0;
  double refined_delta = 0.0;
  // Pairs within relative 1e-6 of the minimum at the refined point, canonical and sorted.
  std::vector<DifferencePair> active_pairs;
};

// Reusable grid searcher for one (order, grid): the per-theta candidate sets
// are computed once and shared by all gamma values.
class GridSearcher {
 public:
  GridSearcher(int order, SearchGrid grid = {});

  // Literal grid search followed by local refinement of its optimum.
  GridSearchResult search(double gamma) const;
  // Global optimum with psi solved exactly on every theta of the grid, then
  // zoomed around the best local maxima. Exact ties go to the larger theta.
  // The grid fields of the result are left at zero.
  GridSearchResult optimum(double gamma) const;

  int order() const { return order_; }
  const SearchGrid& grid() const { return grid_; }

 private:
  int order_;
  SearchGrid grid_;
  std::vector<DifferencePair> pairs_;
  std::vector<double> cos2_psi_;
  std::vector<double> sin2_psi_;
  // Lower-left hull weights per theta grid index, flattened.
  std::vector<std::vector<PairWeights>> hulls_;
};

GridSearchResult grid_search(double gamma, int order, const SearchGrid& grid = {});

// max over psi of min over pairs of epsilon at fixed (theta, gamma), exact.
struct InnerOptimum {
  double value = 0.0;
  double sin2_psi = 0.0;
};
InnerOptimum best_psi(std::span<const DifferencePair> pairs, double theta, double gamma);

struct PrecoderSegment {
  int k = 1;  // one-based
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double theta_star = 0.0;
  double a = 0.0;  // tan^2(gamma) tan^2(psi*) on the segment
  std::vector<DifferencePair> active_pairs;
};

// Roots in (0, pi/4] of the three-pair equal-epsilon condition (quadratic in tan theta).
std::vector<double> theta_roots(DifferencePair first, DifferencePair second, DifferencePair third);
// The unique root; throws NumericalFailure when no root (or, without a
// disambiguation context, more than one root) lies in range.
double solve_theta(DifferencePair first, DifferencePair second, DifferencePair third);
// As above, choosing among in-range roots the one with the larger min-epsilon
// over all pairs of `order` at gamma_mid.
double solve_theta(DifferencePair first, DifferencePair second, DifferencePair third, int order,
                   double gamma_mid);

// psi* = 0 segment: angle where two pairs have equal `along` weight, chosen as in solve_theta.
double solve_theta_first(DifferencePair first, DifferencePair second, int order, double gamma_mid);

// 1 + (n_1 - n_2) / D_12(theta); throws NumericalFailure on a vanishing denominator.
double solve_A(DifferencePair first, DifferencePair second, double theta);
// A from the best-conditioned pair combination of an active set, with consistency check.
double segment_A(std::span<const DifferencePair> pairs, double theta);

// psi* on a segment: arctan(sqrt(A) / tan gamma); 0 when A = 0.
double segment_psi(const PrecoderSegment& segment, double gamma);
// Max-min epsilon on a segment in closed form.
double segment_delta(const PrecoderSegment& segment, double gamma);

// gamma where the closed-form deltas of consecutive segments cross.
double solve_boundary(const PrecoderSegment& previous, const PrecoderSegment& next);

struct PrecoderProfile {
  int order = 0;
  std::vector<PrecoderSegment> segments;

  // Index of the segment containing gamma; boundaries belong to the higher segment.
  int segment_index(double gamma) const;
  // gamma'_2: upper end of the psi* = 0 segment.
  double first_boundary() const { return segments.front().gamma_hi; }
};

struct ProfileOptions {
  double coarse_stride = 0.002;
  // Bisection between samples with different active sets stops below this gap.
  double min_gap = 1e-5;
  int workers = 1;
};

PrecoderProfile build_profile(int order, const SearchGrid& grid = {},
                              const ProfileOptions& options = {});

struct ProfilePoint {
  double theta_star = 0.0;
  double psi_star = 0.0;
  double delta = 0.0;
  int segment = 0;  // zero-based index into profile.segments
};

// Throws std::invalid_argument for gamma outside (0, pi/4].
ProfilePoint eval_profile(const PrecoderProfile& profile, double gamma);

std::string profile_to_json(const PrecoderProfile& profile);
PrecoderProfile profile_from_json(const std::string& text);

}  // namespace mimo_precode
