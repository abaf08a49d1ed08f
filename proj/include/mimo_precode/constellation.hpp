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

#include <compare>
#include <complex>
#include <utility>
#include <vector>

namespace mimo_precode {

// A constellation point with exact integer coordinates (unnormalized).
struct QamPoint {
  int re = 0;
  int im = 0;

  auto operator<=>(const QamPoint&) const = default;
  std::complex<double> value() const { return {double(re), double(im)}; }
};

// Half-difference (p, q) of two PAM levels per real dimension of a symbol pair.
struct DifferencePair {
  int p = 0;
  int q = 0;

  auto operator<=>(const DifferencePair&) const = default;
};

// Square M-QAM built as the Cartesian square of a sqrt(M)-PAM.
// Point index k maps to (pam[k / side], pam[k % side]).
class QamConstellation {
 public:
  explicit QamConstellation(int order);

  int order() const { return order_; }
  int side() const { return side_; }
  const std::vector<int>& pam_levels() const { return pam_; }
  const std::vector<QamPoint>& points() const { return points_; }
  // 2(M-1)/3
  double avg_energy() const { return avg_energy_; }

  QamPoint point(int index) const { return points_[index]; }
  int index_of(QamPoint x) const;
  bool contains(QamPoint x) const;

 private:
  int order_;
  int side_;
  double avg_energy_;
  std::vector<int> pam_;
  std::vector<QamPoint> points_;
};

bool is_supported_order(int order);
// Integer square root of a supported order; throws UnsupportedError otherwise.
int qam_side(int order);

QamConstellation make_qam(int order);

// PAM level index in [0, side) of an odd level in [-side+1, side-1].
inline int pam_index(int level, int side) { return (level + side - 1) / 2; }

enum class PairReduction { full, canonical };

// All (p, q) in {-sqrt(M)+1 .. sqrt(M)-1}^2 except (0, 0). The canonical
// reduction keeps one of each (p, q) / (-p, -q) exchange, the one whose first
// nonzero entry is positive; epsilon is even, so the minimum is unchanged.
std::vector<DifferencePair> difference_pairs(int order,
                                             PairReduction reduction = PairReduction::full);

// Canonical sign representative of a pair.
DifferencePair canonical(DifferencePair pq);

// sqrt(M) * x1 + x2, a point of M^2-QAM.
QamPoint compose_superposed(QamPoint x1, QamPoint x2, int order);

// Inverse of compose_superposed; throws std::invalid_argument when xp is not
// a point of M^2-QAM.
std::pair<QamPoint, QamPoint> decompose_superposed(QamPoint xp, int order);

}  // namespace mimo_precode
