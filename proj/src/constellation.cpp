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

#include "mimo_precode/constellation.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "mimo_precode/errors.hpp"

namespace mimo_precode {

bool is_supported_order(int order) {
  if (order < 4) return false;
  while (order % 4 == 0) order /= 4;
  return order == 1;
}

int qam_side(int order) {
  if (!is_supported_order(order))
    throw UnsupportedError("unsupported QAM order " + std::to_string(order) +
                           " (must be 4^a, a >= 1)");
  int side = 1;
  while (side * side < order) side *= 2;
  return side;
}

QamConstellation::QamConstellation(int order)
    : order_(order), side_(qam_side(order)), avg_energy_(2.0 * (order - 1) / 3.0) {
  pam_.reserve(side_);
  for (int i = 1; i <= side_; ++i) pam_.push_back(2 * i - side_ - 1);
  points_.reserve(order_);
  for (int a : pam_)
    for (int b : pam_) points_.push_back({a, b});
}

bool QamConstellation::contains(QamPoint x) const {
  auto ok = [this](int v) { return (v % 2 != 0) && std::abs(v) <= side_ - 1; };
  return ok(x.re) && ok(x.im);
}

int QamConstellation::index_of(QamPoint x) const {
  if (!contains(x)) throw std::invalid_argument("point is not in the constellation");
  return pam_index(x.re, side_) * side_ + pam_index(x.im, side_);
}

QamConstellation make_qam(int order) { return QamConstellation(order); }

DifferencePair canonical(DifferencePair pq) {
  if (pq.p < 0 || (pq.p == 0 && pq.q < 0)) return {-pq.p, -pq.q};
  return pq;
}

std::vector<DifferencePair> difference_pairs(int order, PairReduction reduction) {
  const int side = qam_side(order);
  std::vector<DifferencePair> out;
  for (int p = -side + 1; p <= side - 1; ++p) {
    for (int q = -side + 1; q <= side - 1; ++q) {
      if (p == 0 && q == 0) continue;
      DifferencePair pq{p, q};
      if (reduction == PairReduction::canonical && canonical(pq) != pq) continue;
      out.push_back(pq);
    }
  }
  return out;
}

QamPoint compose_superposed(QamPoint x1, QamPoint x2, int order) {
  const int side = qam_side(order);
  return {side * x1.re + x2.re, side * x1.im + x2.im};
}

namespace {

// One real dimension: x1 = sgn(v) (2 ceil(|v| / (2 sqrt(M))) - 1), x2 = v - sqrt(M) x1.
std::pair<int, int> split_level(int v, int side) {
  const int sign = v >= 0 ? 1 : -1;
  const int mag = std::abs(v);
  const int x1 = sign * (2 * ((mag + 2 * side - 1) / (2 * side)) - 1);
  return {x1, v - side * x1};
}

}  // namespace

std::pair<QamPoint, QamPoint> decompose_superposed(QamPoint xp, int order) {
  const int side = qam_side(order);
  const int outer = side * side;
  auto ok = [outer](int v) { return (v % 2 != 0) && std::abs(v) <= outer - 1; };
  if (!ok(xp.re) || !ok(xp.im))
    throw std::invalid_argument("point (" + std::to_string(xp.re) + ", " +
                                std::to_string(xp.im) + ") is not in " +
                                std::to_string(outer * outer) + "-QAM");
  const auto [r1, r2] = split_level(xp.re, side);
  const auto [i1, i2] = split_level(xp.im, side);
  return {QamPoint{r1, i1}, QamPoint{r2, i2}};
}

}  // namespace mimo_precode
