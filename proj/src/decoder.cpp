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

#include "mimo_precode/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mimo_precode/errors.hpp"

namespace mimo_precode {

namespace {

using cd = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct HalfDecision {
  int x1 = 0;
  int x2 = 0;
  double metric = kInf;
};

// min over PAM^2 of |y - B x|^2 for real y, with B = Q R.
HalfDecision solve_half(double y0, double y1, const Eigen::Matrix2d& b, int side) {
  const double r11 = std::hypot(b(0, 0), b(1, 0));
  const double c = b(0, 0) / r11, s = b(1, 0) / r11;
  const double r12 = c * b(0, 1) + s * b(1, 1);
  const double r22 = -s * b(0, 1) + c * b(1, 1);
  const double z0 = c * y0 + s * y1;
  const double z1 = -s * y0 + c * y1;
  HalfDecision best;
  for (int x2 = -side + 1; x2 < side; x2 += 2) {
    const int x1 = quantize_pam((z0 - r12 * x2) / r11, side);
    const double e0 = z0 - r11 * x1 - r12 * x2;
    const double e1 = z1 - r22 * x2;
    const double metric = e0 * e0 + e1 * e1;
    if (metric < best.metric) best = {x1, x2, metric};
  }
  return best;
}

void check_rows(const Eigen::VectorXcd& y_rot, const Eigen::MatrixXcd& g, const AssembledPrecoder& p) {
  if (y_rot.size() != p.n_min || g.rows() != p.n_min || g.cols() != p.n_min)
    throw std::invalid_argument("decoder: dimensions do not match the precoder");
}

Eigen::Matrix2cd pair_block(const Eigen::MatrixXcd& g, const PairMeta& meta) {
  Eigen::Matrix2cd b;
  b << g(meta.strong, meta.strong), g(meta.strong, meta.weak), g(meta.weak, meta.strong),
      g(meta.weak, meta.weak);
  return b;
}

// Strongest-match index l (zero-based) of the Y codebook for one real dimension:
// the cheapest candidate within each parity class of l, then the better class.
int decode_y_half(double r_strong, double r_weak, double a, double b, int order) {
  const double l_cont = (r_strong / a + order + 1) / 2;  // one-based, continuous
  int best_l = 0;
  double best_metric = kInf;
  for (int parity = 0; parity < 2; ++parity) {
    // parity 0: even l (second coordinate +1), parity 1: odd l (second coordinate -1).
    const double half = parity == 0 ? l_cont / 2 : (l_cont + 1) / 2;
    const int m = std::clamp(int(std::floor(half + 0.5)), 1, order / 2);
    const int l = parity == 0 ? 2 * m : 2 * m - 1;
    const double e1 = r_strong - a * (2 * l - order - 1);
    const double e2 = r_weak - b * (parity == 0 ? 1.0 : -1.0);
    const double metric = e1 * e1 + e2 * e2;
    if (metric < best_metric || (metric == best_metric && l < best_l)) best_metric = metric, best_l = l;
  }
  return best_l - 1;
}

// Exhaustive over real level vectors of `gr` for target `yr`; returns level
// indices per coordinate.
std::vector<int> exhaustive_real(const Eigen::VectorXd& yr, const Eigen::MatrixXd& gr, int side,
                                 long& searched) {
  const int n = int(yr.size());
  std::vector<int> idx(n, 0), best(n, 0);
  Eigen::VectorXd x(n);
  double best_metric = kInf;
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = 2 * idx[i] - side + 1;
    const double metric = (yr - gr * x).squaredNorm();
    ++searched;
    if (metric < best_metric) best_metric = metric, best = idx;
    int pos = n - 1;
    while (pos >= 0 && ++idx[pos] == side) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return best;
}

void guard_search(const AssembledPrecoder& p) {
  if (std::pow(double(p.order), p.n_min) > double(1 << 20))
    throw UnsupportedError("exhaustive search over " + std::to_string(p.order) + "^" +
                           std::to_string(p.n_min) + " words exceeds the 2^20 guard");
}

DecodeResult finish(std::vector<int> symbols, long searched, const Eigen::VectorXcd& y_rot,
                    const Eigen::MatrixXcd& g, const AssembledPrecoder& precoder) {
  DecodeResult out;
  out.metric = (y_rot - g * modulate(precoder, symbols)).squaredNorm();
  out.symbols = std::move(symbols);
  out.searched_points = searched;
  return out;
}

// Separable search for real effective matrices and QAM alphabets.
DecodeResult real_split_search(const Eigen::VectorXcd& y_rot, const Eigen::MatrixXcd& g,
                               const AssembledPrecoder& precoder) {
  const int side = qam_side(precoder.order);
  const Eigen::MatrixXd gr = g.real();
  long searched = 0;
  const auto re = exhaustive_real(y_rot.real(), gr, side, searched);
  const auto im = exhaustive_real(y_rot.imag(), gr, side, searched);
  std::vector<int> symbols(precoder.n_min);
  for (int i = 0; i < precoder.n_min; ++i) symbols[i] = re[i] * side + im[i];
  return finish(std::move(symbols), searched, y_rot, g, precoder);
}

}  // namespace

int quantize_pam(double u, int levels) {
  const double m = (u + 1) / 2;
  const double r = std::floor(m + 0.5);  // ties round up
  const double v = std::clamp(2 * r - 1, double(-levels + 1), double(levels - 1));
  return int(v);
}

ReceivedWord receive(const Eigen::VectorXcd& y, const ChannelDecomposition& decomposition,
                     double snr_linear) {
  ReceivedWord word;
  word.y = y;
  word.y_rot = (decomposition.u.adjoint() * y).head(decomposition.n_min());
  word.snr_linear = snr_linear;
  return word;
}

PairDecision decode_pair_fast(const Eigen::Vector2cd& y, const Eigen::Matrix2d& block, int order) {
  const int side = qam_side(order);
  const double r11 = std::hypot(block(0, 0), block(1, 0));
  const double det = block.determinant();
  if (!(r11 > 0) || !(std::abs(det) > 1e-12 * block.squaredNorm()))
    throw DegenerateChannel("decode_pair_fast: rank-deficient pair block");
  const auto re = solve_half(y[0].real(), y[1].real(), block, side);
  const auto im = solve_half(y[0].imag(), y[1].imag(), block, side);
  PairDecision out;
  out.x1 = {re.x1, im.x1};
  out.x2 = {re.x2, im.x2};
  out.metric = re.metric + im.metric;
  out.searched_points = 2 * side;
  return out;
}

PairDecision decode_scalar_case(std::complex<double> y1, double a, int order) {
  qam_side(order);
  if (!(a > 0)) throw DegenerateChannel("decode_scalar_case: non-positive gain");
  const cd v = y1 / a;
  const QamPoint xp{quantize_pam(v.real(), order), quantize_pam(v.imag(), order)};
  const auto [x1, x2] = decompose_superposed(xp, order);
  PairDecision out;
  out.x1 = x1;
  out.x2 = x2;
  out.metric = std::norm(y1 - a * xp.value());
  out.searched_points = 0;
  return out;
}

DecodeResult decode_word(const Eigen::VectorXcd& y_rot, const Eigen::MatrixXcd& g,
                         const AssembledPrecoder& precoder) {
  check_rows(y_rot, g, precoder);
  const int order = precoder.order;
  std::vector<int> symbols(precoder.n_min, 0);
  long searched = 0;

  switch (precoder.kind) {
    case PrecoderKind::lattice:
      if (precoder.n_min > 2) return real_split_search(y_rot, g, precoder);
      [[fallthrough]];
    case PrecoderKind::proposed:
    case PrecoderKind::x: {
      const QamConstellation qam(order);
      for (std::size_t i = 0; i < precoder.pairs.size(); ++i) {
        const auto& meta = precoder.pairs[i];
        const Eigen::Matrix2d b = pair_block(g, meta).real();
        const Eigen::Vector2cd yp(y_rot[meta.strong], y_rot[meta.weak]);
        if (precoder.scalar_case(int(i))) {
          const auto d = decode_scalar_case(yp[0], -b(0, 1), order);
          symbols[meta.strong] = qam.index_of(d.x1);
          symbols[meta.weak] = qam.index_of({-d.x2.re, -d.x2.im});
        } else {
          const auto d = decode_pair_fast(yp, b, order);
          symbols[meta.strong] = qam.index_of(d.x1);
          symbols[meta.weak] = qam.index_of(d.x2);
          searched += d.searched_points;
        }
      }
      break;
    }
    case PrecoderKind::edmin: {
      const QamConstellation qam(order);
      for (const auto& meta : precoder.pairs) {
        const Eigen::Matrix2cd b = pair_block(g, meta);
        const Eigen::Vector2cd yp(y_rot[meta.strong], y_rot[meta.weak]);
        double best = kInf;
        for (int s0 = 0; s0 < order; ++s0)
          for (int s1 = 0; s1 < order; ++s1) {
            const Eigen::Vector2cd x(qam.point(s0).value(), qam.point(s1).value());
            const double metric = (yp - b * x).squaredNorm();
            if (metric < best) best = metric, symbols[meta.strong] = s0, symbols[meta.weak] = s1;
          }
        searched += long(order) * order;
      }
      break;
    }
    case PrecoderKind::y: {
      for (const auto& meta : precoder.pairs) {
        const double a = g(meta.strong, meta.strong).real();
        const double b = g(meta.weak, meta.weak).real();
        const cd ys = y_rot[meta.strong], yw = y_rot[meta.weak];
        symbols[meta.strong] = decode_y_half(ys.real(), yw.real(), a, b, order);
        symbols[meta.weak] = decode_y_half(ys.imag(), yw.imag(), a, b, order);
        searched += 4;
      }
      break;
    }
  }
  return finish(std::move(symbols), searched, y_rot, g, precoder);
}

DecodeResult decode_word(const ReceivedWord& word, const ChannelDecomposition& decomposition,
                         const AssembledPrecoder& precoder) {
  return decode_word(word.y_rot, effective_matrix(precoder, decomposition.sigmas, word.snr_linear),
                     precoder);
}

DecodeResult decode_oracle(const Eigen::VectorXcd& y_rot, const Eigen::MatrixXcd& g,
                           const AssembledPrecoder& precoder) {
  check_rows(y_rot, g, precoder);
  guard_search(precoder);
  const bool real_matrix = g.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real_matrix && precoder.kind != PrecoderKind::y) return real_split_search(y_rot, g, precoder);

  const int n = precoder.n_min;
  std::vector<int> idx(n, 0), best(n, 0);
  double best_metric = kInf;
  long searched = 0;
  while (true) {
    const double metric = (y_rot - g * modulate(precoder, idx)).squaredNorm();
    ++searched;
    if (metric < best_metric) best_metric = metric, best = idx;
    int pos = n - 1;
    while (pos >= 0 && ++idx[pos] == precoder.order) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return finish(std::move(best), searched, y_rot, g, precoder);
}

DecodeResult decode_oracle(const ReceivedWord& word, const ChannelDecomposition& decomposition,
                           const AssembledPrecoder& precoder) {
  return decode_oracle(word.y_rot, effective_matrix(precoder, decomposition.sigmas, word.snr_linear),
                       precoder);
}

}  // namespace mimo_precode
