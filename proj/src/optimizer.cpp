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

#include "mimo_precode/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mimo_precode/errors.hpp"

namespace mimo_precode {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4;

std::string region(double lo, double hi) {
  std::ostringstream os;
  os.precision(6);
  os << " (gamma in [" << lo << ", " << hi << "])";
  return os.str();
}

int norm2(DifferencePair pq) { return pq.p * pq.p + pq.q * pq.q; }

// Lower-left convex chain of the weight points: the only candidates for the
// minimum of w1 * along + w2 * across with w1, w2 >= 0. Nearly collinear
// points are kept so that the minimum matches the full list bit for bit.
std::vector<PairWeights> lower_left_hull(std::vector<PairWeights> pts) {
  std::sort(pts.begin(), pts.end(), [](const PairWeights& x, const PairWeights& y) {
    return x.along < y.along || (x.along == y.along && x.across < y.across);
  });
  double scale = 0.0;
  for (const auto& w : pts) scale = std::max(scale, w.along + w.across);
  const double tol = 1e-12 * scale * scale;
  std::vector<PairWeights> chain;
  for (const auto& w : pts) {
    while (chain.size() >= 2) {
      const auto& o = chain[chain.size() - 2];
      const auto& a = chain.back();
      const double cross = (a.along - o.along) * (w.across - o.across) -
                           (a.across - o.across) * (w.along - o.along);
      if (cross < -tol)
        chain.pop_back();
      else
        break;
    }
    chain.push_back(w);
  }
  size_t lowest = 0;
  for (size_t k = 1; k < chain.size(); ++k)
    if (chain[k].across < chain[lowest].across) lowest = k;
  chain.resize(lowest + 1);
  return chain;
}

std::vector<PairWeights> weights_at(std::span<const DifferencePair> pairs, double theta) {
  std::vector<PairWeights> out;
  out.reserve(pairs.size());
  for (const auto& pq : pairs) out.push_back(pair_weights(pq, theta));
  return out;
}

// max over u in [0, 1] of min_i (c_along * along_i * (1 - u) + c_across * across_i * u).
InnerOptimum envelope_max(const std::vector<PairWeights>& hull, double c_along, double c_across) {
  const size_t n = hull.size();
  std::vector<double> intercept(n), slope(n);
  for (size_t i = 0; i < n; ++i) {
    intercept[i] = c_along * hull[i].along;
    slope[i] = c_across * hull[i].across - intercept[i];
  }
  auto envelope = [&](double u) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) m = std::min(m, intercept[i] + slope[i] * u);
    return m;
  };
  InnerOptimum best{envelope(0.0), 0.0};
  auto consider = [&](double u) {
    const double value = envelope(u);
    if (value > best.value) best = {value, u};
  };
  consider(1.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (!((slope[i] > 0 && slope[j] < 0) || (slope[i] < 0 && slope[j] > 0))) continue;
      const double u = (intercept[j] - intercept[i]) / (slope[i] - slope[j]);
      if (u > 0.0 && u < 1.0) consider(u);
    }
  }
  return best;
}

// Zooms theta within [lo, hi] on the exact inner optimum.
struct Refined {
  double theta;
  InnerOptimum inner;
};

Refined zoom_theta(std::span<const DifferencePair> pairs, double gamma, double lo, double hi) {
  const double c = std::cos(gamma), s = std::sin(gamma);
  auto g = [&](double theta) {
    return envelope_max(lower_left_hull(weights_at(pairs, theta)), c * c, s * s);
  };
  constexpr int kIntervals = 20;
  Refined best{lo, g(lo)};
  while (hi - lo > 1e-15) {
    const double step = (hi - lo) / kIntervals;
    int best_k = -1;
    for (int k = 0; k <= kIntervals; ++k) {
      const double theta = (k == kIntervals) ? hi : lo + step * k;
      const auto inner = g(theta);
      if (best_k < 0 || inner.value > best.inner.value) {
        best = {theta, inner};
        best_k = k;
      }
    }
    const double new_lo = std::max(lo, best.theta - step);
    const double new_hi = std::min(hi, best.theta + step);
    if (new_hi - new_lo >= hi - lo) break;
    lo = new_lo;
    hi = new_hi;
  }
  return best;
}

std::vector<DifferencePair> active_set(std::span<const DifferencePair> pairs, double theta,
                                       double sin2_psi, double gamma) {
  const double c = std::cos(gamma), s = std::sin(gamma);
  const double w_along = c * c * (1.0 - sin2_psi), w_across = s * s * sin2_psi;
  std::vector<double> values;
  values.reserve(pairs.size());
  double m = std::numeric_limits<double>::infinity();
  for (const auto& pq : pairs) {
    const auto w = pair_weights(pq, theta);
    values.push_back(w_along * w.along + w_across * w.across);
    m = std::min(m, values.back());
  }
  std::vector<DifferencePair> out;
  for (size_t k = 0; k < pairs.size(); ++k)
    if (values[k] <= m * (1.0 + 1e-6)) out.push_back(canonical(pairs[k]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Coefficients of the equal-epsilon condition between `base` and `other`.
struct PairDifference {
  double a, b, c, d;
};

PairDifference difference(DifferencePair base, DifferencePair other) {
  return {double(norm2(base) - norm2(other)), double(other.p * other.q - base.p * base.q),
          double(other.q * other.q - base.q * base.q), double(other.p * other.p - base.p * base.p)};
}

double theta_from_tan(double t) { return t >= 1.0 ? kQuarterPi : std::atan(t); }

bool tan_in_range(double t) { return t > 0.0 && t <= 1.0 + 1e-12; }

// min epsilon over the pairs of `order` at the closed-form psi for (theta, A).
double min_epsilon_at(int order, double theta, double a, double gamma) {
  const double psi = a == 0.0 ? 0.0 : std::atan(std::sqrt(a) / std::tan(gamma));
  return min_epsilon(order, theta, psi, gamma);
}

}  // namespace

Eigen::Matrix2d f_matrix(double gamma, double psi, double theta) {
  Eigen::Matrix2d channel = Eigen::Vector2d(std::cos(gamma), std::sin(gamma)).asDiagonal();
  Eigen::Matrix2d power = Eigen::Vector2d(std::cos(psi), std::sin(psi)).asDiagonal();
  Eigen::Matrix2d rotation;
  rotation << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return channel * power * rotation;
}

PairWeights pair_weights(DifferencePair pq, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double along = pq.p * c - pq.q * s;
  const double across = pq.q * c + pq.p * s;
  return {along * along, across * across};
}

double epsilon(DifferencePair pq, double theta, double psi, double gamma) {
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const double cp = std::cos(psi), sp = std::sin(psi);
  const auto w = pair_weights(pq, theta);
  return cg * cg * cp * cp * w.along + sg * sg * sp * sp * w.across;
}

double min_epsilon(int order, double theta, double psi, double gamma) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& pq : difference_pairs(order, PairReduction::canonical))
    m = std::min(m, epsilon(pq, theta, psi, gamma));
  return m;
}

InnerOptimum best_psi(std::span<const DifferencePair> pairs, double theta, double gamma) {
  const double c = std::cos(gamma), s = std::sin(gamma);
  return envelope_max(lower_left_hull(weights_at(pairs, theta)), c * c, s * s);
}

GridSearcher::GridSearcher(int order, SearchGrid grid)
    : order_(order), grid_(grid), pairs_(difference_pairs(order, PairReduction::canonical)) {
  if (!(grid_.step > 0.0)) throw std::invalid_argument("grid step must be positive");
  for (int k = 1; k <= grid_.psi_count(); ++k) {
    const double psi = grid_.at(k);
    cos2_psi_.push_back(std::cos(psi) * std::cos(psi));
    sin2_psi_.push_back(std::sin(psi) * std::sin(psi));
  }
  for (int k = 1; k <= grid_.theta_count(); ++k)
    hulls_.push_back(lower_left_hull(weights_at(pairs_, grid_.at(k))));
}

GridSearchResult GridSearcher::search(double gamma) const {
  if (!(gamma > 0.0 && gamma <= kQuarterPi + 1e-15))
    throw std::invalid_argument("gamma must lie in (0, pi/4]");
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const double c2 = cg * cg, s2 = sg * sg;
  double best = -1.0;
  int best_theta = 0, best_psi = 0;
  const int n_psi = int(cos2_psi_.size());
  for (int t = 0; t < int(hulls_.size()); ++t) {
    const auto& hull = hulls_[t];
    for (int p = 0; p < n_psi; ++p) {
      const double wa = c2 * cos2_psi_[p], wc = s2 * sin2_psi_[p];
      double m = std::numeric_limits<double>::infinity();
      for (const auto& w : hull) m = std::min(m, wa * w.along + wc * w.across);
      if (m > best) {
        best = m;
        best_theta = t;
        best_psi = p;
      }
    }
  }
  GridSearchResult out;
  out.theta_star = grid_.at(best_theta + 1);
  out.psi_star = grid_.at(best_psi + 1);
  out.delta_value = best;

  const double lo = std::max(out.theta_star - 2 * grid_.step, 1e-9);
  const double hi = std::min(out.theta_star + 2 * grid_.step, kQuarterPi);
  const Refined refined = zoom_theta(pairs_, gamma, lo, hi);
  out.refined_theta = refined.theta;
  out.refined_psi = std::asin(std::sqrt(refined.inner.sin2_psi));
  out.refined_delta = refined.inner.value;
  out.active_pairs = active_set(pairs_, refined.theta, refined.inner.sin2_psi, gamma);
  return out;
}

GridSearchResult GridSearcher::optimum(double gamma) const {
  if (!(gamma > 0.0 && gamma <= kQuarterPi + 1e-15))
    throw std::invalid_argument("gamma must lie in (0, pi/4]");
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const double c2 = cg * cg, s2 = sg * sg;
  std::vector<double> thetas, values;
  for (int t = 0; t < int(hulls_.size()); ++t) {
    thetas.push_back(grid_.at(t + 1));
    values.push_back(envelope_max(hulls_[t], c2, s2).value);
  }
  thetas.push_back(kQuarterPi);
  values.push_back(best_psi(pairs_, kQuarterPi, gamma).value);

  std::vector<int> peaks;
  const int n = int(values.size());
  for (int k = 0; k < n; ++k) {
    const bool left = k == 0 || values[k] >= values[k - 1];
    const bool right = k == n - 1 || values[k] >= values[k + 1];
    if (left && right) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int x, int y) { return values[x] > values[y]; });
  if (peaks.size() > 4) peaks.resize(4);

  Refined best{0.0, {-1.0, 0.0}};
  for (int k : peaks) {
    const double lo = k == 0 ? 1e-9 : thetas[k - 1];
    const double hi = k == n - 1 ? kQuarterPi : thetas[k + 1];
    const Refined r = zoom_theta(pairs_, gamma, lo, hi);
    const double tie = 1e-12 * std::max(r.inner.value, best.inner.value);
    if (r.inner.value > best.inner.value + tie ||
        (std::abs(r.inner.value - best.inner.value) <= tie && r.theta > best.theta))
      best = r;
  }
  GridSearchResult out;
  out.refined_theta = best.theta;
  out.refined_psi = std::asin(std::sqrt(best.inner.sin2_psi));
  out.refined_delta = best.inner.value;
  out.active_pairs = active_set(pairs_, best.theta, best.inner.sin2_psi, gamma);
  return out;
}

GridSearchResult grid_search(double gamma, int order, const SearchGrid& grid) {
  return GridSearcher(order, grid).search(gamma);
}

std::vector<double> theta_roots(DifferencePair first, DifferencePair second, DifferencePair third) {
  const auto e1 = difference(first, second);
  const auto e2 = difference(first, third);
  const double qa = e1.a * e2.d - e2.a * e1.d;
  const double qb = 2.0 * (e1.a * e2.b - e2.a * e1.b);
  const double qc = e1.a * e2.c - e2.a * e1.c;
  const double scale = std::max({std::abs(qa), std::abs(qb), std::abs(qc)});
  if (scale == 0.0) throw NumericalFailure("pair triple gives an identically satisfied condition");
  std::vector<double> tans;
  if (std::abs(qa) <= 1e-14 * scale) {
    tans.push_back(-qc / qb);
  } else {
    double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0 && disc > -1e-12 * scale * scale) disc = 0.0;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      const double q = -0.5 * (qb + (qb >= 0 ? root : -root));
      tans.push_back(q / qa);
      if (q != 0.0) tans.push_back(qc / q);
    }
  }
  std::vector<double> out;
  for (double t : tans)
    if (tan_in_range(t)) out.push_back(theta_from_tan(t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
            out.end());
  return out;
}

double solve_theta(DifferencePair first, DifferencePair second, DifferencePair third) {
  const auto roots = theta_roots(first, second, third);
  if (roots.empty()) throw NumericalFailure("no root of the pair triple in (0, pi/4]");
  if (roots.size() > 1) throw NumericalFailure("two roots in (0, pi/4]; a gamma is needed to choose");
  return roots.front();
}

double solve_theta(DifferencePair first, DifferencePair second, DifferencePair third, int order,
                   double gamma_mid) {
  const auto roots = theta_roots(first, second, third);
  if (roots.empty()) throw NumericalFailure("no root of the pair triple in (0, pi/4]");
  const DifferencePair triple[] = {first, second, third};
  double best_theta = std::numeric_limits<double>::quiet_NaN();
  double best_value = -1.0;
  for (double theta : roots) {
    double a;
    try {
      a = segment_A(triple, theta);
    } catch (const NumericalFailure&) {
      continue;
    }
    const double value = min_epsilon_at(order, theta, a, gamma_mid);
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }
  }
  if (std::isnan(best_theta)) throw NumericalFailure("no root of the pair triple gives A >= 0");
  return best_theta;
}

double solve_theta_first(DifferencePair first, DifferencePair second, int order, double gamma_mid) {
  std::vector<double> tans;
  if (first.q != second.q) tans.push_back(double(first.p - second.p) / (first.q - second.q));
  if (first.q + second.q != 0) tans.push_back(double(first.p + second.p) / (first.q + second.q));
  double best_theta = std::numeric_limits<double>::quiet_NaN();
  double best_value = -1.0;
  for (double t : tans) {
    if (!tan_in_range(t)) continue;
    const double theta = theta_from_tan(t);
    const double value = min_epsilon_at(order, theta, 0.0, gamma_mid);
    if (value > best_value) {
      best_value = value;
      best_theta = theta;
    }
  }
  if (std::isnan(best_theta)) throw NumericalFailure("no first-segment angle in (0, pi/4]");
  return best_theta;
}

namespace {

double a_denominator(DifferencePair first, DifferencePair second, double theta) {
  const auto e = difference(first, second);
  const double c = std::cos(theta), s = std::sin(theta);
  return e.b * 2.0 * s * c + e.c * c * c + e.d * s * s;
}

}  // namespace

double solve_A(DifferencePair first, DifferencePair second, double theta) {
  const double denom = a_denominator(first, second, theta);
  const double scale = std::max(1.0, double(norm2(first) + norm2(second)));
  if (std::abs(denom) <= 1e-12 * scale)
    throw NumericalFailure("pair combination is degenerate at this theta");
  return 1.0 + double(norm2(first) - norm2(second)) / denom;
}

double segment_A(std::span<const DifferencePair> pairs, double theta) {
  if (pairs.size() < 2) throw std::invalid_argument("segment_A needs at least two pairs");
  size_t bi = 0, bj = 1;
  double best = -1.0;
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = i + 1; j < pairs.size(); ++j) {
      const double d = std::abs(a_denominator(pairs[i], pairs[j], theta));
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  double a = solve_A(pairs[bi], pairs[bj], theta);
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = i + 1; j < pairs.size(); ++j) {
      if (std::abs(a_denominator(pairs[i], pairs[j], theta)) < 1e-6) continue;
      const double other = solve_A(pairs[i], pairs[j], theta);
      if (std::abs(other - a) > 1e-9 * std::max(1.0, std::abs(a)))
        throw NumericalFailure("active pairs disagree on A at this theta");
    }
  if (a < -1e-12) throw NumericalFailure("negative A: inconsistent pair triple");
  return std::max(a, 0.0);
}

double segment_psi(const PrecoderSegment& segment, double gamma) {
  if (segment.a == 0.0) return 0.0;
  return std::atan(std::sqrt(segment.a) / std::tan(gamma));
}

double segment_delta(const PrecoderSegment& segment, double gamma) {
  return epsilon(segment.active_pairs.front(), segment.theta_star, segment_psi(segment, gamma), gamma);
}

double solve_boundary(const PrecoderSegment& previous, const PrecoderSegment& next) {
  const auto wp = pair_weights(previous.active_pairs.front(), previous.theta_star);
  const auto wn = pair_weights(next.active_pairs.front(), next.theta_star);
  const double np = wp.along + previous.a * wp.across;
  const double nn = wn.along + next.a * wn.across;
  const double ratio = np / nn;
  if (std::abs(1.0 - ratio) < 1e-15)
    throw NumericalFailure("segments have proportional distance curves; no boundary");
  const double tan2 = (ratio * next.a - previous.a) / (1.0 - ratio);
  // sin^2 psi* of the next segment at the boundary must lie in [0, 1].
  const double sin2_psi = next.a == 0.0 ? 0.0 : next.a / (tan2 + next.a);
  if (!(tan2 >= 0.0) || !(sin2_psi >= 0.0 && sin2_psi <= 1.0))
    throw NumericalFailure("inconsistent segment data: no real boundary between segments " +
                           std::to_string(previous.k) + " and " + std::to_string(next.k));
  const double gamma = std::atan(std::sqrt(tan2));
  const double dp = segment_delta(previous, gamma), dn = segment_delta(next, gamma);
  if (std::abs(dp - dn) > 1e-8 * std::max(dp, dn))
    throw NumericalFailure("distance curves are discontinuous at the computed boundary");
  return gamma;
}

int PrecoderProfile::segment_index(double gamma) const {
  int index = 0;
  for (int k = 1; k < int(segments.size()); ++k)
    if (gamma >= segments[k].gamma_lo) index = k;
  return index;
}

ProfilePoint eval_profile(const PrecoderProfile& profile, double gamma) {
  if (!(gamma > 0.0 && gamma <= kQuarterPi + 1e-15))
    throw std::invalid_argument("gamma must lie in (0, pi/4]");
  if (profile.segments.empty()) throw std::invalid_argument("empty profile");
  ProfilePoint out;
  out.segment = profile.segment_index(gamma);
  const auto& segment = profile.segments[out.segment];
  out.theta_star = segment.theta_star;
  out.psi_star = segment_psi(segment, gamma);
  out.delta = segment_delta(segment, gamma);
  return out;
}

namespace {

struct Run {
  std::vector<DifferencePair> pairs;
  double first = 0.0;
  double last = 0.0;
  double theta = 0.0;  // refined theta at a representative sample
};

void sample_parallel(const GridSearcher& searcher, const std::vector<double>& gammas, int workers,
                     std::vector<GridSearchResult>& results) {
  results.assign(gammas.size(), {});
  workers = std::max(1, std::min<int>(workers, int(gammas.size())));
  auto job = [&](int w) {
    for (size_t k = w; k < gammas.size(); k += workers) results[k] = searcher.optimum(gammas[k]);
  };
  if (workers == 1) {
    job(0);
    return;
  }
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(job, w);
  for (auto& t : threads) t.join();
}

}  // namespace

PrecoderProfile build_profile(int order, const SearchGrid& grid, const ProfileOptions& options) {
  qam_side(order);
  const GridSearcher searcher(order, grid);

  // Phase 1: coarse sweep, then bisection wherever the active set changes.
  // Samples use the exact-psi optimum rather than the literal grid argmax: the
  // grid's psi quantization can rank near-equal angle families wrongly.
  std::vector<double> gammas;
  const int count = int(std::ceil(kQuarterPi / options.coarse_stride - 1e-9));
  for (int j = 1; j <= count; ++j) gammas.push_back(std::min(j * options.coarse_stride, kQuarterPi));
  std::vector<GridSearchResult> results;
  sample_parallel(searcher, gammas, options.workers, results);
  std::map<double, std::vector<DifferencePair>> samples;
  std::map<double, double> sample_theta;
  for (size_t k = 0; k < gammas.size(); ++k) {
    samples[gammas[k]] = results[k].active_pairs;
    sample_theta[gammas[k]] = results[k].refined_theta;
  }
  std::vector<std::pair<double, double>> pending;
  for (auto it = samples.begin(); std::next(it) != samples.end(); ++it)
    if (it->second != std::next(it)->second) pending.push_back({it->first, std::next(it)->first});
  while (!pending.empty()) {
    const auto [lo, hi] = pending.back();
    pending.pop_back();
    if (hi - lo < options.min_gap) continue;
    const double mid = 0.5 * (lo + hi);
    const auto r = searcher.optimum(mid);
    samples[mid] = r.active_pairs;
    sample_theta[mid] = r.refined_theta;
    if (r.active_pairs != samples[lo]) pending.push_back({lo, mid});
    if (r.active_pairs != samples[hi]) pending.push_back({mid, hi});
  }

  std::vector<Run> runs;
  for (const auto& [gamma, pairs] : samples) {
    if (!runs.empty() && runs.back().pairs == pairs) {
      runs.back().last = gamma;
      continue;
    }
    runs.push_back({pairs, gamma, gamma, sample_theta[gamma]});
  }
  // Samples landing exactly on a transition carry extra active pairs; drop them
  // and merge the neighbours they separated.
  std::vector<Run> kept;
  for (size_t k = 0; k < runs.size(); ++k) {
    const auto& run = runs[k];
    const bool first_segment = kept.empty() && run.pairs.size() == 2;
    if (!first_segment && run.pairs.size() != 3) continue;
    if (!kept.empty() && kept.back().pairs == run.pairs) {
      kept.back().last = run.last;
      continue;
    }
    kept.push_back(run);
  }
  if (kept.empty() || kept.front().pairs.size() != 2)
    throw NumericalFailure("no two-pair first segment found for order " + std::to_string(order));

  // Phase 2: closed forms per segment and exact boundaries.
  PrecoderProfile profile;
  profile.order = order;
  for (size_t k = 0; k < kept.size(); ++k) {
    const auto& run = kept[k];
    const double gamma_mid = 0.5 * (run.first + run.last);
    PrecoderSegment segment;
    segment.k = int(k) + 1;
    segment.active_pairs = run.pairs;
    try {
      if (k == 0) {
        segment.theta_star = solve_theta_first(run.pairs[0], run.pairs[1], order, gamma_mid);
        segment.a = 0.0;
      } else {
        segment.theta_star = solve_theta(run.pairs[0], run.pairs[1], run.pairs[2], order, gamma_mid);
        segment.a = segment_A(run.pairs, segment.theta_star);
      }
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(std::string(e.what()) + region(run.first, run.last));
    }
    if (std::abs(segment.theta_star - run.theta) > 1e-6)
      throw NumericalFailure("closed-form theta disagrees with the grid search" +
                             region(run.first, run.last));
    profile.segments.push_back(segment);
  }
  for (size_t k = 0; k < profile.segments.size(); ++k) {
    auto& segment = profile.segments[k];
    segment.gamma_lo = k == 0 ? 0.0 : profile.segments[k - 1].gamma_hi;
    if (k + 1 == profile.segments.size()) {
      segment.gamma_hi = kQuarterPi;
      continue;
    }
    double boundary;
    try {
      boundary = solve_boundary(segment, profile.segments[k + 1]);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(std::string(e.what()) + region(kept[k].last, kept[k + 1].first));
    }
    const double margin = options.coarse_stride;
    if (boundary < kept[k].last - margin || boundary > kept[k + 1].first + margin ||
        boundary <= segment.gamma_lo)
      throw NumericalFailure("segment boundary falls outside its bracketing samples" +
                             region(kept[k].last, kept[k + 1].first));
    segment.gamma_hi = boundary;
  }

  // No pair outside the active set may dip below the segment's distance.
  for (const auto& segment : profile.segments) {
    const double width = segment.gamma_hi - segment.gamma_lo;
    for (double f : {0.1, 0.5, 0.9}) {
      const double gamma = segment.gamma_lo + f * width;
      const double closed = segment_delta(segment, gamma);
      const double actual =
          min_epsilon(order, segment.theta_star, segment_psi(segment, gamma), gamma);
      if (actual < closed * (1.0 - 1e-9))
        throw NumericalFailure("a non-active pair undercuts the closed-form distance" +
                               region(segment.gamma_lo, segment.gamma_hi));
    }
  }
  return profile;
}

}  // namespace mimo_precode
