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

#include "mimo_precode/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mimo_precode/decoder.hpp"
#include "mimo_precode/errors.hpp"
#include "mimo_precode/rng.hpp"

namespace mimo_precode {

namespace {

constexpr double kZ95 = 1.959963984540054;

// Runs body(worker, trial) for trial in [0, trials) on up to `workers` threads
// with a static interleaved partition. The first exception is rethrown.
template <class Body>
void parallel_trials(long trials, int workers, Body&& body) {
  const int w = int(std::clamp<long>(workers, 1, std::max<long>(1, trials)));
  if (w == 1) {
    for (long t = 0; t < trials; ++t) body(0, t);
    return;
  }
  std::exception_ptr failure;
  std::mutex mutex;
  std::vector<std::thread> pool;
  for (int k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      try {
        for (long t = k; t < trials; t += w) body(k, t);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Loads the lattice generator once instead of once per trial; `storage` must
// outlive the returned tables.
PrecoderTables resolve_tables(const PrecoderTables& tables, PrecoderKind kind, int n_min,
                              LatticeGenerator& storage) {
  PrecoderTables out = tables;
  if (kind == PrecoderKind::lattice && n_min > 2 && tables.lattice == nullptr) {
    storage = lattice_precoder(n_min, LatticeStore::from_environment());
    out.lattice = &storage;
  }
  return out;
}

int worker_count(int hint, long trials) {
  return int(std::clamp<long>(hint, 1, std::max<long>(1, trials)));
}

std::vector<int> draw_symbols(RandomStream& rng, int n, int order) {
  std::vector<int> symbols(n);
  for (auto& s : symbols) s = rng.uniform_int(order);
  return symbols;
}

Eigen::VectorXcd draw_noise(RandomStream& rng, int n_r) {
  Eigen::VectorXcd noise(n_r);
  for (int i = 0; i < n_r; ++i) noise[i] = rng.complex_normal(0.5);
  return noise;
}

// Transmit through H and decode. Returns true on a word error.
bool transmit_and_decode(const ChannelRealization& channel, const ChannelDecomposition& decomposition,
                         const AssembledPrecoder& precoder, const Eigen::VectorXcd& x_precoded,
                         const std::vector<int>& symbols, const Eigen::VectorXcd& noise,
                         double snr_linear) {
  const Eigen::VectorXcd y =
      std::sqrt(snr_linear / channel.n_t()) * (channel.h * x_precoded) + noise;
  const auto word = receive(y, decomposition, snr_linear);
  return decode_word(word, decomposition, precoder).symbols != symbols;
}

Eigen::VectorXcd precode(const ChannelDecomposition& decomposition, const AssembledPrecoder& precoder,
                         const std::vector<int>& symbols) {
  return decomposition.v * (precoder.p * precoder.symbol_scales.asDiagonal() *
                            modulate(precoder, symbols));
}

}  // namespace

double binomial_halfwidth(long errors, long trials) {
  if (trials <= 0) return 0.0;
  const double n = double(trials);
  const double p = errors / n;
  if (errors >= 30) return kZ95 * std::sqrt(p * (1 - p) / n);
  const double z2 = kZ95 * kZ95;
  return kZ95 / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
}

std::vector<WepPoint> run_wep(const SimConfig& config) {
  if (config.trials_per_point < 1) throw std::invalid_argument("trials_per_point must be >= 1");
  if (config.snr_grid_db.empty()) throw std::invalid_argument("empty SNR grid");
  for (std::size_t i = 1; i < config.snr_grid_db.size(); ++i)
    if (!(config.snr_grid_db[i] > config.snr_grid_db[i - 1]))
      throw std::invalid_argument("SNR grid must be strictly increasing");
  const int n_min = std::min(config.n_t, config.n_r);
  if (n_min % 2 != 0) throw UnsupportedError("odd n_min is not supported");

  LatticeGenerator lattice;
  const auto tables = resolve_tables(config.tables, config.kind, n_min, lattice);
  // Fail early on unsupported combinations with a well-conditioned channel.
  {
    std::vector<double> probe(n_min, 1.0);
    for (int i = 0; i < n_min; ++i) probe[i] = 2.0 - double(i) / n_min;
    assemble(probe, config.n_t, config.kind, config.order, tables);
  }

  const std::size_t points = config.snr_grid_db.size();
  std::vector<double> snr(points);
  for (std::size_t i = 0; i < points; ++i) snr[i] = std::pow(10.0, config.snr_grid_db[i] / 10);

  const int w = worker_count(config.workers, config.trials_per_point);
  std::vector<std::vector<long>> errors(w, std::vector<long>(points, 0));
  parallel_trials(config.trials_per_point, w, [&](int worker, long t) {
    auto rng = derive_stream(config.seed, std::uint64_t(t));
    const auto channel = sample_rayleigh(config.n_r, config.n_t, rng);
    const auto symbols = draw_symbols(rng, n_min, config.order);
    const auto noise = draw_noise(rng, config.n_r);
    const auto decomposition = decompose(channel);
    AssembledPrecoder precoder;
    try {
      precoder = assemble(decomposition, config.kind, config.order, tables);
    } catch (const DegenerateChannel&) {
      // Probability zero for Rayleigh draws; counted as an error at every SNR.
      for (auto& e : errors[worker]) ++e;
      return;
    }
    const auto x = precode(decomposition, precoder, symbols);
    for (std::size_t i = 0; i < points; ++i)
      if (transmit_and_decode(channel, decomposition, precoder, x, symbols, noise, snr[i]))
        ++errors[worker][i];
  });

  std::vector<WepPoint> curve(points);
  for (std::size_t i = 0; i < points; ++i) {
    long total = 0;
    for (const auto& e : errors) total += e[i];
    auto& point = curve[i];
    point.snr_db = config.snr_grid_db[i];
    point.trials = config.trials_per_point;
    point.word_errors = total;
    point.wep = double(total) / point.trials;
    point.ci_halfwidth = binomial_halfwidth(total, point.trials);
  }
  return curve;
}

FixedChannelResult run_fixed_channel(const ChannelRealization& channel, PrecoderKind kind, int order,
                                     double snr_linear, long trials, std::uint64_t seed,
                                     const PrecoderTables& tables, int workers) {
  const auto decomposition = decompose(channel);
  LatticeGenerator lattice;
  const auto precoder = assemble(decomposition, kind, order,
                                 resolve_tables(tables, kind, decomposition.n_min(), lattice));
  const int w = worker_count(workers, trials);
  std::vector<long> errors(w, 0);
  parallel_trials(trials, w, [&](int worker, long t) {
    auto rng = derive_stream(seed, std::uint64_t(t));
    const auto symbols = draw_symbols(rng, decomposition.n_min(), order);
    const auto noise = draw_noise(rng, channel.n_r());
    const auto x = precode(decomposition, precoder, symbols);
    if (transmit_and_decode(channel, decomposition, precoder, x, symbols, noise, snr_linear))
      ++errors[worker];
  });
  FixedChannelResult out;
  out.trials = trials;
  for (long e : errors) out.word_errors += e;
  return out;
}

ZetaStats run_zeta_stats(int n_t, int n_r, const PrecoderProfile& profile, long trials,
                         std::uint64_t seed, int workers) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (std::min(n_t, n_r) % 2 != 0) throw UnsupportedError("odd n_min is not supported");
  const int w = worker_count(workers, trials);
  std::vector<double> minima(w, std::numeric_limits<double>::infinity());
  std::vector<long> below(w, 0);
  parallel_trials(trials, w, [&](int worker, long t) {
    auto rng = derive_stream(seed, std::uint64_t(t));
    const auto channel = sample_rayleigh(n_r, n_t, rng);
    const double z = zeta(singular_values(channel.h), profile);
    minima[worker] = std::min(minima[worker], z);
    if (z < 1.0) ++below[worker];
  });
  ZetaStats out;
  out.trials = trials;
  out.zeta_min = *std::min_element(minima.begin(), minima.end());
  long total = 0;
  for (long b : below) total += b;
  out.p_zeta = double(total) / trials;
  return out;
}

std::vector<NoSearchPoint> run_nosearch(int n_t, int n_r, const PrecoderProfile& profile, long trials,
                                        std::uint64_t seed, int workers) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int n_min = std::min(n_t, n_r);
  if (n_min % 2 != 0) throw UnsupportedError("odd n_min is not supported");
  const double limit = std::tan(profile.first_boundary());
  const int pairs = n_min / 2;
  const int w = worker_count(workers, trials);
  std::vector<std::vector<long>> hits(w, std::vector<long>(pairs, 0));
  parallel_trials(trials, w, [&](int worker, long t) {
    auto rng = derive_stream(seed, std::uint64_t(t));
    const auto channel = sample_rayleigh(n_r, n_t, rng);
    const auto sigmas = singular_values(channel.h);
    for (int i = 0; i < pairs; ++i)
      if (sigmas[n_min - 1 - i] <= limit * sigmas[i]) ++hits[worker][i];
  });
  std::vector<NoSearchPoint> out(pairs);
  for (int i = 0; i < pairs; ++i) {
    long total = 0;
    for (const auto& h : hits) total += h[i];
    out[i] = {i + 1, double(total) / trials, trials};
  }
  return out;
}

double estimate_slope(std::span<const WepPoint> curve, long min_errors) {
  std::vector<double> xs, ys;
  for (const auto& point : curve)
    if (point.word_errors >= min_errors && point.wep > 0) {
      xs.push_back(point.snr_db / 10);
      ys.push_back(std::log10(point.wep));
    }
  if (xs.size() < 2) throw std::invalid_argument("slope needs two points with enough errors");
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0)) throw std::invalid_argument("slope needs two distinct SNR values");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace mimo_precode
