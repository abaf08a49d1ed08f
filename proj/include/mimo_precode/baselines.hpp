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
#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mimo_precode {

enum class PrecoderKind { proposed, edmin, x, y, lattice };

std::string to_string(PrecoderKind kind);
// Throws std::invalid_argument for unknown names.
PrecoderKind parse_precoder_kind(std::string_view name);

// 2x2 block of the X-structure for one subchannel pair.
struct PairMatrix {
  Eigen::Matrix2cd entries = Eigen::Matrix2cd::Zero();
  double tau = 1.0;
  PrecoderKind kind = PrecoderKind::proposed;
};

// ---- E-dmin (4-QAM only) ------------------------------------------------

// Threshold below which the rank-one block is optimal (about 0.3016).
double edmin_gamma0();
// psi_i = arctan((sqrt 2 - 1) / tan gamma_i) for gamma_i >= gamma0: the angle at
// which the two-matrix block attains edmin_delta. The variant with cos gamma_i
// in the denominator falls short of it everywhere below pi/4.
double edmin_psi(double gamma);
// The piecewise distance used for E-dmin power control, in its reference form:
// it counts full-difference vectors with a factor-2 scale of its own.
double edmin_delta_reference(double gamma);
// Same distance on the half-difference scale used everywhere else (reference / 2).
double edmin_delta(double gamma);

// Block i (zero-based pair index) with power factor from all pairs' (gamma, rho).
PairMatrix edmin_pair(std::span<const double> gammas, std::span<const double> rhos, int i, int n_t,
                      int n_min, int order = 4);

// ---- X-precoder ---------------------------------------------------------

// 4-QAM closed-form angle, clamped into (0, pi/4]. The formula exceeds pi/4
// for gamma >= pi/6 and has a negative radicand from about 0.5536 on; both
// regions use pi/4, the value a direct search returns there.
double x_theta_closed_form(double gamma);

struct XLookup {
  int order = 0;
  double gamma_step = 0.001;
  std::vector<double> thetas;  // entry k - 1 holds the angle for gamma = k * gamma_step

  // Nearest-gamma entry, O(1).
  double theta_at(double gamma) const;
};

// Per-gamma search of the angle maximizing min-epsilon with psi fixed to pi/4.
XLookup build_x_lookup(int order, double gamma_step = 0.001, int workers = 1);
std::string x_lookup_to_json(const XLookup& lookup);
XLookup x_lookup_from_json(const std::string& text);

// Closed form for 4-QAM when no lookup is given; throws UnsupportedError for
// larger orders without a matching lookup.
double x_theta(double gamma, int order, const XLookup* lookup);
PairMatrix x_pair(double gamma, int order, int n_t, int n_min, const XLookup* lookup);

// ---- Y-precoder ---------------------------------------------------------

struct YEffective {
  double a = 0.0;  // gain on the strong subchannel
  double b = 0.0;  // gain on the weak subchannel
  std::vector<std::array<int, 2>> codebook;
};

// z_l = (2l - M - 1, (-1)^l), l = 1..M, stored at index l - 1.
std::vector<std::array<int, 2>> y_codebook(int order);
// Effective diagonal gains with beta = sigma_i / sigma_partner. `n_r` enters
// only through the power normalization n_t / n_r.
YEffective y_effective(double sigma_i, double sigma_partner, int order, int n_t, int n_r);

// ---- Lattice precoder ---------------------------------------------------

struct LatticeGenerator {
  int dim = 0;
  Eigen::MatrixXd g;
  std::string source;
};

// Rotation by 0.5 * arctan(2).
LatticeGenerator lattice_generator_2d();
// Parses {dim, rows, source}; validates before returning.
LatticeGenerator parse_lattice_generator(const std::string& json_text);
// Throws DataError unless G^T G = I within 1e-10 and the coordinate product of
// G * d is nonzero for every nonzero d in {-2, 0, 2}^dim.
void validate_lattice(const LatticeGenerator& generator);
// Minimum |product of coordinates of G d| over nonzero d in {-2, 0, 2}^dim.
double min_product_distance(const LatticeGenerator& generator);

// Directory of generator files named rotation_<dim>.json.
class LatticeStore {
 public:
  explicit LatticeStore(std::filesystem::path directory);
  // MIMO_PRECODE_DATA if set, otherwise the bundled data directory.
  static LatticeStore from_environment();

  const std::filesystem::path& directory() const { return directory_; }
  // Throws DataError when the file is missing or invalid.
  LatticeGenerator load(int dim) const;

 private:
  std::filesystem::path directory_;
};

LatticeGenerator lattice_precoder(int n_min, const LatticeStore& store);

}  // namespace mimo_precode
