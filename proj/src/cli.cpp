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

#include "mimo_precode/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mimo_precode/baselines.hpp"
#include "mimo_precode/constellation.hpp"
#include "mimo_precode/errors.hpp"
#include "mimo_precode/optimizer.hpp"
#include "mimo_precode/simulator.hpp"
#include "mimo_precode/system.hpp"

#ifndef MIMO_PRECODE_VERSION
#define MIMO_PRECODE_VERSION "0.0.0"
#endif

namespace mimo_precode {

namespace {

using nlohmann::json;

// Raised for argument values CLI11 accepts but the command cannot use.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string lossless(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out << content;
  if (!out) throw UsageError("write failed for " + path);
}

void require_order(int order) {
  if (!is_supported_order(order))
    throw UsageError("--order must be a power of 4 (4, 16, 64, ...), got " + std::to_string(order));
}

int default_workers() { return int(std::max(1u, std::thread::hardware_concurrency())); }

// Options shared by every subcommand; each parsed value is also recorded so
// the manifest can replay the run.
struct Options {
  int order = 4;
  double step = 0.001;
  std::string precoder = "proposed";
  int points = 200;
  bool scale4 = false;
  int n_t = 2;
  int n_r = 0;  // 0: same as n_t
  std::string snr_db;
  long trials = 100000;
  std::uint64_t seed = 1;
  std::string profile_path;
  std::string lookup_path;
  std::string manifest_path;
  std::string out;
  int workers = 0;
};

struct Run {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;  // flag -> value, replayable
  std::optional<std::uint64_t> seed;
};

PrecoderProfile load_or_build_profile(const Options& o, int workers) {
  if (!o.profile_path.empty()) {
    auto profile = profile_from_json(read_file(o.profile_path));
    if (profile.order != o.order) throw UsageError("--profile was built for a different order");
    return profile;
  }
  ProfileOptions options;
  options.workers = workers;
  return build_profile(o.order, SearchGrid{o.step}, options);
}

std::optional<XLookup> load_or_build_lookup(const Options& o, int workers) {
  if (!o.lookup_path.empty()) {
    auto lookup = x_lookup_from_json(read_file(o.lookup_path));
    if (lookup.order != o.order) throw UsageError("--x-lookup was built for a different order");
    return lookup;
  }
  if (o.order == 4) return std::nullopt;
  return build_x_lookup(o.order, o.step, workers);
}

std::string profile_summary(const PrecoderProfile& profile) {
  std::string text;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-24s %-10s %-16s %s\n", "k", "gamma range", "theta*",
                "tan(g)tan(psi*)", "active pairs");
  text += line;
  for (const auto& s : profile.segments) {
    std::string pairs;
    for (const auto& pq : s.active_pairs)
      pairs += "(" + std::to_string(pq.p) + "," + std::to_string(pq.q) + ") ";
    char range[64];
    std::snprintf(range, sizeof range, "[%.4f, %.4f]", s.gamma_lo, s.gamma_hi);
    std::snprintf(line, sizeof line, "%-4d %-24s %-10.4f %-16.4f %s\n", s.k, range, s.theta_star,
                  std::sqrt(s.a), pairs.c_str());
    text += line;
  }
  return text;
}

// Each command returns the file content; stdout summaries go to `out`.
std::string cmd_profile(const Options& o, int workers, std::ostream& out) {
  const auto profile = load_or_build_profile(o, workers);
  out << profile_summary(profile);
  return profile_to_json(profile);
}

std::string cmd_x_lookup(const Options& o, int workers) {
  return x_lookup_to_json(build_x_lookup(o.order, o.step, workers));
}

std::string cmd_delta_curve(const Options& o, int workers) {
  const auto kind = parse_precoder_kind(o.precoder);
  if (kind == PrecoderKind::edmin && o.order != 4)
    throw UnsupportedError("the E-dmin precoder exists only for 4-QAM");
  if (o.points < 1) throw UsageError("--points must be >= 1");
  std::optional<PrecoderProfile> profile;
  std::optional<XLookup> lookup;
  if (kind == PrecoderKind::proposed) profile = load_or_build_profile(o, workers);
  if (kind == PrecoderKind::x) lookup = load_or_build_lookup(o, workers);
  PrecoderTables tables;
  if (profile) tables.profile = &*profile;
  if (lookup) tables.x_lookup = &*lookup;
  std::string csv = "gamma,delta\n";
  for (int j = 1; j <= o.points; ++j) {
    const double gamma = j * (std::numbers::pi / 4) / o.points;
    double delta = pair_delta(kind, gamma, o.order, tables);
    if (o.scale4) delta *= 4;
    csv += format_number(gamma) + "," + format_number(delta) + "\n";
  }
  return csv;
}

std::string cmd_wep(const Options& o, int workers) {
  SimConfig config;
  config.n_t = o.n_t;
  config.n_r = o.n_r > 0 ? o.n_r : o.n_t;
  config.order = o.order;
  config.kind = parse_precoder_kind(o.precoder);
  config.snr_grid_db = parse_snr_grid(o.snr_db);
  config.trials_per_point = o.trials;
  config.seed = o.seed;
  config.workers = workers;
  if (config.kind == PrecoderKind::edmin && o.order != 4)
    throw UnsupportedError("the E-dmin precoder exists only for 4-QAM");
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  std::optional<PrecoderProfile> profile;
  std::optional<XLookup> lookup;
  if (config.kind == PrecoderKind::proposed) profile = load_or_build_profile(o, workers);
  if (config.kind == PrecoderKind::x) lookup = load_or_build_lookup(o, workers);
  if (profile) config.tables.profile = &*profile;
  if (lookup) config.tables.x_lookup = &*lookup;
  std::string csv = "snr_db,trials,word_errors,wep,ci_halfwidth\n";
  for (const auto& p : run_wep(config))
    csv += format_number(p.snr_db) + "," + std::to_string(p.trials) + "," +
           std::to_string(p.word_errors) + "," + format_number(p.wep) + "," +
           format_number(p.ci_halfwidth) + "\n";
  return csv;
}

std::string cmd_zeta(const Options& o, int workers) {
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  const auto profile = load_or_build_profile(o, workers);
  const auto stats =
      run_zeta_stats(o.n_t, o.n_r > 0 ? o.n_r : o.n_t, profile, o.trials, o.seed, workers);
  return "zeta_min,p_zeta,trials\n" + format_number(stats.zeta_min) + "," +
         format_number(stats.p_zeta) + "," + std::to_string(stats.trials) + "\n";
}

std::string cmd_nosearch(const Options& o, int workers) {
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  const auto profile = load_or_build_profile(o, workers);
  std::string csv = "pair_index,probability,trials\n";
  for (const auto& p :
       run_nosearch(o.n_t, o.n_r > 0 ? o.n_r : o.n_t, profile, o.trials, o.seed, workers))
    csv += std::to_string(p.pair_index) + "," + format_number(p.probability) + "," +
           std::to_string(p.trials) + "\n";
  return csv;
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  json manifest;
  try {
    manifest = json::parse(read_file(o.manifest_path));
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed manifest: ") + e.what());
  }
  std::vector<std::string> args;
  try {
    args = manifest.at("argv").get<std::vector<std::string>>();
    if (args.empty() || args.front() == "replay") throw UsageError("manifest has no command");
    args.push_back("--out");
    args.push_back(o.out.empty() ? manifest.at("outputs").at(0).get<std::string>() : o.out);
  } catch (const json::exception& e) {
    throw UsageError(std::string("incomplete manifest: ") + e.what());
  }
  if (o.workers > 0) args.insert(args.end(), {"--workers", std::to_string(o.workers)});
  return run_impl(args, out, err);
}

void write_manifest(const Run& run, const std::string& output, const std::string& start) {
  json params = json::object();
  std::vector<std::string> argv{run.command};
  for (const auto& [flag, value] : run.params) {
    params[flag.substr(2)] = value;
    argv.push_back(flag);
    if (!value.empty()) argv.push_back(value);
  }
  json manifest{{"command", run.command},
                {"parameters", params},
                {"argv", argv},
                {"tool_version", MIMO_PRECODE_VERSION},
                {"start_time", start},
                {"end_time", utc_now()},
                {"outputs", {output}}};
  manifest["seed"] = run.seed ? json(*run.seed) : json(nullptr);
  write_file(output + ".manifest.json", manifest.dump(2) + "\n");
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Real-valued SVD precoding and fast ML decoding for MIMO QAM", "mimo_precode"};
  app.set_version_flag("--version", MIMO_PRECODE_VERSION);
  app.require_subcommand(1);
  Options o;

  const auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (a manifest is written next to it)")->required();
    sub->add_option("--workers", o.workers, "Worker threads (hint; results do not depend on it)");
  };
  const auto add_order = [&](CLI::App* sub) {
    sub->add_option("--order", o.order, "QAM order M")->required();
  };
  const auto add_profile = [&](CLI::App* sub) {
    sub->add_option("--profile", o.profile_path, "Profile JSON from `profile` (else built)");
    sub->add_option("--step", o.step, "Angle grid step");
  };
  const auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--nt", o.n_t, "Transmit antennas")->required();
    sub->add_option("--nr", o.n_r, "Receive antennas (default: --nt)");
    sub->add_option("--trials", o.trials, "Monte Carlo trials");
    sub->add_option("--seed", o.seed, "Master seed");
  };

  auto* profile = app.add_subcommand("profile", "Build the piecewise precoder profile");
  add_order(profile);
  profile->add_option("--step", o.step, "Angle grid step");
  add_out(profile);

  auto* lookup = app.add_subcommand("x-lookup", "Build the X-precoder angle lookup table");
  add_order(lookup);
  lookup->add_option("--step", o.step, "Gamma step");
  add_out(lookup);

  auto* delta = app.add_subcommand("delta-curve", "Per-pair distance against gamma");
  add_order(delta);
  delta->add_option("--precoder", o.precoder, "proposed, edmin, x, y or lattice")->required();
  delta->add_option("--points", o.points, "Number of gamma samples in (0, pi/4]")->required();
  delta->add_flag("--scale4", o.scale4, "Report 4x the half-difference distance");
  delta->add_option("--x-lookup", o.lookup_path, "X lookup JSON (orders above 4)");
  add_profile(delta);
  add_out(delta);

  auto* wep = app.add_subcommand("wep", "Word error probability against SNR");
  add_order(wep);
  add_sim(wep);
  wep->add_option("--precoder", o.precoder, "proposed, edmin, x, y or lattice")->required();
  wep->add_option("--snr-db", o.snr_db, "SNR grid start:step:stop (dB, inclusive)")->required();
  wep->add_option("--x-lookup", o.lookup_path, "X lookup JSON (orders above 4)");
  add_profile(wep);
  add_out(wep);

  auto* zeta_cmd = app.add_subcommand("zeta", "Statistics of zeta over channel draws");
  add_order(zeta_cmd);
  add_sim(zeta_cmd);
  add_profile(zeta_cmd);
  add_out(zeta_cmd);

  auto* nosearch = app.add_subcommand("nosearch", "Probability that a pair decodes without search");
  add_order(nosearch);
  add_sim(nosearch);
  add_profile(nosearch);
  add_out(nosearch);

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("--manifest", o.manifest_path, "Manifest JSON")->required();
  replay->add_option("--out", o.out, "Output file (default: the recorded one)");
  replay->add_option("--workers", o.workers, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (replay->parsed()) return cmd_replay(o, out, err);

    const int workers = o.workers > 0 ? o.workers : default_workers();
    const std::string start = utc_now();
    require_order(o.order);
    Run run;
    run.params.emplace_back("--order", std::to_string(o.order));
    std::string content;
    if (profile->parsed()) {
      run.command = "profile";
      run.params.emplace_back("--step", lossless(o.step));
      content = cmd_profile(o, workers, out);
    } else if (lookup->parsed()) {
      run.command = "x-lookup";
      run.params.emplace_back("--step", lossless(o.step));
      content = cmd_x_lookup(o, workers);
    } else {
      const bool is_delta = delta->parsed();
      run.command = is_delta ? "delta-curve" : wep->parsed() ? "wep"
                                             : zeta_cmd->parsed() ? "zeta"
                                                                  : "nosearch";
      if (!o.profile_path.empty()) run.params.emplace_back("--profile", o.profile_path);
      run.params.emplace_back("--step", lossless(o.step));
      if (is_delta || wep->parsed()) {
        run.params.emplace_back("--precoder", o.precoder);
        if (!o.lookup_path.empty()) run.params.emplace_back("--x-lookup", o.lookup_path);
      }
      if (is_delta) {
        run.params.emplace_back("--points", std::to_string(o.points));
        if (o.scale4) run.params.emplace_back("--scale4", "");
        content = cmd_delta_curve(o, workers);
      } else {
        const int n_r = o.n_r > 0 ? o.n_r : o.n_t;
        if (o.n_t < 1 || n_r < 1) throw UsageError("--nt and --nr must be positive");
        run.params.emplace_back("--nt", std::to_string(o.n_t));
        run.params.emplace_back("--nr", std::to_string(n_r));
        run.params.emplace_back("--trials", std::to_string(o.trials));
        run.params.emplace_back("--seed", std::to_string(o.seed));
        run.seed = o.seed;
        if (wep->parsed()) {
          run.params.emplace_back("--snr-db", o.snr_db);
          content = cmd_wep(o, workers);
        } else if (zeta_cmd->parsed()) {
          content = cmd_zeta(o, workers);
        } else {
          content = cmd_nosearch(o, workers);
        }
      }
    }
    write_file(o.out, content);
    write_manifest(run, o.out, start);
    return kExitOk;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

std::vector<double> parse_snr_grid(std::string_view text) {
  const auto number = [](std::string_view s) {
    const std::string copy(s);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(copy, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number in SNR grid: '" + copy + "'");
    }
    if (used != copy.size() || !std::isfinite(v))
      throw std::invalid_argument("bad number in SNR grid: '" + copy + "'");
    return v;
  };
  std::vector<double> grid;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos)
      throw std::invalid_argument("SNR grid must be start:step:stop");
    const double start = number(text.substr(0, a));
    const double step = number(text.substr(a + 1, b - a - 1));
    const double stop = number(text.substr(b + 1));
    if (!(step > 0) || stop < start) throw std::invalid_argument("SNR grid needs step > 0, stop >= start");
    const long count = long(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) grid.push_back(start + k * step);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto end = comma == std::string_view::npos ? text.size() : comma;
      grid.push_back(number(text.substr(pos, end - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("SNR grid must be strictly increasing");
  return grid;
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_impl(args, out, err);
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_impl(args, std::cout, std::cerr);
}

}  // namespace mimo_precode
