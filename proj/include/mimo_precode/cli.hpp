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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mimo_precode {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUnsupported = 4;

// `start:step:stop` (inclusive), a comma-separated list, or one value.
// Throws std::invalid_argument on malformed or non-increasing grids.
std::vector<double> parse_snr_grid(std::string_view text);

// Locale-independent "%.10g".
std::string format_number(double value);

// Subcommands: profile, x-lookup, delta-curve, wep, zeta, nosearch, replay.
// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace mimo_precode
