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

#include <json.hpp>
#include <stdexcept>

#include "mimo_precode/optimizer.hpp"

namespace mimo_precode {

using nlohmann::json;

// nlohmann::json prints doubles with the shortest representation that
// round-trips exactly, so the document is lossless.
std::string profile_to_json(const PrecoderProfile& profile) {
  json doc;
  doc["order"] = profile.order;
  doc["segments"] = json::array();
  for (const auto& segment : profile.segments) {
    json pairs = json::array();
    for (const auto& pq : segment.active_pairs) pairs.push_back({pq.p, pq.q});
    doc["segments"].push_back({{"gamma_lo", segment.gamma_lo},
                               {"gamma_hi", segment.gamma_hi},
                               {"theta_star", segment.theta_star},
                               {"A", segment.a},
                               {"pairs", pairs}});
  }
  return doc.dump(2) + "\n";
}

PrecoderProfile profile_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    PrecoderProfile profile;
    profile.order = doc.at("order").get<int>();
    int k = 1;
    for (const auto& item : doc.at("segments")) {
      PrecoderSegment segment;
      segment.k = k++;
      segment.gamma_lo = item.at("gamma_lo").get<double>();
      segment.gamma_hi = item.at("gamma_hi").get<double>();
      segment.theta_star = item.at("theta_star").get<double>();
      segment.a = item.at("A").get<double>();
      for (const auto& pq : item.at("pairs"))
        segment.active_pairs.push_back({pq.at(0).get<int>(), pq.at(1).get<int>()});
      if (segment.active_pairs.empty()) throw std::invalid_argument("segment without pairs");
      profile.segments.push_back(std::move(segment));
    }
    if (profile.segments.empty()) throw std::invalid_argument("profile without segments");
    return profile;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed profile JSON: ") + e.what());
  }
}

}  // namespace mimo_precode
