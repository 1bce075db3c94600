/*
 * Copyright 2026 The polexam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "polexam/policy/policy.hpp"

#include <string>

#include "polexam/error.hpp"

namespace polexam::policy {

PolicySpaces PolicySpaces::of(const pomdp::PomdpModel& model) {
  return {model.num_states(), model.num_defender_actions(),
          model.metric_bins()};
}

std::vector<double> features(const PolicySpaces& spaces,
                             const PolicyInput& input) {
  std::vector<double> x;
  x.reserve(spaces.feature_count());
  x.insert(x.end(), input.belief.probs.begin(), input.belief.probs.end());
  for (std::size_t m = 0; m < spaces.metric_bins.size(); ++m) {
    x.push_back(static_cast<double>(input.last_observation.bins[m]) /
                static_cast<double>(spaces.metric_bins[m] - 1));
  }
  x.push_back(input.t_normalized);
  return x;
}

void check_input(const PolicySpaces& spaces, const PolicyInput& input) {
  if (input.belief.probs.size() != spaces.num_states) {
    throw Error(ErrorCode::kIncompatible,
                "belief has " + std::to_string(input.belief.probs.size()) +
                    " entries, policy expects " +
                    std::to_string(spaces.num_states));
  }
  if (input.last_observation.bins.size() != spaces.metric_bins.size()) {
    throw Error(ErrorCode::kIncompatible,
                "observation has " +
                    std::to_string(input.last_observation.bins.size()) +
                    " metrics, policy expects " +
                    std::to_string(spaces.metric_bins.size()));
  }
  for (std::size_t m = 0; m < spaces.metric_bins.size(); ++m) {
    if (input.last_observation.bins[m] >= spaces.metric_bins[m]) {
      throw Error(ErrorCode::kIncompatible,
                  "observation bin out of range for metric " +
                      std::to_string(m));
    }
  }
  if (!(input.t_normalized >= 0.0 && input.t_normalized <= 1.0)) {
    throw Error(ErrorCode::kIncompatible, "t_normalized must be in [0,1]");
  }
}

std::string_view policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kThreshold: return "threshold";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kConstant: return "constant";
    case PolicyKind::kNetwork: return "network";
  }
  return "unknown";
}

void check_compatible(const pomdp::PomdpModel& model, const Policy& policy) {
  if (PolicySpaces::of(model) != policy.spaces()) {
    throw Error(ErrorCode::kIncompatible,
                "policy spaces do not match model '" + model.name + "'");
  }
}

}  // namespace polexam::policy
