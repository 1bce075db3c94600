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

#include "polexam/pomdp/environment.hpp"

#include <string>

#include "polexam/error.hpp"

namespace polexam::pomdp {

StepOutcome environment_step(const PomdpModel& model, StateId state,
                             ActionId defender_action, Rng& rng) {
  if (state >= model.num_states()) {
    throw Error(ErrorCode::kIndex, "state id " + std::to_string(state) +
                                       " out of range");
  }
  if (defender_action >= model.num_defender_actions()) {
    throw Error(ErrorCode::kIndex, "defender action id " +
                                       std::to_string(defender_action) +
                                       " out of range");
  }
  if (model.is_terminal(state)) {
    throw Error(ErrorCode::kTerminalState,
                "cannot step from terminal state " + model.state_names[state]);
  }

  StepOutcome out;
  out.next_state = rng.categorical(model.transition[state][defender_action]);
  out.attacker_action = rng.categorical(model.attacker_behavior[out.next_state]);
  const auto& rows = model.observation[out.next_state][out.attacker_action];
  out.observation.bins.reserve(model.num_metrics());
  for (std::size_t m = 0; m < model.num_metrics(); ++m) {
    out.observation.bins.push_back(rng.categorical(rows[m]));
  }
  out.reward = model.reward[state][defender_action];
  return out;
}

StateId sample_initial_state(const PomdpModel& model, Rng& rng) {
  return rng.categorical(model.initial_distribution);
}

}  // namespace polexam::pomdp
