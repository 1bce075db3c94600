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

#ifndef POLEXAM_POMDP_ENVIRONMENT_HPP_
#define POLEXAM_POMDP_ENVIRONMENT_HPP_

#include "polexam/pomdp/model.hpp"
#include "polexam/rng.hpp"

namespace polexam::pomdp {

struct StepOutcome {
  StateId next_state = 0;
  AttackerActionId attacker_action = 0;
  Observation observation;
  double reward = 0.0;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/**
 * Advances the hidden process by one step.
 *
 * Draw order (one uniform each): successor state from T[state][action],
 * attacker action from P_att[successor], then one bin per metric from
 * Z[successor][attacker action][m] in metric declaration order. The reward
 * is R[state][action].
 */
StepOutcome environment_step(const PomdpModel& model, StateId state,
                             ActionId defender_action, Rng& rng);

/// Initial hidden state drawn from rho_1 (one uniform).
StateId sample_initial_state(const PomdpModel& model, Rng& rng);

}  // namespace polexam::pomdp

#endif  // POLEXAM_POMDP_ENVIRONMENT_HPP_
