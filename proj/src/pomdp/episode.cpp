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

#include "polexam/pomdp/episode.hpp"

#include <cmath>

#include "polexam/pomdp/filter.hpp"

namespace polexam::pomdp {

EpisodeRunner::EpisodeRunner(const PomdpModel& env_model,
                             const PomdpModel& filter_model,
                             const policy::Policy& policy, std::uint64_t seed,
                             std::size_t horizon)
    : env_model_(&env_model),
      filter_model_(&filter_model),
      policy_(&policy),
      rng_(seed),
      horizon_(horizon) {
  require_valid(env_model);
  require_valid(filter_model);
  policy::check_compatible(env_model, policy);
  policy::check_compatible(filter_model, policy);
  if (horizon_ < 1) throw Error(ErrorCode::kConfig, "horizon must be >= 1");
  state_ = sample_initial_state(env_model, rng_);
  belief_ = initial_belief(filter_model);
  last_observation_.bins.assign(env_model.num_metrics(), 0);
}

policy::PolicyInput EpisodeRunner::input() const {
  return {belief_, last_observation_,
          static_cast<double>(t_) / static_cast<double>(horizon_)};
}

Transition EpisodeRunner::advance() {
  const auto in = input();
  return advance(policy_->predict(in));
}

Transition EpisodeRunner::advance(
    const policy::ActionDistribution& distribution) {
  if (done()) {
    throw Error(ErrorCode::kFinished, "episode already finished");
  }
  Transition tr;
  tr.input = input();
  tr.action_distribution = distribution;
  tr.defender_action = rng_.categorical(distribution.probs);
  tr.previous_state = state_;
  tr.outcome = environment_step(*env_model_, state_, tr.defender_action, rng_);
  tr.predicted_belief = predict_belief(*filter_model_, belief_, tr.defender_action);
  try {
    tr.belief_after = belief_update(*filter_model_, belief_, tr.defender_action,
                                    tr.outcome.observation);
  } catch (const ImpossibleObservation&) {
    tr.belief_after = tr.predicted_belief;
    tr.impossible_observation = true;
  }

  ++t_;
  state_ = tr.outcome.next_state;
  belief_ = tr.belief_after;
  last_observation_ = tr.outcome.observation;
  cumulative_reward_ += tr.outcome.reward;
  if (env_model_->is_terminal(state_)) {
    terminated_ = TerminationReason::kTerminalState;
  } else if (t_ >= horizon_) {
    terminated_ = TerminationReason::kHorizon;
  }
  tr.t = t_;
  tr.cumulative_reward = cumulative_reward_;
  tr.terminated = terminated_;
  return tr;
}

void EpisodeRunner::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

std::string simulated_trace_id(const PomdpModel& model,
                               const policy::Policy& policy,
                               std::uint64_t seed, std::size_t horizon) {
  const std::string key = model.name + "|" + model.config_hash + "|" +
                          hex64(policy.fingerprint()) + "|" +
                          std::to_string(horizon) + "|" + std::to_string(seed);
  return "sim-" + hex64(fnv1a64(key)) + "-" + std::to_string(seed);
}

EpisodeTrace simulate_episode(const PomdpModel& model,
                              const policy::Policy& policy, std::uint64_t seed,
                              std::optional<std::size_t> horizon_override) {
  const std::size_t horizon = horizon_override.value_or(model.horizon);
  EpisodeRunner runner(model, policy, seed, horizon);
  EpisodeTrace trace;
  trace.trace_id = simulated_trace_id(model, policy, seed, horizon);
  trace.scenario = model.name;
  trace.config_hash = model.config_hash;
  trace.seed = seed;
  while (!runner.done()) {
    const Transition tr = runner.advance();
    StepRecord step;
    step.t = tr.t;
    step.state = tr.outcome.next_state;
    step.attacker_action = tr.outcome.attacker_action;
    step.defender_action = tr.defender_action;
    step.observation = tr.outcome.observation;
    step.reward = tr.outcome.reward;
    step.belief_after = tr.belief_after;
    trace.steps.push_back(std::move(step));
  }
  trace.terminated_reason = runner.terminated();
  return trace;
}

}  // namespace polexam::pomdp
