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

#ifndef POLEXAM_POMDP_EPISODE_HPP_
#define POLEXAM_POMDP_EPISODE_HPP_

#include <cstdint>
#include <optional>

#include "polexam/policy/policy.hpp"
#include "polexam/pomdp/environment.hpp"
#include "polexam/pomdp/trace.hpp"
#include "polexam/rng.hpp"

namespace polexam::pomdp {

/// Everything produced by one call to EpisodeRunner::advance.
struct Transition {
  /// Policy input and output that chose the action.
  policy::PolicyInput input;
  policy::ActionDistribution action_distribution;
  ActionId defender_action = 0;
  StateId previous_state = 0;
  StepOutcome outcome;
  Belief predicted_belief;
  Belief belief_after;
  std::size_t t = 0;
  double cumulative_reward = 0.0;
  std::optional<TerminationReason> terminated;
  /// The filter model gave the observation zero likelihood; belief_after
  /// is then the prediction.
  bool impossible_observation = false;
};

/**
 * Steps one simulated episode.
 *
 * The environment evolves under `env_model` while the defender filters with
 * `filter_model`; both are usually the same model. Construction draws the
 * initial hidden state (one uniform). Each advance() then draws the defender
 * action (one uniform) followed by environment_step's draws.
 *
 * The runner holds non-owning pointers; the models and policy must outlive
 * it. It is copyable, and a copy continues the episode identically.
 */
class EpisodeRunner {
 public:
  EpisodeRunner(const PomdpModel& env_model, const PomdpModel& filter_model,
                const policy::Policy& policy, std::uint64_t seed,
                std::size_t horizon);

  EpisodeRunner(const PomdpModel& model, const policy::Policy& policy,
                std::uint64_t seed, std::size_t horizon)
      : EpisodeRunner(model, model, policy, seed, horizon) {}

  /// Input the policy sees for the next step.
  policy::PolicyInput input() const;

  /// One step with the action sampled from the policy.
  Transition advance();

  /// One step with the action sampled from a caller-supplied distribution.
  Transition advance(const policy::ActionDistribution& distribution);

  /// Replaces the generator; the episode continues from its current state.
  void reseed(std::uint64_t seed);

  bool done() const { return terminated_.has_value(); }
  std::size_t t() const { return t_; }
  std::size_t horizon() const { return horizon_; }
  StateId hidden_state() const { return state_; }
  const Belief& belief() const { return belief_; }
  const Observation& last_observation() const { return last_observation_; }
  double cumulative_reward() const { return cumulative_reward_; }
  std::optional<TerminationReason> terminated() const { return terminated_; }
  const Rng& rng() const { return rng_; }
  const policy::Policy& policy() const { return *policy_; }
  const PomdpModel& env_model() const { return *env_model_; }
  const PomdpModel& filter_model() const { return *filter_model_; }

 private:
  const PomdpModel* env_model_;
  const PomdpModel* filter_model_;
  const policy::Policy* policy_;
  Rng rng_;
  std::size_t horizon_;
  std::size_t t_ = 0;
  StateId state_ = 0;
  Belief belief_;
  Observation last_observation_;
  double cumulative_reward_ = 0.0;
  std::optional<TerminationReason> terminated_;
};

/// Deterministic id for a simulated trace.
std::string simulated_trace_id(const PomdpModel& model,
                               const policy::Policy& policy,
                               std::uint64_t seed, std::size_t horizon);

/// Runs a whole episode. `horizon_override` replaces the model's horizon.
/// The result is a pure function of the arguments.
EpisodeTrace simulate_episode(const PomdpModel& model,
                              const policy::Policy& policy, std::uint64_t seed,
                              std::optional<std::size_t> horizon_override = {});

}  // namespace polexam::pomdp

#endif  // POLEXAM_POMDP_EPISODE_HPP_
