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

#ifndef POLEXAM_POMDP_MODEL_HPP_
#define POLEXAM_POMDP_MODEL_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace polexam::pomdp {

using StateId = std::size_t;
using ActionId = std::size_t;
using AttackerActionId = std::size_t;

/// Tolerance used for every "row sums to one" check.
inline constexpr double kProbabilityTolerance = 1e-9;

struct MetricSpec {
  std::string name;
  std::size_t bins = 0;
};

struct DefenderAction {
  std::string name;
  double cost = 0.0;
};

/// One bin index per metric.
struct Observation {
  std::vector<std::size_t> bins;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Posterior over hidden states.
struct Belief {
  std::vector<double> probs;

  friend bool operator==(const Belief&, const Belief&) = default;
};

/**
 * Finite POMDP with an environment-internal attacker.
 *
 * Kernel layouts:
 *   transition[s][a_def][s']            P(s' | s, a_def)
 *   attacker_behavior[s][a_att]         P(a_att | s), s is the successor state
 *   observation[s][a_att][m][b]         P(metric m in bin b | s, a_att)
 *   reward[s][a_def]
 *
 * Immutable after construction; share it by const reference or
 * shared_ptr<const PomdpModel>.
 */
struct PomdpModel {
  std::string name;
  std::string config_hash;
  /// Scenario this model was derived from (e.g. by kernel estimation).
  std::string base_scenario;

  std::vector<std::string> state_names;
  std::vector<DefenderAction> defender_actions;
  std::vector<std::string> attacker_actions;
  std::vector<MetricSpec> metrics;

  std::vector<std::vector<std::vector<double>>> transition;
  std::vector<std::vector<double>> attacker_behavior;
  std::vector<std::vector<std::vector<std::vector<double>>>> observation;
  std::vector<std::vector<double>> reward;
  std::vector<double> initial_distribution;
  std::size_t horizon = 1;
  std::vector<StateId> terminal_states;

  /// Scenario roles used by baselines and statistics. Optional because a
  /// generic model need not have them.
  std::optional<StateId> nominal_state;
  std::optional<ActionId> defend_action;

  std::size_t num_states() const { return state_names.size(); }
  std::size_t num_defender_actions() const { return defender_actions.size(); }
  std::size_t num_attacker_actions() const { return attacker_actions.size(); }
  std::size_t num_metrics() const { return metrics.size(); }
  std::vector<std::size_t> metric_bins() const;

  bool is_terminal(StateId s) const;
  std::optional<StateId> find_state(const std::string& name) const;
  std::optional<ActionId> find_defender_action(const std::string& name) const;
  std::optional<AttackerActionId> find_attacker_action(
      const std::string& name) const;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks every structural invariant and collects all violations.
ValidationReport validate_model(const PomdpModel& model);

/// Throws Error(kModelInvalid) listing the first few violations.
void require_valid(const PomdpModel& model);

/// Throws Error(kIndex) unless obs has one in-range bin per metric.
void check_observation(const PomdpModel& model, const Observation& obs);

/// True when `model` can filter traces recorded under `scenario`: same
/// scenario name or the model was derived from it.
bool same_scenario_family(const PomdpModel& model, const std::string& scenario);

}  // namespace polexam::pomdp

#endif  // POLEXAM_POMDP_MODEL_HPP_
