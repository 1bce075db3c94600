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

#ifndef POLEXAM_POMDP_SCENARIO_HPP_
#define POLEXAM_POMDP_SCENARIO_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "polexam/json.hpp"
#include "polexam/pomdp/model.hpp"

namespace polexam::pomdp {

inline constexpr int kScenarioSchemaVersion = 1;

/// Fixed spaces of the intrusion-prevention scenario.
enum IntrusionState : StateId { kHealthy = 0, kRecon = 1, kCompromised = 2, kBreached = 3 };
enum IntrusionDefenderAction : ActionId { kContinue = 0, kDefend = 1 };
enum IntrusionAttackerAction : AttackerActionId {
  kPassive = 0,
  kPingScan = 1,
  kPortScan = 2,
  kExploit = 3,
};

inline constexpr std::array<const char*, 4> kIntrusionStateNames = {
    "healthy", "recon", "compromised", "breached"};
inline constexpr std::array<const char*, 2> kIntrusionDefenderActionNames = {
    "continue", "defend"};
inline constexpr std::array<const char*, 4> kIntrusionAttackerActionNames = {
    "passive", "ping_scan", "port_scan", "exploit"};
inline constexpr std::array<const char*, 3> kIntrusionMetricNames = {
    "ids_alerts", "failed_logins", "new_connections"};

/// Mean count per metric, in kIntrusionMetricNames order.
using MetricMeans = std::array<double, 3>;
/// Probability per attacker action, in kIntrusionAttackerActionNames order.
using AttackerMix = std::array<double, 4>;

/// Z[s][a_att][m][b], same layout as PomdpModel::observation.
using ObservationKernel =
    std::vector<std::vector<std::vector<std::vector<double>>>>;

/**
 * Parameters of the built-in intrusion scenario.
 *
 * Each metric is a count drawn from a two-component Poisson mixture
 * (ordinary client traffic, occasionally bursty) shifted by the attacker
 * action's signature, then binned as 0..bins-2 plus an overflow bin. The
 * observation law depends on the attacker action only, so two attacker
 * actions with equal signatures are indistinguishable in the metrics.
 */
struct ScenarioConfig {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "intrusion-default";
  std::string description;
  std::size_t horizon = 100;
  std::size_t bins = 16;

  double service_reward = 1.0;
  double intrusion_penalty = -2.0;
  double defend_cost = -5.0;
  double false_alarm_penalty = -10.0;
  double stop_intrusion_reward = 20.0;

  double intrusion_start_prob = 0.1;
  double stage_progression_prob = 0.2;
  std::array<double, 4> initial_distribution = {1.0, 0.0, 0.0, 0.0};

  MetricMeans client_traffic = {1.0, 1.0, 3.0};
  double client_burst_prob = 0.05;
  MetricMeans client_burst = {2.0, 2.0, 6.0};

  /// Indexed by attacker action.
  std::array<MetricMeans, 4> attack_signature = {{
      {0.0, 0.0, 0.0},
      {0.0, 0.0, 0.0},
      {5.0, 0.0, 8.0},
      {4.0, 6.0, 2.0},
  }};
  /// Indexed by state: P(attacker action | state).
  std::array<AttackerMix, 4> attacker_mix = {{
      {1.0, 0.0, 0.0, 0.0},
      {0.2, 0.4, 0.4, 0.0},
      {0.3, 0.0, 0.0, 0.7},
      {0.5, 0.0, 0.0, 0.5},
  }};

  /// Replaces the parametric observation law, e.g. with an estimate.
  std::optional<ObservationKernel> observation_kernel;
  std::string base_scenario;
};

/// Throws Error(kConfig) naming the first out-of-range field.
void validate_config(const ScenarioConfig& config);

Json to_json(const ScenarioConfig& config);

/// Missing fields keep their defaults; unknown fields and a schema_version
/// other than kScenarioSchemaVersion are rejected with Error(kConfig).
ScenarioConfig scenario_config_from_json(const Json& doc);

/// Hex FNV-1a of the canonical JSON encoding.
std::string config_hash(const ScenarioConfig& config);

PomdpModel build_intrusion_scenario(const ScenarioConfig& config);

/// Truncated Poisson pmf with the last bin holding the upper tail.
std::vector<double> binned_poisson(double mean, std::size_t bins);

/// Built-in configurations: intrusion-default, intrusion-no-attack,
/// intrusion-ping-scan.
std::vector<ScenarioConfig> builtin_scenarios();
std::optional<ScenarioConfig> find_builtin_scenario(const std::string& name);

}  // namespace polexam::pomdp

#endif  // POLEXAM_POMDP_SCENARIO_HPP_
