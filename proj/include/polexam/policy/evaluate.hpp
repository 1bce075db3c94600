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

#ifndef POLEXAM_POLICY_EVALUATE_HPP_
#define POLEXAM_POLICY_EVALUATE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "polexam/json.hpp"
#include "polexam/policy/policy.hpp"
#include "polexam/pomdp/model.hpp"

namespace polexam::policy {

struct EvalStats {
  std::size_t episodes = 0;
  double mean_return = 0.0;
  /// Population standard deviation (0 for a single episode).
  double std_return = 0.0;
  double mean_length = 0.0;
  double std_length = 0.0;
  /// Fraction of all steps on which the defend action was taken.
  double defend_frequency = 0.0;
  /// Defend actions taken while the hidden state was nominal.
  std::size_t false_alarm_count = 0;

  friend bool operator==(const EvalStats&, const EvalStats&) = default;
};

Json to_json(const EvalStats& stats);

/// Runs `episodes` episodes; episode i uses derive_seed(seed, i). Requires
/// episodes >= 1 (Error(kConfig) otherwise).
EvalStats evaluate_policy(const pomdp::PomdpModel& model, const Policy& policy,
                          std::size_t episodes, std::uint64_t seed);

/// A step whose action was drawn with more than the threshold on defend
/// while the hidden state was nominal.
struct FalseAlarm {
  std::uint64_t seed = 0;
  /// Step index; the action of step t is chosen from frame t - 1.
  std::size_t t = 0;
  double defend_probability = 0.0;
  std::vector<double> belief;
};

Json to_json(const FalseAlarm& alarm);

/// Simulates seeds first_seed .. first_seed + count - 1 with the seed used
/// as-is and returns the earliest step, by seed then t, where the defend
/// probability exceeds `threshold` in the nominal state. The episode runs in
/// `env_model` while the defender filters with `filter_model`, e.g. an
/// attack-free environment seen through the standard model. Error(kConfig)
/// if the models lack a nominal state or defend action.
std::optional<FalseAlarm> find_false_alarm(const pomdp::PomdpModel& env_model,
                                           const pomdp::PomdpModel& filter_model,
                                           const Policy& policy, std::uint64_t first_seed,
                                           std::size_t count, double threshold);

/// Same with one model for both roles.
std::optional<FalseAlarm> find_false_alarm(const pomdp::PomdpModel& model,
                                           const Policy& policy, std::uint64_t first_seed,
                                           std::size_t count, double threshold);

}  // namespace polexam::policy

#endif  // POLEXAM_POLICY_EVALUATE_HPP_
