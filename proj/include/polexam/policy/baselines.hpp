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

#ifndef POLEXAM_POLICY_BASELINES_HPP_
#define POLEXAM_POLICY_BASELINES_HPP_

#include <memory>
#include <string>
#include <vector>

#include "polexam/policy/policy.hpp"

namespace polexam::policy {

/// Defends (point mass on `defend_action`) when the belief mass on
/// `intrusion_states` is at least alpha, otherwise takes `idle_action`.
class ThresholdPolicy final : public Policy {
 public:
  ThresholdPolicy(PolicySpaces spaces, double alpha,
                  std::vector<pomdp::StateId> intrusion_states,
                  pomdp::ActionId defend_action, pomdp::ActionId idle_action);

  PolicyKind kind() const override { return PolicyKind::kThreshold; }
  ActionDistribution predict(const PolicyInput& input) const override;
  std::uint64_t fingerprint() const override;

  double alpha() const { return alpha_; }
  const std::vector<pomdp::StateId>& intrusion_states() const {
    return intrusion_states_;
  }
  pomdp::ActionId defend_action() const { return defend_action_; }
  pomdp::ActionId idle_action() const { return idle_action_; }

 private:
  double alpha_;
  std::vector<pomdp::StateId> intrusion_states_;
  pomdp::ActionId defend_action_;
  pomdp::ActionId idle_action_;
};

/// Uniform over actions.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(PolicySpaces spaces);

  PolicyKind kind() const override { return PolicyKind::kRandom; }
  ActionDistribution predict(const PolicyInput& input) const override;
  std::uint64_t fingerprint() const override;
};

/// Always the same action.
class ConstantPolicy final : public Policy {
 public:
  ConstantPolicy(PolicySpaces spaces, pomdp::ActionId action);

  PolicyKind kind() const override { return PolicyKind::kConstant; }
  ActionDistribution predict(const PolicyInput& input) const override;
  std::uint64_t fingerprint() const override;

  pomdp::ActionId action() const { return action_; }

 private:
  pomdp::ActionId action_;
};

/// Threshold policy over every non-nominal state of a scenario model.
std::shared_ptr<const Policy> make_threshold_policy(
    const pomdp::PomdpModel& model, double alpha);

/// Constant policy on the action that is not the model's defend action.
std::shared_ptr<const Policy> make_never_defend_policy(
    const pomdp::PomdpModel& model);

std::shared_ptr<const Policy> make_random_policy(const pomdp::PomdpModel& model);

/// Parses "random", "never-defend" or "threshold:<alpha>". Returns null for
/// anything else; a malformed alpha throws Error(kConfig).
std::shared_ptr<const Policy> make_builtin_policy(const pomdp::PomdpModel& model,
                                                  const std::string& spec);

}  // namespace polexam::policy

#endif  // POLEXAM_POLICY_BASELINES_HPP_
