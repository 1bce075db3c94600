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

#include "polexam/policy/baselines.hpp"

#include <charconv>
#include <cmath>

#include "polexam/error.hpp"
#include "polexam/json.hpp"

namespace polexam::policy {

namespace {

ActionDistribution point_mass(std::size_t n, pomdp::ActionId a) {
  ActionDistribution d{std::vector<double>(n, 0.0)};
  d.probs[a] = 1.0;
  return d;
}

void check_action(const PolicySpaces& spaces, pomdp::ActionId a) {
  if (a >= spaces.num_actions) {
    throw Error(ErrorCode::kIncompatible, "action id out of range for policy");
  }
}

pomdp::ActionId idle_action_of(const pomdp::PomdpModel& model) {
  if (!model.defend_action) {
    throw Error(ErrorCode::kIncompatible,
                "model '" + model.name + "' has no defend action");
  }
  for (pomdp::ActionId a = 0; a < model.num_defender_actions(); ++a) {
    if (a != *model.defend_action) return a;
  }
  throw Error(ErrorCode::kIncompatible, "model has a single defender action");
}

}  // namespace

ThresholdPolicy::ThresholdPolicy(PolicySpaces spaces, double alpha,
                                 std::vector<pomdp::StateId> intrusion_states,
                                 pomdp::ActionId defend_action,
                                 pomdp::ActionId idle_action)
    : Policy(std::move(spaces)),
      alpha_(alpha),
      intrusion_states_(std::move(intrusion_states)),
      defend_action_(defend_action),
      idle_action_(idle_action) {
  if (!std::isfinite(alpha_) || alpha_ < 0.0 || alpha_ > 1.0) {
    throw Error(ErrorCode::kConfig, "threshold alpha must be in [0,1]");
  }
  check_action(this->spaces(), defend_action_);
  check_action(this->spaces(), idle_action_);
  for (auto s : intrusion_states_) {
    if (s >= this->spaces().num_states) {
      throw Error(ErrorCode::kIncompatible, "intrusion state out of range");
    }
  }
}

ActionDistribution ThresholdPolicy::predict(const PolicyInput& input) const {
  check_input(spaces(), input);
  double mass = 0.0;
  for (auto s : intrusion_states_) mass += input.belief.probs[s];
  return point_mass(spaces().num_actions,
                    mass >= alpha_ ? defend_action_ : idle_action_);
}

std::uint64_t ThresholdPolicy::fingerprint() const {
  Json doc = {{"alpha", alpha_},
              {"states", intrusion_states_},
              {"defend", defend_action_},
              {"idle", idle_action_}};
  return fnv1a64("threshold" + doc.dump());
}

RandomPolicy::RandomPolicy(PolicySpaces spaces) : Policy(std::move(spaces)) {
  if (this->spaces().num_actions == 0) {
    throw Error(ErrorCode::kIncompatible, "policy needs at least one action");
  }
}

ActionDistribution RandomPolicy::predict(const PolicyInput& input) const {
  check_input(spaces(), input);
  const std::size_t n = spaces().num_actions;
  return {std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

std::uint64_t RandomPolicy::fingerprint() const {
  return fnv1a64("random" + std::to_string(spaces().num_actions));
}

ConstantPolicy::ConstantPolicy(PolicySpaces spaces, pomdp::ActionId action)
    : Policy(std::move(spaces)), action_(action) {
  check_action(this->spaces(), action_);
}

ActionDistribution ConstantPolicy::predict(const PolicyInput& input) const {
  check_input(spaces(), input);
  return point_mass(spaces().num_actions, action_);
}

std::uint64_t ConstantPolicy::fingerprint() const {
  return fnv1a64("constant" + std::to_string(action_));
}

std::shared_ptr<const Policy> make_threshold_policy(
    const pomdp::PomdpModel& model, double alpha) {
  const pomdp::ActionId idle = idle_action_of(model);
  std::vector<pomdp::StateId> intrusion;
  for (pomdp::StateId s = 0; s < model.num_states(); ++s) {
    if (!model.nominal_state || s != *model.nominal_state) intrusion.push_back(s);
  }
  return std::make_shared<ThresholdPolicy>(PolicySpaces::of(model), alpha,
                                           std::move(intrusion),
                                           *model.defend_action, idle);
}

std::shared_ptr<const Policy> make_never_defend_policy(
    const pomdp::PomdpModel& model) {
  return std::make_shared<ConstantPolicy>(PolicySpaces::of(model),
                                          idle_action_of(model));
}

std::shared_ptr<const Policy> make_random_policy(const pomdp::PomdpModel& model) {
  return std::make_shared<RandomPolicy>(PolicySpaces::of(model));
}

std::shared_ptr<const Policy> make_builtin_policy(const pomdp::PomdpModel& model,
                                                  const std::string& spec) {
  if (spec == "random") return make_random_policy(model);
  if (spec == "never-defend") return make_never_defend_policy(model);
  constexpr std::string_view prefix = "threshold:";
  if (spec.starts_with(prefix)) {
    const std::string_view rest = std::string_view(spec).substr(prefix.size());
    double alpha = 0.0;
    const auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), alpha);
    if (ec != std::errc() || end != rest.data() + rest.size()) {
      throw Error(ErrorCode::kConfig, "bad threshold in policy spec '" + spec + "'");
    }
    return make_threshold_policy(model, alpha);
  }
  return nullptr;
}

}  // namespace polexam::policy
