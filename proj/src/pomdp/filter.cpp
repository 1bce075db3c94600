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

#include "polexam/pomdp/filter.hpp"

#include <cmath>
#include <string>

namespace polexam::pomdp {

namespace {

void check_state(const PomdpModel& model, StateId s) {
  if (s >= model.num_states()) {
    throw Error(ErrorCode::kIndex, "state id " + std::to_string(s) +
                                       " out of range");
  }
}

void check_action(const PomdpModel& model, ActionId a) {
  if (a >= model.num_defender_actions()) {
    throw Error(ErrorCode::kIndex, "defender action id " + std::to_string(a) +
                                       " out of range");
  }
}

}  // namespace

void check_belief(const PomdpModel& model, const Belief& belief,
                  double tolerance) {
  if (belief.probs.size() != model.num_states()) {
    throw Error(ErrorCode::kValidation,
                "belief has " + std::to_string(belief.probs.size()) +
                    " entries, model has " +
                    std::to_string(model.num_states()) + " states");
  }
  double sum = 0.0;
  for (double p : belief.probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::kValidation, "belief entry outside [0,1]");
    }
    sum += p;
  }
  if (!(std::abs(sum - 1.0) <= tolerance)) {
    throw Error(ErrorCode::kValidation,
                "belief sums to " + std::to_string(sum));
  }
}

Belief initial_belief(const PomdpModel& model) {
  require_valid(model);
  return Belief{model.initial_distribution};
}

double observation_likelihood(const PomdpModel& model, StateId state,
                              AttackerActionId attacker_action,
                              const Observation& obs) {
  check_state(model, state);
  if (attacker_action >= model.num_attacker_actions()) {
    throw Error(ErrorCode::kIndex, "attacker action id " +
                                       std::to_string(attacker_action) +
                                       " out of range");
  }
  check_observation(model, obs);
  const auto& rows = model.observation[state][attacker_action];
  double product = 1.0;
  for (std::size_t m = 0; m < obs.bins.size(); ++m) {
    product *= rows[m][obs.bins[m]];
  }
  return product;
}

double state_likelihood(const PomdpModel& model, StateId state,
                        const Observation& obs) {
  double total = 0.0;
  for (AttackerActionId a = 0; a < model.num_attacker_actions(); ++a) {
    const double w = model.attacker_behavior[state][a];
    if (w == 0.0) continue;
    total += w * observation_likelihood(model, state, a, obs);
  }
  return total;
}

Belief predict_belief(const PomdpModel& model, const Belief& belief,
                      ActionId defender_action) {
  check_action(model, defender_action);
  const std::size_t n = model.num_states();
  if (belief.probs.size() != n) {
    throw Error(ErrorCode::kIndex, "belief length does not match state count");
  }
  Belief predicted{std::vector<double>(n, 0.0)};
  for (StateId s = 0; s < n; ++s) {
    const double b = belief.probs[s];
    if (b == 0.0) continue;
    const auto& row = model.transition[s][defender_action];
    for (StateId next = 0; next < n; ++next) {
      predicted.probs[next] += row[next] * b;
    }
  }
  return predicted;
}

Belief belief_update(const PomdpModel& model, const Belief& belief,
                     ActionId defender_action, const Observation& obs) {
  check_observation(model, obs);
  Belief posterior = predict_belief(model, belief, defender_action);
  double normalizer = 0.0;
  for (StateId s = 0; s < posterior.probs.size(); ++s) {
    if (posterior.probs[s] == 0.0) continue;
    posterior.probs[s] *= state_likelihood(model, s, obs);
    normalizer += posterior.probs[s];
  }
  if (!(normalizer > 0.0) || !std::isfinite(normalizer)) {
    throw ImpossibleObservation(
        "observation has zero probability under the predicted belief",
        posterior.probs);
  }
  for (double& p : posterior.probs) p /= normalizer;
  return posterior;
}

std::vector<std::vector<double>> metric_marginals(
    const PomdpModel& model, const Belief& state_distribution) {
  std::vector<std::vector<double>> out;
  out.reserve(model.num_metrics());
  for (const auto& metric : model.metrics) {
    out.emplace_back(metric.bins, 0.0);
  }
  for (StateId s = 0; s < model.num_states(); ++s) {
    const double ps = state_distribution.probs[s];
    if (ps == 0.0) continue;
    for (AttackerActionId a = 0; a < model.num_attacker_actions(); ++a) {
      const double w = ps * model.attacker_behavior[s][a];
      if (w == 0.0) continue;
      for (std::size_t m = 0; m < model.num_metrics(); ++m) {
        const auto& row = model.observation[s][a][m];
        for (std::size_t b = 0; b < row.size(); ++b) out[m][b] += w * row[b];
      }
    }
  }
  return out;
}

}  // namespace polexam::pomdp
