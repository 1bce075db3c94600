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

#ifndef POLEXAM_POMDP_FILTER_HPP_
#define POLEXAM_POMDP_FILTER_HPP_

#include <vector>

#include "polexam/error.hpp"
#include "polexam/pomdp/model.hpp"

namespace polexam::pomdp {

/// Raised when an observation has zero probability under the predicted
/// belief. Carries the unnormalized posterior (all zeros, or underflowed).
class ImpossibleObservation : public Error {
 public:
  ImpossibleObservation(const std::string& message,
                        std::vector<double> unnormalized)
      : Error(ErrorCode::kImpossibleObservation, message),
        unnormalized_(std::move(unnormalized)) {}

  const std::vector<double>& unnormalized() const { return unnormalized_; }

 private:
  std::vector<double> unnormalized_;
};

/// rho_1 of a valid model.
Belief initial_belief(const PomdpModel& model);

/// Product over metrics of Z[state][attacker_action][m][obs.bins[m]].
double observation_likelihood(const PomdpModel& model, StateId state,
                              AttackerActionId attacker_action,
                              const Observation& obs);

/// Likelihood of obs in successor state s', marginalized over the attacker
/// action: sum_a P_att[s'][a] * observation_likelihood(s', a, obs).
double state_likelihood(const PomdpModel& model, StateId state,
                        const Observation& obs);

/// Prediction step: b'(s') = sum_s T[s][a][s'] b(s).
Belief predict_belief(const PomdpModel& model, const Belief& belief,
                      ActionId defender_action);

/// One step of the Bayes filter: prediction under `defender_action`, then
/// correction by `obs`. Throws ImpossibleObservation when the normalizer is
/// zero.
Belief belief_update(const PomdpModel& model, const Belief& belief,
                     ActionId defender_action, const Observation& obs);

/// Per-metric marginal distribution of the next observation when the
/// emitting state is distributed as `state_distribution`.
std::vector<std::vector<double>> metric_marginals(
    const PomdpModel& model, const Belief& state_distribution);

/// Throws Error(kValidation) unless belief is a distribution over the
/// model's states within `tolerance`.
void check_belief(const PomdpModel& model, const Belief& belief,
                  double tolerance = kProbabilityTolerance);

}  // namespace polexam::pomdp

#endif  // POLEXAM_POMDP_FILTER_HPP_
