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

#ifndef POLEXAM_STORE_ESTIMATE_HPP_
#define POLEXAM_STORE_ESTIMATE_HPP_

#include <string>
#include <vector>

#include "polexam/json.hpp"
#include "polexam/pomdp/model.hpp"
#include "polexam/pomdp/scenario.hpp"
#include "polexam/pomdp/trace.hpp"

namespace polexam::store {

struct EstimationConfig {
  /// Additive (Laplace) smoothing per bin.
  double alpha = 1.0;
  /// Cells with fewer samples than this get a warning.
  std::size_t min_samples = 100;
  /// Pool attacker actions and estimate one row per (state, metric).
  bool condition_on_state_only = false;
};

/// Throws Error(kConfig) for a negative or non-finite alpha.
void validate_config(const EstimationConfig& config);

struct ObservationKernelEstimate {
  std::string scenario;
  /// Z-hat[s][a_att][m][b], same layout as PomdpModel::observation.
  pomdp::ObservationKernel kernel;
  /// Samples behind each (state, attacker action) cell. With
  /// condition_on_state_only every action of a state shows the pooled count.
  std::vector<std::vector<std::size_t>> sample_counts;
  std::vector<std::string> warnings;
};

Json to_json(const ObservationKernelEstimate& estimate);

/**
 * Histogram estimate of the observation law from ground-truth steps:
 *
 *   Z-hat[s][x][m][b] = (count(b) + alpha) / (N + alpha * B_m)
 *
 * where the counts are over steps whose successor state is s and attacker
 * action is x. A cell with N = 0 and alpha = 0 falls back to uniform with
 * a warning. Counts are order-independent, so permuting traces or steps
 * gives the same result.
 *
 * Throws Error(kEmptyInput) for an empty trace set and Error(kIncompatible)
 * if the traces mix scenarios or do not fit `model`.
 */
ObservationKernelEstimate estimate_observation_model(
    const pomdp::PomdpModel& model, const std::vector<pomdp::EpisodeTrace>& traces,
    const EstimationConfig& config);

/// `base` with the estimated kernel installed, renamed to `name` and
/// recorded as derived from base's scenario family.
pomdp::ScenarioConfig estimated_scenario(const pomdp::ScenarioConfig& base,
                                         const ObservationKernelEstimate& estimate,
                                         const std::string& name);

}  // namespace polexam::store

#endif  // POLEXAM_STORE_ESTIMATE_HPP_
