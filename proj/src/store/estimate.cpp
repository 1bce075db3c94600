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

#include "polexam/store/estimate.hpp"

#include <cmath>

#include "polexam/error.hpp"

namespace polexam::store {

void validate_config(const EstimationConfig& config) {
  if (!std::isfinite(config.alpha) || config.alpha < 0.0) {
    throw Error(ErrorCode::kConfig, "alpha must be a finite number >= 0");
  }
}

Json to_json(const ObservationKernelEstimate& estimate) {
  Json doc;
  doc["scenario"] = estimate.scenario;
  doc["observation_kernel"] = estimate.kernel;
  doc["sample_counts"] = estimate.sample_counts;
  doc["warnings"] = estimate.warnings;
  return doc;
}

ObservationKernelEstimate estimate_observation_model(
    const pomdp::PomdpModel& model, const std::vector<pomdp::EpisodeTrace>& traces,
    const EstimationConfig& config) {
  validate_config(config);
  pomdp::require_valid(model);
  if (traces.empty()) throw Error(ErrorCode::kEmptyInput, "no traces to estimate from");
  for (const auto& trace : traces) {
    if (trace.scenario != traces.front().scenario) {
      throw Error(ErrorCode::kIncompatible, "traces mix scenarios '" +
                                                traces.front().scenario + "' and '" +
                                                trace.scenario + "'");
    }
    pomdp::check_trace_against(model, trace);
  }

  const std::size_t ns = model.num_states();
  const std::size_t nx = model.num_attacker_actions();
  const std::size_t nm = model.num_metrics();
  // counts[s][x][m][b]
  pomdp::ObservationKernel counts(ns);
  std::vector<std::vector<std::size_t>> cell(ns, std::vector<std::size_t>(nx, 0));
  for (std::size_t s = 0; s < ns; ++s) {
    counts[s].resize(nx);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t m = 0; m < nm; ++m) {
        counts[s][x].emplace_back(model.metrics[m].bins, 0.0);
      }
    }
  }
  for (const auto& trace : traces) {
    for (const auto& step : trace.steps) {
      const std::size_t x = config.condition_on_state_only ? 0 : step.attacker_action;
      for (std::size_t m = 0; m < nm; ++m) counts[step.state][x][m][step.observation.bins[m]] += 1.0;
      ++cell[step.state][x];
    }
  }

  ObservationKernelEstimate out;
  out.scenario = traces.front().scenario;
  out.kernel = counts;
  out.sample_counts = cell;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t src = config.condition_on_state_only ? 0 : x;
      const std::size_t n = cell[s][src];
      out.sample_counts[s][x] = n;
      if (config.condition_on_state_only && x > 0) {
        out.kernel[s][x] = out.kernel[s][0];
        continue;
      }
      const std::string where = "cell (state=" + model.state_names[s] +
                                (config.condition_on_state_only
                                     ? std::string()
                                     : ", attacker_action=" + model.attacker_actions[x]) +
                                ")";
      if (n < config.min_samples) {
        out.warnings.push_back(where + " has " + std::to_string(n) + " samples, fewer than " +
                               std::to_string(config.min_samples));
      }
      const bool fallback = n == 0 && config.alpha == 0.0;
      if (fallback) out.warnings.push_back(where + " has no samples and alpha=0; using uniform");
      for (std::size_t m = 0; m < nm; ++m) {
        auto& row = out.kernel[s][x][m];
        const double bins = static_cast<double>(row.size());
        for (double& v : row) {
          v = fallback ? 1.0 / bins
                       : (v + config.alpha) / (static_cast<double>(n) + config.alpha * bins);
        }
      }
    }
  }
  return out;
}

pomdp::ScenarioConfig estimated_scenario(const pomdp::ScenarioConfig& base,
                                         const ObservationKernelEstimate& estimate,
                                         const std::string& name) {
  pomdp::ScenarioConfig config = base;
  config.name = name;
  config.observation_kernel = estimate.kernel;
  config.base_scenario = base.base_scenario.empty() ? base.name : base.base_scenario;
  config.description = "observation law estimated from traces of " + estimate.scenario;
  return config;
}

}  // namespace polexam::store
