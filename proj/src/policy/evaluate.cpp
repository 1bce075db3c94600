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

#include "polexam/policy/evaluate.hpp"

#include <cmath>
#include <vector>

#include "polexam/error.hpp"
#include "polexam/pomdp/episode.hpp"

namespace polexam::policy {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

Json to_json(const EvalStats& s) {
  Json doc;
  doc["episodes"] = s.episodes;
  doc["mean_return"] = s.mean_return;
  doc["std_return"] = s.std_return;
  doc["mean_length"] = s.mean_length;
  doc["std_length"] = s.std_length;
  doc["defend_frequency"] = s.defend_frequency;
  doc["false_alarm_count"] = s.false_alarm_count;
  return doc;
}

EvalStats evaluate_policy(const pomdp::PomdpModel& model, const Policy& policy,
                          std::size_t episodes, std::uint64_t seed) {
  if (episodes < 1) throw Error(ErrorCode::kConfig, "episodes must be >= 1");
  check_compatible(model, policy);

  std::vector<double> returns;
  std::vector<double> lengths;
  std::size_t steps = 0;
  std::size_t defends = 0;
  EvalStats stats;
  stats.episodes = episodes;
  for (std::size_t i = 0; i < episodes; ++i) {
    pomdp::EpisodeRunner runner(model, policy, derive_seed(seed, i),
                                model.horizon);
    while (!runner.done()) {
      const auto tr = runner.advance();
      ++steps;
      if (model.defend_action && tr.defender_action == *model.defend_action) {
        ++defends;
        if (model.nominal_state && tr.previous_state == *model.nominal_state) {
          ++stats.false_alarm_count;
        }
      }
    }
    returns.push_back(runner.cumulative_reward());
    lengths.push_back(static_cast<double>(runner.t()));
  }
  std::tie(stats.mean_return, stats.std_return) = mean_std(returns);
  std::tie(stats.mean_length, stats.std_length) = mean_std(lengths);
  stats.defend_frequency =
      static_cast<double>(defends) / static_cast<double>(steps);
  return stats;
}

Json to_json(const FalseAlarm& a) {
  Json doc;
  doc["seed"] = a.seed;
  doc["t"] = a.t;
  doc["defend_probability"] = a.defend_probability;
  doc["belief"] = a.belief;
  return doc;
}

std::optional<FalseAlarm> find_false_alarm(const pomdp::PomdpModel& env_model,
                                           const pomdp::PomdpModel& filter_model,
                                           const Policy& policy, std::uint64_t first_seed,
                                           std::size_t count, double threshold) {
  if (!filter_model.defend_action || !env_model.nominal_state) {
    throw Error(ErrorCode::kConfig, "model has no nominal state or defend action");
  }
  check_compatible(filter_model, policy);
  const auto defend = *filter_model.defend_action;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = first_seed + i;
    pomdp::EpisodeRunner runner(env_model, filter_model, policy, seed, filter_model.horizon);
    while (!runner.done()) {
      const auto tr = runner.advance();
      const double p = tr.action_distribution.probs[defend];
      if (p > threshold && tr.previous_state == *env_model.nominal_state) {
        return FalseAlarm{seed, tr.t, p, tr.input.belief.probs};
      }
    }
  }
  return std::nullopt;
}

std::optional<FalseAlarm> find_false_alarm(const pomdp::PomdpModel& model,
                                           const Policy& policy, std::uint64_t first_seed,
                                           std::size_t count, double threshold) {
  return find_false_alarm(model, model, policy, first_seed, count, threshold);
}

}  // namespace polexam::policy
