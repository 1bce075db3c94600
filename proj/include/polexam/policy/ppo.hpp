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

#ifndef POLEXAM_POLICY_PPO_HPP_
#define POLEXAM_POLICY_PPO_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "polexam/error.hpp"
#include "polexam/json.hpp"
#include "polexam/policy/network.hpp"
#include "polexam/pomdp/model.hpp"

namespace polexam::policy {

struct TrainingConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  std::size_t epochs_per_iteration = 4;
  std::size_t minibatch_size = 64;
  std::size_t rollout_episodes = 32;
  std::size_t iterations = 150;
  double entropy_coeff = 0.01;
  double value_coeff = 0.5;
  /// Global gradient-norm clip; 0 disables.
  double max_grad_norm = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<std::size_t> hidden_sizes = {64, 64};
  std::uint64_t seed = 1;
};

/// Throws Error(kConfig) naming the first out-of-range field.
void validate_config(const TrainingConfig& config);
Json to_json(const TrainingConfig& config);
TrainingConfig training_config_from_json(const Json& doc);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation over one trajectory segment. values[t]
/// is V(x_t); terminal_value bootstraps after the last step.
GaeResult gae_advantages(std::span<const double> rewards,
                         std::span<const double> values, double terminal_value,
                         double gamma, double lambda);

struct Batch {
  std::vector<std::vector<double>> features;
  std::vector<pomdp::ActionId> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return actions.size(); }
};

struct SurrogateResult {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  /// Same layout as PolicyParameters::values.
  std::vector<double> grad;
};

/**
 * Clipped PPO objective and its exact gradient.
 *
 *   loss = -mean(min(r A, clip(r, 1-eps, 1+eps) A))
 *          + value_coeff * mean((V - R)^2) - entropy_coeff * mean(H)
 *
 * with r = exp(log pi(a|x) - old_log_prob). Where the two surrogate terms
 * tie, the unclipped branch supplies the gradient.
 */
SurrogateResult ppo_surrogate(const PolicyParameters& params, const Batch& batch,
                              const TrainingConfig& config);

/// Adaptive-moment optimizer with bias correction, minimizing.
class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1, double beta2,
       double epsilon);

  void step(std::span<double> params, std::span<const double> grad);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::uint64_t t_ = 0;
};

struct IterationStats {
  std::size_t iteration = 0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;

  friend bool operator==(const IterationStats&, const IterationStats&) = default;
};

struct TrainingStats {
  std::vector<IterationStats> iterations;

  friend bool operator==(const TrainingStats&, const TrainingStats&) = default;
};

Json to_json(const TrainingStats& stats);

struct TrainingResult {
  PolicyParameters params;
  TrainingStats stats;
};

/// Training stopped on non-finite parameters; carries the last parameters
/// that were finite.
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& message, PolicyParameters checkpoint)
      : Error(ErrorCode::kTrainingAborted, message),
        checkpoint_(std::move(checkpoint)) {}

  const PolicyParameters& checkpoint() const { return checkpoint_; }

 private:
  PolicyParameters checkpoint_;
};

using ProgressCallback = std::function<void(const IterationStats&)>;

/**
 * PPO with GAE on simulated episodes of `model`.
 *
 * Each iteration collects `rollout_episodes` full episodes with the current
 * network, computes advantages per episode (zero bootstrap at the end, since
 * time is part of the input), then runs `epochs_per_iteration` passes of
 * shuffled minibatch Adam steps. Advantages are standardized per minibatch.
 * Deterministic given config.seed.
 */
TrainingResult ppo_train(const pomdp::PomdpModel& model,
                         const TrainingConfig& config,
                         const ProgressCallback& progress = {});

}  // namespace polexam::policy

#endif  // POLEXAM_POLICY_PPO_HPP_
