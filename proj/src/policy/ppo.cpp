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

#include "polexam/policy/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "polexam/pomdp/episode.hpp"

namespace polexam::policy {

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kConfig, "training config: " + message);
}

void require_finite(double x, const char* term) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kNumeric,
                std::string("non-finite value in PPO term '") + term + "'");
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  return idx;
}

}  // namespace

void validate_config(const TrainingConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) config_error("gamma must be in (0,1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) {
    config_error("gae_lambda must be in [0,1]");
  }
  if (!(c.clip_epsilon > 0.0)) config_error("clip_epsilon must be > 0");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    config_error("learning_rate must be > 0");
  }
  if (c.epochs_per_iteration < 1) config_error("epochs_per_iteration must be >= 1");
  if (c.minibatch_size < 1) config_error("minibatch_size must be >= 1");
  if (c.rollout_episodes < 1) config_error("rollout_episodes must be >= 1");
  if (!(c.entropy_coeff >= 0.0)) config_error("entropy_coeff must be >= 0");
  if (!(c.value_coeff >= 0.0)) config_error("value_coeff must be >= 0");
  if (!(c.max_grad_norm >= 0.0)) config_error("max_grad_norm must be >= 0");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0)) {
    config_error("adam_beta1 must be in [0,1)");
  }
  if (!(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) {
    config_error("adam_beta2 must be in [0,1)");
  }
  if (!(c.adam_epsilon > 0.0)) config_error("adam_epsilon must be > 0");
  for (std::size_t h : c.hidden_sizes) {
    if (h == 0 || h > 4096) config_error("hidden sizes must be in [1,4096]");
  }
}

Json to_json(const TrainingConfig& c) {
  Json doc;
  doc["gamma"] = c.gamma;
  doc["gae_lambda"] = c.gae_lambda;
  doc["clip_epsilon"] = c.clip_epsilon;
  doc["learning_rate"] = c.learning_rate;
  doc["epochs_per_iteration"] = c.epochs_per_iteration;
  doc["minibatch_size"] = c.minibatch_size;
  doc["rollout_episodes"] = c.rollout_episodes;
  doc["iterations"] = c.iterations;
  doc["entropy_coeff"] = c.entropy_coeff;
  doc["value_coeff"] = c.value_coeff;
  doc["max_grad_norm"] = c.max_grad_norm;
  doc["adam_beta1"] = c.adam_beta1;
  doc["adam_beta2"] = c.adam_beta2;
  doc["adam_epsilon"] = c.adam_epsilon;
  doc["hidden_sizes"] = c.hidden_sizes;
  doc["seed"] = c.seed;
  return doc;
}

TrainingConfig training_config_from_json(const Json& doc) {
  if (!doc.is_object()) config_error("document must be an object");
  static const std::set<std::string> known = {
      "gamma", "gae_lambda", "clip_epsilon", "learning_rate",
      "epochs_per_iteration", "minibatch_size", "rollout_episodes",
      "iterations", "entropy_coeff", "value_coeff", "max_grad_norm",
      "adam_beta1", "adam_beta2", "adam_epsilon", "hidden_sizes", "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) config_error("unknown field '" + key + "'");
  }
  TrainingConfig c;
  try {
    auto number = [&](const char* key, double& out) {
      if (doc.contains(key)) out = doc.at(key).get<double>();
    };
    auto count = [&](const char* key, std::size_t& out) {
      if (!doc.contains(key)) return;
      if (!doc.at(key).is_number_unsigned()) {
        config_error(std::string(key) + " must be a non-negative integer");
      }
      out = doc.at(key).get<std::size_t>();
    };
    number("gamma", c.gamma);
    number("gae_lambda", c.gae_lambda);
    number("clip_epsilon", c.clip_epsilon);
    number("learning_rate", c.learning_rate);
    count("epochs_per_iteration", c.epochs_per_iteration);
    count("minibatch_size", c.minibatch_size);
    count("rollout_episodes", c.rollout_episodes);
    count("iterations", c.iterations);
    number("entropy_coeff", c.entropy_coeff);
    number("value_coeff", c.value_coeff);
    number("max_grad_norm", c.max_grad_norm);
    number("adam_beta1", c.adam_beta1);
    number("adam_beta2", c.adam_beta2);
    number("adam_epsilon", c.adam_epsilon);
    if (doc.contains("hidden_sizes")) {
      c.hidden_sizes = doc.at("hidden_sizes").get<std::vector<std::size_t>>();
    }
    if (doc.contains("seed")) {
      if (!doc.at("seed").is_number_unsigned()) config_error("seed must be unsigned");
      c.seed = doc.at("seed").get<std::uint64_t>();
    }
  } catch (const Json::exception& e) {
    config_error(std::string("field type mismatch: ") + e.what());
  }
  validate_config(c);
  return c;
}

GaeResult gae_advantages(std::span<const double> rewards,
                         std::span<const double> values, double terminal_value,
                         double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw Error(ErrorCode::kShape, "rewards and values differ in length");
  }
  if (rewards.empty()) throw Error(ErrorCode::kShape, "empty trajectory");
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = t + 1 < n ? values[t + 1] : terminal_value;
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

SurrogateResult ppo_surrogate(const PolicyParameters& params, const Batch& batch,
                              const TrainingConfig& config) {
  const std::size_t n = batch.size();
  if (n == 0) throw Error(ErrorCode::kShape, "empty batch");
  if (batch.features.size() != n || batch.old_log_probs.size() != n ||
      batch.advantages.size() != n || batch.returns.size() != n) {
    throw Error(ErrorCode::kShape, "batch columns differ in length");
  }
  check_finite(params);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double eps = config.clip_epsilon;
  SurrogateResult out;
  out.grad.assign(params.values.size(), 0.0);
  std::vector<double> d_logits(params.action_count());

  for (std::size_t i = 0; i < n; ++i) {
    const ForwardCache cache = network_forward_cached(params, batch.features[i]);
    const auto log_p = log_softmax(cache.output.logits);
    const std::size_t a = batch.actions[i];
    if (a >= log_p.size()) throw Error(ErrorCode::kShape, "action out of range");

    const double log_ratio = log_p[a] - batch.old_log_probs[i];
    const double ratio = std::exp(log_ratio);
    require_finite(ratio, "ratio");
    const double adv = batch.advantages[i];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    double d_log_prob = 0.0;
    if (unclipped <= clipped) {
      out.policy_loss -= unclipped * inv_n;
      d_log_prob = -ratio * adv * inv_n;
    } else {
      out.policy_loss -= clipped * inv_n;
    }

    double entropy = 0.0;
    std::vector<double> p(log_p.size());
    for (std::size_t j = 0; j < log_p.size(); ++j) {
      p[j] = std::exp(log_p[j]);
      if (p[j] > 0.0) entropy -= p[j] * log_p[j];
    }
    out.entropy += entropy * inv_n;

    const double v_err = cache.output.value - batch.returns[i];
    out.value_loss += v_err * v_err * inv_n;
    const double d_value = config.value_coeff * 2.0 * v_err * inv_n;

    for (std::size_t j = 0; j < d_logits.size(); ++j) {
      const double indicator = j == a ? 1.0 : 0.0;
      d_logits[j] = d_log_prob * (indicator - p[j]);
      if (p[j] > 0.0) {
        d_logits[j] += config.entropy_coeff * inv_n * p[j] * (log_p[j] + entropy);
      }
    }

    out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
    if (std::abs(ratio - 1.0) > eps) out.clip_fraction += inv_n;

    network_backward(params, cache, d_logits, d_value, out.grad);
  }

  require_finite(out.policy_loss, "policy_loss");
  require_finite(out.value_loss, "value_loss");
  require_finite(out.entropy, "entropy");
  out.loss = out.policy_loss + config.value_coeff * out.value_loss -
             config.entropy_coeff * out.entropy;
  for (double g : out.grad) require_finite(g, "gradient");
  return out;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2,
           double epsilon)
    : m_(size, 0.0),
      v_(size, 0.0),
      learning_rate_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
  }
}

Json to_json(const TrainingStats& stats) {
  Json rows = Json::array();
  for (const auto& s : stats.iterations) {
    Json row;
    row["iteration"] = s.iteration;
    row["mean_return"] = s.mean_return;
    row["mean_length"] = s.mean_length;
    row["policy_loss"] = s.policy_loss;
    row["value_loss"] = s.value_loss;
    row["entropy"] = s.entropy;
    row["approx_kl"] = s.approx_kl;
    row["clip_fraction"] = s.clip_fraction;
    rows.push_back(std::move(row));
  }
  return Json{{"iterations", std::move(rows)}};
}

TrainingResult ppo_train(const pomdp::PomdpModel& model,
                         const TrainingConfig& config,
                         const ProgressCallback& progress) {
  validate_config(config);
  pomdp::require_valid(model);
  const PolicySpaces spaces = PolicySpaces::of(model);

  std::vector<std::size_t> sizes{spaces.feature_count()};
  sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  sizes.push_back(spaces.num_actions);

  Rng init_rng(derive_seed(config.seed, 0));
  Rng shuffle_rng(derive_seed(config.seed, 1));
  const std::uint64_t rollout_seed = derive_seed(config.seed, 2);

  TrainingResult result;
  result.params = init_parameters(sizes, init_rng);
  Adam adam(result.params.values.size(), config.learning_rate, config.adam_beta1,
            config.adam_beta2, config.adam_epsilon);

  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    const NetworkPolicy current(spaces, result.params);
    Batch batch;
    double return_sum = 0.0;
    double length_sum = 0.0;

    for (std::size_t e = 0; e < config.rollout_episodes; ++e) {
      const std::uint64_t seed =
          derive_seed(rollout_seed, iter * config.rollout_episodes + e);
      pomdp::EpisodeRunner runner(model, current, seed, model.horizon);
      std::vector<double> rewards;
      std::vector<double> values;
      while (!runner.done()) {
        auto x = features(spaces, runner.input());
        const ForwardCache cache = network_forward_cached(result.params, x);
        const auto log_p = log_softmax(cache.output.logits);
        ActionDistribution dist{softmax(cache.output.logits)};
        const pomdp::Transition tr = runner.advance(dist);
        batch.features.push_back(std::move(x));
        batch.actions.push_back(tr.defender_action);
        batch.old_log_probs.push_back(log_p[tr.defender_action]);
        rewards.push_back(tr.outcome.reward);
        values.push_back(cache.output.value);
      }
      const GaeResult gae = gae_advantages(rewards, values, 0.0, config.gamma,
                                           config.gae_lambda);
      batch.advantages.insert(batch.advantages.end(), gae.advantages.begin(),
                              gae.advantages.end());
      batch.returns.insert(batch.returns.end(), gae.returns.begin(),
                           gae.returns.end());
      return_sum += runner.cumulative_reward();
      length_sum += static_cast<double>(runner.t());
    }

    IterationStats stats;
    stats.iteration = iter;
    stats.mean_return = return_sum / static_cast<double>(config.rollout_episodes);
    stats.mean_length = length_sum / static_cast<double>(config.rollout_episodes);

    std::size_t updates = 0;
    Batch mini;
    for (std::size_t epoch = 0; epoch < config.epochs_per_iteration; ++epoch) {
      const auto order = shuffled_indices(batch.size(), shuffle_rng);
      for (std::size_t start = 0; start < order.size();
           start += config.minibatch_size) {
        const std::size_t end = std::min(order.size(), start + config.minibatch_size);
        mini = Batch{};
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t i = order[k];
          mini.features.push_back(batch.features[i]);
          mini.actions.push_back(batch.actions[i]);
          mini.old_log_probs.push_back(batch.old_log_probs[i]);
          mini.advantages.push_back(batch.advantages[i]);
          mini.returns.push_back(batch.returns[i]);
        }
        const double m = static_cast<double>(mini.size());
        double mean = 0.0;
        for (double a : mini.advantages) mean += a / m;
        double var = 0.0;
        for (double a : mini.advantages) var += (a - mean) * (a - mean) / m;
        const double scale = 1.0 / (std::sqrt(var) + 1e-8);
        for (double& a : mini.advantages) a = (a - mean) * scale;

        PolicyParameters checkpoint = result.params;
        SurrogateResult s;
        try {
          s = ppo_surrogate(result.params, mini, config);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNumeric) throw;
          throw TrainingAborted(e.what(), std::move(checkpoint));
        }
        if (config.max_grad_norm > 0.0) {
          double norm = 0.0;
          for (double g : s.grad) norm += g * g;
          norm = std::sqrt(norm);
          if (norm > config.max_grad_norm) {
            const double k = config.max_grad_norm / norm;
            for (double& g : s.grad) g *= k;
          }
        }
        adam.step(result.params.values, s.grad);
        for (double v : result.params.values) {
          if (!std::isfinite(v)) {
            throw TrainingAborted("parameters diverged at iteration " +
                                      std::to_string(iter),
                                  std::move(checkpoint));
          }
        }
        stats.policy_loss += s.policy_loss;
        stats.value_loss += s.value_loss;
        stats.entropy += s.entropy;
        stats.approx_kl += s.approx_kl;
        stats.clip_fraction += s.clip_fraction;
        ++updates;
      }
    }
    if (updates > 0) {
      const double u = static_cast<double>(updates);
      stats.policy_loss /= u;
      stats.value_loss /= u;
      stats.entropy /= u;
      stats.approx_kl /= u;
      stats.clip_fraction /= u;
    }
    ++result.params.version;
    result.stats.iterations.push_back(stats);
    if (progress) progress(stats);
  }
  return result;
}

}  // namespace polexam::policy
