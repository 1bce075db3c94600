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

#ifndef POLEXAM_POLICY_NETWORK_HPP_
#define POLEXAM_POLICY_NETWORK_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "polexam/policy/policy.hpp"
#include "polexam/rng.hpp"

namespace polexam::policy {

/// Position of one dense layer inside the flat parameter vector. Weights are
/// row-major `rows x cols` (out x in), followed by `rows` biases.
struct DenseSlot {
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/**
 * Parameters of the actor-critic network.
 *
 * layer_sizes = {input, hidden_1, ..., hidden_k, actions}. The hidden layers
 * form a shared tanh trunk; a linear logits head maps the last hidden layer
 * (or the input when k = 0) to `actions` logits and a linear value head maps
 * it to one scalar.
 *
 * Flat layout: trunk layers in order, then the logits head, then the value
 * head, each as DenseSlot describes.
 */
struct PolicyParameters {
  std::vector<std::size_t> layer_sizes;
  std::vector<double> values;
  std::uint64_t version = 0;

  /// All-zero parameters for the given shape.
  static PolicyParameters zeros(std::vector<std::size_t> layer_sizes);

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t action_count() const { return layer_sizes.back(); }
  std::size_t hidden_layer_count() const { return layer_sizes.size() - 2; }

  /// Slots for trunk layers, then logits head, then value head.
  std::vector<DenseSlot> slots() const;

  friend bool operator==(const PolicyParameters&,
                         const PolicyParameters&) = default;
};

/// Number of doubles needed for a shape. Throws Error(kShape) on a chain
/// with fewer than two entries or a zero width.
std::size_t parameter_count(const std::vector<std::size_t>& layer_sizes);

struct ForwardResult {
  std::vector<double> logits;
  double value = 0.0;
};

/// Activations kept for backpropagation: activations[0] is the input,
/// activations[k] the output of hidden layer k.
struct ForwardCache {
  std::vector<std::vector<double>> activations;
  ForwardResult output;
};

ForwardResult network_forward(const PolicyParameters& params,
                              std::span<const double> features);

ForwardCache network_forward_cached(const PolicyParameters& params,
                                    std::span<const double> features);

/// Adds d(loss)/d(params) to `grad` given the loss gradients with respect to
/// the logits and the value.
void network_backward(const PolicyParameters& params, const ForwardCache& cache,
                      std::span<const double> d_logits, double d_value,
                      std::span<double> grad);

/// Throws Error(kNumeric) if any parameter is not finite.
void check_finite(const PolicyParameters& params);

/// Orthogonal init with gain sqrt(2) for the trunk and 1 for the value head;
/// the logits head and all biases start at zero, so the initial policy is
/// uniform.
PolicyParameters init_parameters(std::vector<std::size_t> layer_sizes,
                                 Rng& rng);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

class NetworkPolicy final : public Policy {
 public:
  NetworkPolicy(PolicySpaces spaces, PolicyParameters params);

  PolicyKind kind() const override { return PolicyKind::kNetwork; }
  ActionDistribution predict(const PolicyInput& input) const override;
  std::uint64_t fingerprint() const override;

  const PolicyParameters& parameters() const { return params_; }

 private:
  PolicyParameters params_;
};

}  // namespace polexam::policy

#endif  // POLEXAM_POLICY_NETWORK_HPP_
