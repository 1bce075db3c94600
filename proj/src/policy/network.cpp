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

#include "polexam/policy/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "polexam/error.hpp"
#include "polexam/json.hpp"

namespace polexam::policy {

namespace {

std::vector<DenseSlot> make_slots(const std::vector<std::size_t>& sizes) {
  std::vector<DenseSlot> slots;
  std::size_t offset = 0;
  auto add = [&](std::size_t rows, std::size_t cols) {
    DenseSlot slot{offset, offset + rows * cols, rows, cols};
    offset += rows * cols + rows;
    slots.push_back(slot);
  };
  const std::size_t hidden = sizes.size() - 2;
  for (std::size_t k = 0; k < hidden; ++k) add(sizes[k + 1], sizes[k]);
  add(sizes.back(), sizes[hidden]);
  add(1, sizes[hidden]);
  return slots;
}

void dense(const std::vector<double>& values, const DenseSlot& slot,
           std::span<const double> in, std::vector<double>& out) {
  out.assign(slot.rows, 0.0);
  for (std::size_t r = 0; r < slot.rows; ++r) {
    const double* w = values.data() + slot.weight_offset + r * slot.cols;
    double acc = values[slot.bias_offset + r];
    for (std::size_t c = 0; c < slot.cols; ++c) acc += w[c] * in[c];
    out[r] = acc;
  }
}

// Fills `slot` with an orthogonal matrix scaled by `gain`.
void orthogonal(std::vector<double>& values, const DenseSlot& slot, double gain,
                Rng& rng) {
  const std::size_t tall = std::max(slot.rows, slot.cols);
  const std::size_t wide = std::min(slot.rows, slot.cols);
  // `wide` orthonormal vectors of length `tall` by Gram-Schmidt.
  std::vector<std::vector<double>> basis;
  while (basis.size() < wide) {
    std::vector<double> v(tall);
    for (double& x : v) x = rng.normal();
    for (const auto& u : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < tall; ++i) dot += u[i] * v[i];
      for (std::size_t i = 0; i < tall; ++i) v[i] -= dot * u[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  for (std::size_t r = 0; r < slot.rows; ++r) {
    for (std::size_t c = 0; c < slot.cols; ++c) {
      const double w = slot.rows >= slot.cols ? basis[c][r] : basis[r][c];
      values[slot.weight_offset + r * slot.cols + c] = gain * w;
    }
  }
}

}  // namespace

std::size_t parameter_count(const std::vector<std::size_t>& layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw Error(ErrorCode::kShape, "layer chain needs input and output sizes");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw Error(ErrorCode::kShape, "layer width must be positive");
  }
  const auto slots = make_slots(layer_sizes);
  return slots.back().bias_offset + 1;
}

PolicyParameters PolicyParameters::zeros(std::vector<std::size_t> layer_sizes) {
  PolicyParameters p;
  const std::size_t n = parameter_count(layer_sizes);
  p.layer_sizes = std::move(layer_sizes);
  p.values.assign(n, 0.0);
  return p;
}

std::vector<DenseSlot> PolicyParameters::slots() const {
  return make_slots(layer_sizes);
}

ForwardCache network_forward_cached(const PolicyParameters& params,
                                    std::span<const double> features) {
  if (features.size() != params.input_size()) {
    throw Error(ErrorCode::kIncompatible,
                "network expects " + std::to_string(params.input_size()) +
                    " features, got " + std::to_string(features.size()));
  }
  const auto slots = params.slots();
  const std::size_t hidden = params.hidden_layer_count();
  ForwardCache cache;
  cache.activations.reserve(hidden + 1);
  cache.activations.emplace_back(features.begin(), features.end());
  std::vector<double> z;
  for (std::size_t k = 0; k < hidden; ++k) {
    dense(params.values, slots[k], cache.activations.back(), z);
    for (double& x : z) x = std::tanh(x);
    cache.activations.push_back(z);
  }
  dense(params.values, slots[hidden], cache.activations.back(),
        cache.output.logits);
  dense(params.values, slots[hidden + 1], cache.activations.back(), z);
  cache.output.value = z[0];
  for (double x : cache.output.logits) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNumeric, "non-finite logit");
  }
  if (!std::isfinite(cache.output.value)) {
    throw Error(ErrorCode::kNumeric, "non-finite value estimate");
  }
  return cache;
}

ForwardResult network_forward(const PolicyParameters& params,
                              std::span<const double> features) {
  check_finite(params);
  return network_forward_cached(params, features).output;
}

void network_backward(const PolicyParameters& params, const ForwardCache& cache,
                      std::span<const double> d_logits, double d_value,
                      std::span<double> grad) {
  const auto slots = params.slots();
  const std::size_t hidden = params.hidden_layer_count();
  const auto& top = cache.activations.back();
  const std::size_t width = top.size();
  const double* v = params.values.data();
  double* g = grad.data();

  // Gradient w.r.t. the last trunk output, from both heads.
  std::vector<double> d_top(width, 0.0);
  const DenseSlot& pi = slots[hidden];
  for (std::size_t r = 0; r < pi.rows; ++r) {
    const double d = d_logits[r];
    if (d == 0.0) continue;
    g[pi.bias_offset + r] += d;
    const double* w = v + pi.weight_offset + r * pi.cols;
    double* gw = g + pi.weight_offset + r * pi.cols;
    for (std::size_t c = 0; c < pi.cols; ++c) {
      gw[c] += d * top[c];
      d_top[c] += d * w[c];
    }
  }
  const DenseSlot& vh = slots[hidden + 1];
  if (d_value != 0.0) {
    g[vh.bias_offset] += d_value;
    for (std::size_t c = 0; c < vh.cols; ++c) {
      g[vh.weight_offset + c] += d_value * top[c];
      d_top[c] += d_value * v[vh.weight_offset + c];
    }
  }

  std::vector<double> d_out = std::move(d_top);
  for (std::size_t k = hidden; k-- > 0;) {
    const DenseSlot& slot = slots[k];
    const auto& out = cache.activations[k + 1];
    const auto& in = cache.activations[k];
    std::vector<double> d_in(slot.cols, 0.0);
    for (std::size_t r = 0; r < slot.rows; ++r) {
      const double dz = d_out[r] * (1.0 - out[r] * out[r]);
      if (dz == 0.0) continue;
      g[slot.bias_offset + r] += dz;
      const double* w = v + slot.weight_offset + r * slot.cols;
      double* gw = g + slot.weight_offset + r * slot.cols;
      for (std::size_t c = 0; c < slot.cols; ++c) {
        gw[c] += dz * in[c];
        d_in[c] += dz * w[c];
      }
    }
    d_out = std::move(d_in);
  }
}

void check_finite(const PolicyParameters& params) {
  for (double x : params.values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNumeric, "non-finite network parameter");
    }
  }
}

PolicyParameters init_parameters(std::vector<std::size_t> layer_sizes,
                                 Rng& rng) {
  PolicyParameters p = PolicyParameters::zeros(std::move(layer_sizes));
  const auto slots = p.slots();
  const std::size_t hidden = p.hidden_layer_count();
  for (std::size_t k = 0; k < hidden; ++k) {
    orthogonal(p.values, slots[k], std::sqrt(2.0), rng);
  }
  orthogonal(p.values, slots[hidden + 1], 1.0, rng);
  return p;
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - top);
  const double log_z = top + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

NetworkPolicy::NetworkPolicy(PolicySpaces spaces, PolicyParameters params)
    : Policy(std::move(spaces)), params_(std::move(params)) {
  if (params_.input_size() != this->spaces().feature_count() ||
      params_.action_count() != this->spaces().num_actions) {
    throw Error(ErrorCode::kIncompatible,
                "network shape does not match policy spaces");
  }
  if (params_.values.size() != parameter_count(params_.layer_sizes)) {
    throw Error(ErrorCode::kShape, "parameter vector has the wrong length");
  }
  check_finite(params_);
}

ActionDistribution NetworkPolicy::predict(const PolicyInput& input) const {
  check_input(spaces(), input);
  const auto x = features(spaces(), input);
  const auto cache = network_forward_cached(params_, x);
  return {softmax(cache.output.logits)};
}

std::uint64_t NetworkPolicy::fingerprint() const {
  std::string bytes;
  for (std::size_t s : params_.layer_sizes) bytes += std::to_string(s) + ",";
  const auto* raw = reinterpret_cast<const char*>(params_.values.data());
  bytes.append(raw, params_.values.size() * sizeof(double));
  return fnv1a64(bytes);
}

}  // namespace polexam::policy
