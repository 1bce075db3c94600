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

#ifndef POLEXAM_POLICY_POLICY_HPP_
#define POLEXAM_POLICY_POLICY_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "polexam/pomdp/model.hpp"

namespace polexam::policy {

using pomdp::Belief;
using pomdp::Observation;

/// Dimensions a policy was built for. Two spaces are compatible iff equal.
struct PolicySpaces {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<std::size_t> metric_bins;

  std::size_t feature_count() const {
    return num_states + metric_bins.size() + 1;
  }

  static PolicySpaces of(const pomdp::PomdpModel& model);

  friend bool operator==(const PolicySpaces&, const PolicySpaces&) = default;
};

/// What a policy sees before choosing the action of the next step.
struct PolicyInput {
  Belief belief;
  /// Bins of the latest observation; all zeros before the first one.
  Observation last_observation;
  /// Completed steps divided by the horizon, in [0,1].
  double t_normalized = 0.0;
};

struct ActionDistribution {
  std::vector<double> probs;

  friend bool operator==(const ActionDistribution&,
                         const ActionDistribution&) = default;
};

/// belief, then observation bins scaled by 1/(B_m - 1), then time.
std::vector<double> features(const PolicySpaces& spaces,
                             const PolicyInput& input);

/// Throws Error(kIncompatible) if the input does not fit `spaces`.
void check_input(const PolicySpaces& spaces, const PolicyInput& input);

enum class PolicyKind { kThreshold, kRandom, kConstant, kNetwork };

std::string_view policy_kind_name(PolicyKind kind);

/// pi(a | input). Implementations are immutable and safe to share across
/// threads.
class Policy {
 public:
  explicit Policy(PolicySpaces spaces) : spaces_(std::move(spaces)) {}
  virtual ~Policy() = default;

  virtual PolicyKind kind() const = 0;
  virtual ActionDistribution predict(const PolicyInput& input) const = 0;
  /// Stable hash of the policy's parameters.
  virtual std::uint64_t fingerprint() const = 0;

  const PolicySpaces& spaces() const { return spaces_; }

 private:
  PolicySpaces spaces_;
};

/// Throws Error(kIncompatible) if the policy was built for other spaces.
void check_compatible(const pomdp::PomdpModel& model, const Policy& policy);

}  // namespace polexam::policy

#endif  // POLEXAM_POLICY_POLICY_HPP_
