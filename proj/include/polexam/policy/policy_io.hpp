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

#ifndef POLEXAM_POLICY_POLICY_IO_HPP_
#define POLEXAM_POLICY_POLICY_IO_HPP_

#include <memory>
#include <string>
#include <string_view>

#include "polexam/json.hpp"
#include "polexam/policy/policy.hpp"

namespace polexam::policy {

inline constexpr int kPolicyFormatVersion = 1;

/**
 * Policy file: one compact JSON object, fields in this order:
 *
 *   format_version, policy_kind, num_states, num_actions, num_metrics,
 *   metric_bins, layer_sizes, then kind-specific fields:
 *     threshold: alpha, intrusion_states, defend_action, idle_action
 *     constant:  action
 *     network:   activation ("tanh"), version, parameters
 *
 * layer_sizes is empty for non-network kinds. Doubles use the shortest
 * decimal form that round-trips. See docs/policy-format.md.
 */
std::string save_policy(const Policy& policy);
Json policy_to_json(const Policy& policy);

/// Throws Error(kLoad) on malformed, truncated or inconsistent payloads.
std::shared_ptr<const Policy> load_policy(std::string_view bytes);
std::shared_ptr<const Policy> policy_from_json(const Json& doc);

}  // namespace polexam::policy

#endif  // POLEXAM_POLICY_POLICY_IO_HPP_
