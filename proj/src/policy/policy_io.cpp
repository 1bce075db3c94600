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

#include "polexam/policy/policy_io.hpp"

#include <set>

#include "polexam/error.hpp"
#include "polexam/policy/baselines.hpp"
#include "polexam/policy/network.hpp"

namespace polexam::policy {

namespace {

[[noreturn]] void load_error(const std::string& message) {
  throw Error(ErrorCode::kLoad, "policy load: " + message);
}

}  // namespace

Json policy_to_json(const Policy& policy) {
  const PolicySpaces& spaces = policy.spaces();
  Json doc;
  doc["format_version"] = kPolicyFormatVersion;
  doc["policy_kind"] = std::string(policy_kind_name(policy.kind()));
  doc["num_states"] = spaces.num_states;
  doc["num_actions"] = spaces.num_actions;
  doc["num_metrics"] = spaces.metric_bins.size();
  doc["metric_bins"] = spaces.metric_bins;
  doc["layer_sizes"] = Json::array();
  switch (policy.kind()) {
    case PolicyKind::kThreshold: {
      const auto& p = static_cast<const ThresholdPolicy&>(policy);
      doc["alpha"] = p.alpha();
      doc["intrusion_states"] = p.intrusion_states();
      doc["defend_action"] = p.defend_action();
      doc["idle_action"] = p.idle_action();
      break;
    }
    case PolicyKind::kConstant:
      doc["action"] = static_cast<const ConstantPolicy&>(policy).action();
      break;
    case PolicyKind::kRandom:
      break;
    case PolicyKind::kNetwork: {
      const auto& params = static_cast<const NetworkPolicy&>(policy).parameters();
      doc["layer_sizes"] = params.layer_sizes;
      doc["activation"] = "tanh";
      doc["version"] = params.version;
      doc["parameters"] = params.values;
      break;
    }
  }
  return doc;
}

std::string save_policy(const Policy& policy) {
  return policy_to_json(policy).dump() + "\n";
}

std::shared_ptr<const Policy> policy_from_json(const Json& doc) {
  if (!doc.is_object()) load_error("document must be a JSON object");
  try {
    if (!doc.contains("format_version")) load_error("missing format_version");
    const int version = doc.at("format_version").get<int>();
    if (version != kPolicyFormatVersion) {
      load_error("unsupported format_version " + std::to_string(version));
    }
    PolicySpaces spaces;
    spaces.num_states = doc.at("num_states").get<std::size_t>();
    spaces.num_actions = doc.at("num_actions").get<std::size_t>();
    spaces.metric_bins = doc.at("metric_bins").get<std::vector<std::size_t>>();
    if (doc.at("num_metrics").get<std::size_t>() != spaces.metric_bins.size()) {
      load_error("num_metrics does not match metric_bins");
    }
    if (spaces.num_states < 1 || spaces.num_actions < 1) {
      load_error("empty state or action space");
    }
    for (std::size_t b : spaces.metric_bins) {
      if (b < 2) load_error("metric with fewer than 2 bins");
    }
    const std::string kind = doc.at("policy_kind").get<std::string>();
    if (kind == "threshold") {
      return std::make_shared<ThresholdPolicy>(
          spaces, doc.at("alpha").get<double>(),
          doc.at("intrusion_states").get<std::vector<pomdp::StateId>>(),
          doc.at("defend_action").get<pomdp::ActionId>(),
          doc.at("idle_action").get<pomdp::ActionId>());
    }
    if (kind == "random") return std::make_shared<RandomPolicy>(spaces);
    if (kind == "constant") {
      return std::make_shared<ConstantPolicy>(
          spaces, doc.at("action").get<pomdp::ActionId>());
    }
    if (kind == "network") {
      if (doc.at("activation").get<std::string>() != "tanh") {
        load_error("unsupported activation");
      }
      PolicyParameters params;
      params.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
      params.values = doc.at("parameters").get<std::vector<double>>();
      params.version = doc.at("version").get<std::uint64_t>();
      if (params.values.size() != parameter_count(params.layer_sizes)) {
        load_error("parameter count does not match layer_sizes");
      }
      return std::make_shared<NetworkPolicy>(spaces, std::move(params));
    }
    load_error("unknown policy_kind '" + kind + "'");
  } catch (const Json::exception& e) {
    load_error(std::string("missing or mistyped field: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kLoad) throw;
    load_error(e.what());
  }
}

std::shared_ptr<const Policy> load_policy(std::string_view bytes) {
  Json doc;
  try {
    doc = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error&) {
    load_error("payload is not valid JSON (truncated or corrupt)");
  }
  return policy_from_json(doc);
}

}  // namespace polexam::policy
