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

#include "polexam/pomdp/scenario.hpp"

#include <cmath>
#include <set>

#include "polexam/error.hpp"

namespace polexam::pomdp {

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kConfig, "scenario config: " + message);
}

void require_probability(double p, const std::string& field) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    config_error(field + " must be in [0,1]");
  }
}

template <std::size_t N>
void require_distribution(const std::array<double, N>& row,
                          const std::string& field) {
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    require_probability(row[i], field);
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    config_error(field + " must sum to 1");
  }
}

void require_means(const MetricMeans& means, const std::string& field) {
  for (double v : means) {
    if (!std::isfinite(v) || v < 0.0 || v > 1000.0) {
      config_error(field + " means must be in [0,1000]");
    }
  }
}

template <std::size_t N>
Json keyed(const std::array<double, N>& values,
           const std::array<const char*, N>& names) {
  Json out = Json::object();
  for (std::size_t i = 0; i < N; ++i) out[names[i]] = values[i];
  return out;
}

template <std::size_t N>
std::array<double, N> unkeyed(const Json& doc,
                              const std::array<const char*, N>& names,
                              std::array<double, N> values,
                              const std::string& field) {
  if (!doc.is_object()) config_error(field + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    std::size_t i = 0;
    while (i < N && key != names[i]) ++i;
    if (i == N) config_error(field + " has unknown key '" + key + "'");
    if (!value.is_number()) config_error(field + "." + key + " must be a number");
    values[i] = value.template get<double>();
  }
  return values;
}

ObservationKernel parametric_kernel(const ScenarioConfig& c) {
  ObservationKernel z(4);
  for (StateId s = 0; s < 4; ++s) {
    z[s].resize(4);
    for (AttackerActionId a = 0; a < 4; ++a) {
      for (std::size_t m = 0; m < 3; ++m) {
        const double base = c.client_traffic[m] + c.attack_signature[a][m];
        auto quiet = binned_poisson(base, c.bins);
        const auto burst = binned_poisson(base + c.client_burst[m], c.bins);
        for (std::size_t b = 0; b < c.bins; ++b) {
          quiet[b] = (1.0 - c.client_burst_prob) * quiet[b] +
                     c.client_burst_prob * burst[b];
        }
        z[s][a].push_back(std::move(quiet));
      }
    }
  }
  return z;
}

}  // namespace

std::vector<double> binned_poisson(double mean, std::size_t bins) {
  std::vector<double> pmf(bins, 0.0);
  double term = std::exp(-mean);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < bins; ++k) {
    pmf[k] = term;
    total += term;
    term *= mean / static_cast<double>(k + 1);
  }
  pmf[bins - 1] = std::max(0.0, 1.0 - total);
  return pmf;
}

void validate_config(const ScenarioConfig& c) {
  if (c.schema_version != kScenarioSchemaVersion) {
    config_error("unsupported schema_version " +
                 std::to_string(c.schema_version));
  }
  if (c.name.empty()) config_error("name must not be empty");
  if (c.horizon < 1 || c.horizon > 100000) {
    config_error("horizon must be in [1,100000]");
  }
  if (c.bins < 2 || c.bins > 1024) config_error("bins must be in [2,1024]");
  if (!std::isfinite(c.service_reward) || c.service_reward < 0.0) {
    config_error("service_reward must be >= 0");
  }
  if (!std::isfinite(c.intrusion_penalty) || c.intrusion_penalty > 0.0) {
    config_error("intrusion_penalty must be <= 0");
  }
  if (!std::isfinite(c.defend_cost) || c.defend_cost > 0.0) {
    config_error("defend_cost must be <= 0");
  }
  if (!std::isfinite(c.false_alarm_penalty) || c.false_alarm_penalty > 0.0) {
    config_error("false_alarm_penalty must be <= 0");
  }
  if (!std::isfinite(c.stop_intrusion_reward) || c.stop_intrusion_reward < 0.0) {
    config_error("stop_intrusion_reward must be >= 0");
  }
  require_probability(c.intrusion_start_prob, "intrusion_start_prob");
  require_probability(c.stage_progression_prob, "stage_progression_prob");
  require_probability(c.client_burst_prob, "client_burst_prob");
  require_distribution(c.initial_distribution, "initial_distribution");
  require_means(c.client_traffic, "client_traffic");
  require_means(c.client_burst, "client_burst");
  for (std::size_t a = 0; a < 4; ++a) {
    require_means(c.attack_signature[a],
                  std::string("attack_signature.") +
                      kIntrusionAttackerActionNames[a]);
  }
  for (std::size_t s = 0; s < 4; ++s) {
    require_distribution(c.attacker_mix[s], std::string("attacker_mix.") +
                                                kIntrusionStateNames[s]);
  }
  if (c.observation_kernel) {
    const auto& z = *c.observation_kernel;
    bool shape_ok = z.size() == 4;
    for (std::size_t s = 0; shape_ok && s < 4; ++s) {
      shape_ok = z[s].size() == 4;
      for (std::size_t a = 0; shape_ok && a < 4; ++a) {
        shape_ok = z[s][a].size() == 3;
        for (std::size_t m = 0; shape_ok && m < 3; ++m) {
          shape_ok = z[s][a][m].size() == c.bins;
        }
      }
    }
    if (!shape_ok) {
      config_error("observation_kernel must have shape [4][4][3][bins]");
    }
  }
}

Json to_json(const ScenarioConfig& c) {
  Json doc;
  doc["schema_version"] = c.schema_version;
  doc["name"] = c.name;
  doc["description"] = c.description;
  doc["horizon"] = c.horizon;
  doc["bins"] = c.bins;
  doc["service_reward"] = c.service_reward;
  doc["intrusion_penalty"] = c.intrusion_penalty;
  doc["defend_cost"] = c.defend_cost;
  doc["false_alarm_penalty"] = c.false_alarm_penalty;
  doc["stop_intrusion_reward"] = c.stop_intrusion_reward;
  doc["intrusion_start_prob"] = c.intrusion_start_prob;
  doc["stage_progression_prob"] = c.stage_progression_prob;
  doc["initial_distribution"] = keyed(c.initial_distribution, kIntrusionStateNames);
  doc["client_traffic"] = keyed(c.client_traffic, kIntrusionMetricNames);
  doc["client_burst_prob"] = c.client_burst_prob;
  doc["client_burst"] = keyed(c.client_burst, kIntrusionMetricNames);
  Json signatures = Json::object();
  for (std::size_t a = 0; a < 4; ++a) {
    signatures[kIntrusionAttackerActionNames[a]] =
        keyed(c.attack_signature[a], kIntrusionMetricNames);
  }
  doc["attack_signature"] = std::move(signatures);
  Json mixes = Json::object();
  for (std::size_t s = 0; s < 4; ++s) {
    mixes[kIntrusionStateNames[s]] =
        keyed(c.attacker_mix[s], kIntrusionAttackerActionNames);
  }
  doc["attacker_mix"] = std::move(mixes);
  doc["observation_kernel"] =
      c.observation_kernel ? Json(*c.observation_kernel) : Json(nullptr);
  doc["base_scenario"] = c.base_scenario;
  return doc;
}

ScenarioConfig scenario_config_from_json(const Json& doc) {
  if (!doc.is_object()) config_error("document must be an object");
  ScenarioConfig c;
  static const std::set<std::string> known = {
      "schema_version", "name", "description", "horizon", "bins",
      "service_reward", "intrusion_penalty", "defend_cost",
      "false_alarm_penalty", "stop_intrusion_reward", "intrusion_start_prob",
      "stage_progression_prob", "initial_distribution", "client_traffic",
      "client_burst_prob", "client_burst", "attack_signature", "attacker_mix",
      "observation_kernel", "base_scenario"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) config_error("unknown field '" + key + "'");
  }
  try {
    if (!doc.contains("schema_version")) config_error("missing schema_version");
    c.schema_version = doc.at("schema_version").get<int>();
    auto number = [&](const char* key, double& out) {
      if (doc.contains(key)) out = doc.at(key).get<double>();
    };
    auto count = [&](const char* key, std::size_t& out) {
      if (!doc.contains(key)) return;
      const auto& v = doc.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        config_error(std::string(key) + " must be a non-negative integer");
      }
      out = v.get<std::size_t>();
    };
    if (doc.contains("name")) c.name = doc.at("name").get<std::string>();
    if (doc.contains("description")) {
      c.description = doc.at("description").get<std::string>();
    }
    count("horizon", c.horizon);
    count("bins", c.bins);
    number("service_reward", c.service_reward);
    number("intrusion_penalty", c.intrusion_penalty);
    number("defend_cost", c.defend_cost);
    number("false_alarm_penalty", c.false_alarm_penalty);
    number("stop_intrusion_reward", c.stop_intrusion_reward);
    number("intrusion_start_prob", c.intrusion_start_prob);
    number("stage_progression_prob", c.stage_progression_prob);
    number("client_burst_prob", c.client_burst_prob);
    if (doc.contains("initial_distribution")) {
      c.initial_distribution =
          unkeyed(doc.at("initial_distribution"), kIntrusionStateNames,
                  std::array<double, 4>{}, "initial_distribution");
    }
    if (doc.contains("client_traffic")) {
      c.client_traffic = unkeyed(doc.at("client_traffic"), kIntrusionMetricNames,
                                 c.client_traffic, "client_traffic");
    }
    if (doc.contains("client_burst")) {
      c.client_burst = unkeyed(doc.at("client_burst"), kIntrusionMetricNames,
                               c.client_burst, "client_burst");
    }
    if (doc.contains("attack_signature")) {
      const auto& sig = doc.at("attack_signature");
      if (!sig.is_object()) config_error("attack_signature must be an object");
      for (const auto& [key, value] : sig.items()) {
        std::size_t a = 0;
        while (a < 4 && key != kIntrusionAttackerActionNames[a]) ++a;
        if (a == 4) config_error("attack_signature has unknown key '" + key + "'");
        c.attack_signature[a] = unkeyed(value, kIntrusionMetricNames,
                                        c.attack_signature[a],
                                        "attack_signature." + key);
      }
    }
    if (doc.contains("attacker_mix")) {
      const auto& mix = doc.at("attacker_mix");
      if (!mix.is_object()) config_error("attacker_mix must be an object");
      for (const auto& [key, value] : mix.items()) {
        std::size_t s = 0;
        while (s < 4 && key != kIntrusionStateNames[s]) ++s;
        if (s == 4) config_error("attacker_mix has unknown key '" + key + "'");
        c.attacker_mix[s] = unkeyed(value, kIntrusionAttackerActionNames,
                                    AttackerMix{}, "attacker_mix." + key);
      }
    }
    if (doc.contains("observation_kernel") &&
        !doc.at("observation_kernel").is_null()) {
      c.observation_kernel = doc.at("observation_kernel").get<ObservationKernel>();
    }
    if (doc.contains("base_scenario")) {
      c.base_scenario = doc.at("base_scenario").get<std::string>();
    }
  } catch (const Json::exception& e) {
    config_error(std::string("field type mismatch: ") + e.what());
  }
  validate_config(c);
  return c;
}

std::string config_hash(const ScenarioConfig& config) {
  return hex64(fnv1a64(to_json(config).dump()));
}

PomdpModel build_intrusion_scenario(const ScenarioConfig& c) {
  validate_config(c);
  PomdpModel model;
  model.name = c.name;
  model.config_hash = config_hash(c);
  model.base_scenario = c.base_scenario;
  for (const char* n : kIntrusionStateNames) model.state_names.emplace_back(n);
  model.defender_actions = {{kIntrusionDefenderActionNames[kContinue], 0.0},
                            {kIntrusionDefenderActionNames[kDefend], -c.defend_cost}};
  for (const char* n : kIntrusionAttackerActionNames) {
    model.attacker_actions.emplace_back(n);
  }
  for (const char* n : kIntrusionMetricNames) {
    model.metrics.push_back({n, c.bins});
  }

  const double p0 = c.intrusion_start_prob;
  const double q = c.stage_progression_prob;
  const std::vector<double> to_healthy = {1.0, 0.0, 0.0, 0.0};
  model.transition = {
      {{1.0 - p0, p0, 0.0, 0.0}, to_healthy},
      {{0.0, 1.0 - q, q, 0.0}, to_healthy},
      {{0.0, 0.0, 1.0 - q, q}, to_healthy},
      {{0.0, 0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 1.0}},
  };

  for (const auto& mix : c.attacker_mix) {
    model.attacker_behavior.emplace_back(mix.begin(), mix.end());
  }
  model.observation =
      c.observation_kernel ? *c.observation_kernel : parametric_kernel(c);

  const double intruded_continue = c.service_reward + c.intrusion_penalty;
  const double intruded_defend = c.defend_cost + c.stop_intrusion_reward;
  model.reward = {
      {c.service_reward, c.defend_cost + c.false_alarm_penalty},
      {intruded_continue, intruded_defend},
      {intruded_continue, intruded_defend},
      {c.intrusion_penalty, c.intrusion_penalty},
  };
  model.initial_distribution.assign(c.initial_distribution.begin(),
                                    c.initial_distribution.end());
  model.horizon = c.horizon;
  model.terminal_states = {kBreached};
  model.nominal_state = kHealthy;
  model.defend_action = kDefend;

  require_valid(model);
  return model;
}

std::vector<ScenarioConfig> builtin_scenarios() {
  ScenarioConfig standard;
  standard.description =
      "Attacker starts with probability 0.1 per step and progresses "
      "recon -> compromised -> breached.";

  ScenarioConfig no_attack;
  no_attack.name = "intrusion-no-attack";
  no_attack.description =
      "No intrusion ever starts; client traffic bursts frequently.";
  no_attack.intrusion_start_prob = 0.0;
  no_attack.client_burst_prob = 0.3;

  ScenarioConfig ping_scan;
  ping_scan.name = "intrusion-ping-scan";
  ping_scan.description =
      "Reconnaissance uses ping scans only and never progresses.";
  ping_scan.attacker_mix[kRecon] = {0.0, 1.0, 0.0, 0.0};
  ping_scan.stage_progression_prob = 0.0;

  return {standard, no_attack, ping_scan};
}

std::optional<ScenarioConfig> find_builtin_scenario(const std::string& name) {
  for (auto& config : builtin_scenarios()) {
    if (config.name == name) return config;
  }
  return std::nullopt;
}

}  // namespace polexam::pomdp
