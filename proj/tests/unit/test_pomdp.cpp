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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "polexam/policy/baselines.hpp"
#include "polexam/pomdp/environment.hpp"
#include "polexam/pomdp/episode.hpp"
#include "polexam/pomdp/filter.hpp"
#include "polexam/pomdp/scenario.hpp"
#include "polexam/pomdp/trace.hpp"
#include "random_model.hpp"

using namespace polexam;
using namespace polexam::pomdp;

namespace {

// Two states, one defender action, one attacker action, one metric.
PomdpModel two_state_model() {
  PomdpModel m;
  m.name = "two-state";
  m.state_names = {"a", "b"};
  m.defender_actions = {{"go", 0.0}};
  m.attacker_actions = {"x"};
  m.metrics = {{"m", 2}};
  m.transition = {{{0.9, 0.1}}, {{0.0, 1.0}}};
  m.attacker_behavior = {{1.0}, {1.0}};
  m.observation = {{{{0.8, 0.2}}}, {{{0.3, 0.7}}}};
  m.reward = {{1.0}, {0.0}};
  m.initial_distribution = {0.5, 0.5};
  m.horizon = 3;
  return m;
}

}  // namespace

TEST_CASE("validate_model: built-in scenarios are valid") {
  for (const auto& config : builtin_scenarios()) {
    const auto model = build_intrusion_scenario(config);
    const auto report = validate_model(model);
    CHECK_MESSAGE(report.ok(), config.name);
    CHECK(model.num_states() == 4);
    CHECK(model.num_defender_actions() == 2);
    CHECK(model.num_attacker_actions() == 4);
    CHECK(model.num_metrics() == 3);
  }
}

TEST_CASE("validate_model: reports a bad transition row by (s, a_def)") {
  auto m = two_state_model();
  m.transition[1][0] = {0.0, 0.9};
  const auto report = validate_model(m);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].find("transition[s=1][a_def=0]") != std::string::npos);
  CHECK(report.violations[0].find("sums to") != std::string::npos);
}

TEST_CASE("validate_model: point-mass initial distribution is valid") {
  auto m = two_state_model();
  m.initial_distribution = {1.0, 0.0};
  CHECK(validate_model(m).ok());
}

TEST_CASE("validate_model: collects every violation without stopping") {
  auto m = two_state_model();
  m.transition[0][0] = {0.5, 0.4};
  m.attacker_behavior[1] = {1.5};
  m.initial_distribution = {0.2};
  m.terminal_states = {7};
  m.horizon = 0;
  const auto report = validate_model(m);
  CHECK(report.violations.size() >= 5);
}

TEST_CASE("initial_belief copies rho_1") {
  auto m = two_state_model();
  CHECK(initial_belief(m).probs == std::vector<double>{0.5, 0.5});
  m.state_names.push_back("c");
  m.transition = {{{1, 0, 0}}, {{0, 1, 0}}, {{0, 0, 1}}};
  m.attacker_behavior.push_back({1.0});
  m.observation.push_back({{{0.5, 0.5}}});
  m.reward.push_back({0.0});
  m.initial_distribution = {1.0, 0.0, 0.0};
  CHECK(initial_belief(m).probs == std::vector<double>{1.0, 0.0, 0.0});

  const auto scenario = build_intrusion_scenario(ScenarioConfig{});
  CHECK(initial_belief(scenario).probs == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  m.initial_distribution = {0.5, 0.4, 0.0};
  CHECK_THROWS_AS(initial_belief(m), Error);
}

TEST_CASE("observation_likelihood is the product of per-metric factors") {
  auto m = two_state_model();
  m.observation[0][0][0] = {0.2, 0.8};
  CHECK(observation_likelihood(m, 0, 0, Observation{{1}}) == doctest::Approx(0.8));

  m.metrics.push_back({"m2", 2});
  m.observation[0][0].push_back({0.5, 0.5});
  m.observation[1][0].push_back({0.5, 0.5});
  m.observation[0][0][0] = {0.5, 0.5};
  CHECK(observation_likelihood(m, 0, 0, Observation{{0, 1}}) == 0.25);

  m.observation[0][0][1] = {1.0, 0.0};
  CHECK(observation_likelihood(m, 0, 0, Observation{{0, 1}}) == 0.0);

  CHECK_THROWS_AS(observation_likelihood(m, 5, 0, Observation{{0, 0}}), Error);
  CHECK_THROWS_AS(observation_likelihood(m, 0, 0, Observation{{0, 2}}), Error);
}

TEST_CASE("observation_likelihood sums to 1 over the observation alphabet") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testing::random_model(rng);
    for (StateId s = 0; s < m.num_states(); ++s) {
      for (AttackerActionId x = 0; x < m.num_attacker_actions(); ++x) {
        double total = 0.0;
        Observation o{std::vector<std::size_t>(m.num_metrics(), 0)};
        for (;;) {
          total += observation_likelihood(m, s, x, o);
          std::size_t k = 0;
          while (k < o.bins.size() && ++o.bins[k] == m.metrics[k].bins) {
            o.bins[k++] = 0;
          }
          if (k == o.bins.size()) break;
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("belief_update: uninformative observation with static dynamics") {
  auto m = two_state_model();
  m.transition = {{{1.0, 0.0}}, {{0.0, 1.0}}};
  m.observation = {{{{0.4, 0.6}}}, {{{0.4, 0.6}}}};
  const auto b = belief_update(m, Belief{{0.3, 0.7}}, 0, Observation{{1}});
  CHECK(b.probs[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(b.probs[1] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("belief_update: fully informative observation gives a point mass") {
  auto m = two_state_model();
  m.observation = {{{{1.0, 0.0}}}, {{{0.0, 1.0}}}};
  const auto b = belief_update(m, Belief{{0.5, 0.5}}, 0, Observation{{1}});
  CHECK(b.probs == std::vector<double>{0.0, 1.0});
}

TEST_CASE("belief_update: hand-computed two-state example") {
  // b=(0.5,0.5), T=[[0.9,0.1],[0,1]], L(obs|s0)=0.2, L(obs|s1)=0.7.
  auto m = two_state_model();
  const Observation obs{{1}};
  m.observation = {{{{0.8, 0.2}}}, {{{0.3, 0.7}}}};
  const auto expected = testing::brute_force_posterior(m, {0}, {obs});
  // The oracle starts from rho_1 = (0.5, 0.5), the same prior.
  CHECK(expected[0] == doctest::Approx(0.09 / 0.475).epsilon(1e-12));
  CHECK(expected[1] == doctest::Approx(0.385 / 0.475).epsilon(1e-12));

  const auto b = belief_update(m, Belief{{0.5, 0.5}}, 0, obs);
  CHECK(std::abs(b.probs[0] - 0.18947368421052632) < 1e-12);
  CHECK(std::abs(b.probs[1] - 0.81052631578947368) < 1e-12);
}

TEST_CASE("belief_update: impossible observation carries the unnormalized vector") {
  auto m = two_state_model();
  m.observation = {{{{1.0, 0.0}}}, {{{1.0, 0.0}}}};
  try {
    (void)belief_update(m, Belief{{0.5, 0.5}}, 0, Observation{{1}});
    FAIL("expected ImpossibleObservation");
  } catch (const ImpossibleObservation& e) {
    CHECK(e.code() == ErrorCode::kImpossibleObservation);
    CHECK(e.unnormalized() == std::vector<double>{0.0, 0.0});
  }
}

TEST_CASE("property: recursive filter equals brute-force joint enumeration") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testing::random_model(rng);
    std::vector<std::size_t> actions;
    std::vector<Observation> observations;
    for (std::size_t t = 0; t < m.horizon; ++t) {
      actions.push_back(rng.below(m.num_defender_actions()));
      observations.push_back(testing::random_observation(m, rng));
    }
    const auto weights = testing::brute_force_posterior(m, actions, observations, false);
    double z = 0.0;
    for (double w : weights) z += w;
    if (z == 0.0) continue;
    const auto expected = testing::brute_force_posterior(m, actions, observations);
    Belief b = initial_belief(m);
    for (std::size_t t = 0; t < actions.size(); ++t) {
      b = belief_update(m, b, actions[t], observations[t]);
    }
    for (std::size_t s = 0; s < b.probs.size(); ++s) {
      CHECK(std::abs(b.probs[s] - expected[s]) <= 1e-9);
    }
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("property: belief_update output is normalized") {
  Rng rng(7);
  int done = 0;
  while (done < 10000) {
    const auto m = testing::random_model(rng);
    const auto b = testing::random_belief(m.num_states(), rng);
    const auto a = rng.below(m.num_defender_actions());
    const auto o = testing::random_observation(m, rng);
    Belief out;
    try {
      out = belief_update(m, b, a, o);
    } catch (const ImpossibleObservation&) {
      continue;
    }
    double sum = 0.0;
    for (double p : out.probs) {
      REQUIRE(p >= 0.0);
      sum += p;
    }
    REQUIRE(std::abs(sum - 1.0) <= 1e-9);
    ++done;
  }
}

TEST_CASE("property: an uninformative observation leaves the prediction unchanged") {
  // When every state has the same attacker mix and Z depends only on the
  // attacker action, L(obs|s') is constant and the update is prediction only.
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    auto m = testing::random_model(rng);
    const auto mix = m.attacker_behavior[0];
    const auto rows = m.observation[0];
    for (StateId s = 0; s < m.num_states(); ++s) {
      m.attacker_behavior[s] = mix;
      m.observation[s] = rows;
    }
    const auto b = testing::random_belief(m.num_states(), rng);
    const auto a = rng.below(m.num_defender_actions());
    const auto o = testing::random_observation(m, rng);
    const auto predicted = predict_belief(m, b, a);
    const auto updated = belief_update(m, b, a, o);
    for (StateId s = 0; s < m.num_states(); ++s) {
      CHECK(std::abs(updated.probs[s] - predicted.probs[s]) <= 1e-12);
    }
  }
}

TEST_CASE("environment_step: degenerate kernels give the unique outcome") {
  auto m = two_state_model();
  m.transition = {{{0.0, 1.0}}, {{0.0, 1.0}}};
  m.observation = {{{{1.0, 0.0}}}, {{{0.0, 1.0}}}};
  for (std::uint64_t seed : {1ULL, 2ULL, 12345ULL}) {
    Rng rng(seed);
    const auto out = environment_step(m, 0, 0, rng);
    CHECK(out.next_state == 1);
    CHECK(out.attacker_action == 0);
    CHECK(out.observation.bins == std::vector<std::size_t>{1});
    CHECK(out.reward == 1.0);
  }
}

TEST_CASE("environment_step: deterministic given the rng state") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  Rng a(42);
  Rng b(42);
  CHECK(environment_step(m, kRecon, kContinue, a) ==
        environment_step(m, kRecon, kContinue, b));
  CHECK(a == b);
}

TEST_CASE("environment_step: refuses terminal states") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  Rng rng(1);
  try {
    (void)environment_step(m, kBreached, kContinue, rng);
    FAIL("expected terminal-state error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTerminalState);
  }
}

TEST_CASE("environment_step: golden outcome for the default scenario") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  Rng rng(42);
  const auto out = environment_step(m, kHealthy, kContinue, rng);
  // Frozen from the reference sampler (xoshiro256**, documented draw order).
  CHECK(out.next_state == 0);
  CHECK(out.attacker_action == 0);
  CHECK(out.observation.bins == std::vector<std::size_t>{1, 3, 12});
  CHECK(out.reward == 1.0);
}

TEST_CASE("simulate_episode: horizon 1 gives exactly one step") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  const auto policy = policy::make_random_policy(m);
  const auto trace = simulate_episode(m, *policy, 5, 1);
  CHECK(trace.steps.size() == 1);
  CHECK(trace.terminated_reason == TerminationReason::kHorizon);
  CHECK(trace.steps[0].belief_after.has_value());
}

TEST_CASE("simulate_episode: same seed gives byte-identical traces") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  const auto policy = policy::make_random_policy(m);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(write_trace(simulate_episode(m, *policy, seed)) ==
          write_trace(simulate_episode(m, *policy, seed)));
  }
  CHECK(write_trace(simulate_episode(m, *policy, 1)) !=
        write_trace(simulate_episode(m, *policy, 2)));
}

TEST_CASE("simulate_episode: golden total reward for the threshold policy") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  const auto policy = policy::make_threshold_policy(m, 0.8);
  const auto trace = simulate_episode(m, *policy, 7, 100);
  CHECK(trace.steps.size() == 73);
  CHECK(trace.total_reward() == 143.0);
}

TEST_CASE("simulate_episode: records are consistent with the model") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  const auto policy = policy::make_threshold_policy(m, 0.5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto trace = simulate_episode(m, *policy, seed);
    REQUIRE(!trace.steps.empty());
    CHECK(trace.steps.size() <= m.horizon);
    Belief b = initial_belief(m);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const auto& step = trace.steps[i];
      CHECK(step.t == i + 1);
      b = belief_update(m, b, step.defender_action, step.observation);
      CHECK(step.belief_after->probs == b.probs);
    }
    if (trace.terminated_reason == TerminationReason::kTerminalState) {
      CHECK(m.is_terminal(trace.steps.back().state));
    } else {
      CHECK(trace.steps.size() == m.horizon);
    }
  }
}

TEST_CASE("simulate_episode: incompatible policy is rejected") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  const policy::RandomPolicy small({2, 2, {4}});
  try {
    (void)simulate_episode(m, small, 1);
    FAIL("expected incompatibility");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncompatible);
  }
}

TEST_CASE("build_intrusion_scenario: disabled attacker keeps healthy a self-loop") {
  ScenarioConfig c;
  c.intrusion_start_prob = 0.0;
  const auto m = build_intrusion_scenario(c);
  CHECK(m.transition[kHealthy][kContinue] == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("build_intrusion_scenario: ping scans look like passive traffic") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto o = testing::random_observation(m, rng);
    for (StateId s = 0; s < m.num_states(); ++s) {
      CHECK(observation_likelihood(m, s, kPingScan, o) ==
            observation_likelihood(m, s, kPassive, o));
    }
  }
  // A port scan shifts the alert and connection counts upward.
  const auto port = metric_marginals(m, Belief{{0, 1, 0, 0}});
  const auto quiet = metric_marginals(m, Belief{{1, 0, 0, 0}});
  double port_mean = 0.0;
  double quiet_mean = 0.0;
  for (std::size_t b = 0; b < port[0].size(); ++b) {
    port_mean += static_cast<double>(b) * port[0][b];
    quiet_mean += static_cast<double>(b) * quiet[0][b];
  }
  CHECK(port_mean > quiet_mean + 1.0);
}

TEST_CASE("build_intrusion_scenario: defend evicts the intruder and rewards follow the config") {
  const ScenarioConfig c;
  const auto m = build_intrusion_scenario(c);
  for (StateId s : {kHealthy, kRecon, kCompromised}) {
    CHECK(m.transition[s][kDefend] == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  }
  CHECK(m.reward[kHealthy][kContinue] == 1.0);
  CHECK(m.reward[kRecon][kContinue] == -1.0);
  CHECK(m.reward[kHealthy][kDefend] == -15.0);
  CHECK(m.reward[kCompromised][kDefend] == 15.0);
  CHECK(m.defender_actions[kDefend].cost == 5.0);
  CHECK(m.is_terminal(kBreached));
}

TEST_CASE("build_intrusion_scenario: out-of-range config is rejected") {
  ScenarioConfig c;
  c.intrusion_start_prob = 1.5;
  CHECK_THROWS_AS(build_intrusion_scenario(c), Error);
  c = ScenarioConfig{};
  c.bins = 1;
  CHECK_THROWS_AS(build_intrusion_scenario(c), Error);
  c = ScenarioConfig{};
  c.attacker_mix[kRecon] = {0.5, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(build_intrusion_scenario(c), Error);
}

TEST_CASE("scenario config JSON round trip and strictness") {
  ScenarioConfig c;
  c.name = "custom";
  c.client_burst_prob = 0.25;
  c.attacker_mix[kRecon] = {0.0, 1.0, 0.0, 0.0};
  const auto back = scenario_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c) != config_hash(ScenarioConfig{}));

  Json doc = to_json(c);
  doc["bogus"] = 1;
  CHECK_THROWS_AS(scenario_config_from_json(doc), Error);
  doc = to_json(c);
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(scenario_config_from_json(doc), Error);
  doc = Json{{"schema_version", 1}, {"horizon", 5}};
  CHECK(scenario_config_from_json(doc).horizon == 5);
}

TEST_CASE("binned_poisson: overflow bin holds the tail") {
  const auto pmf = binned_poisson(3.0, 4);
  double sum = 0.0;
  for (double p : pmf) sum += p;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(pmf[0] == doctest::Approx(std::exp(-3.0)));
  CHECK(pmf[3] == doctest::Approx(1.0 - std::exp(-3.0) * (1 + 3 + 4.5)));
  CHECK(binned_poisson(0.0, 3) == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("trace format: canonical round trip") {
  const auto m = build_intrusion_scenario(ScenarioConfig{});
  const auto policy = policy::make_threshold_policy(m, 0.6);
  const auto trace = simulate_episode(m, *policy, 77);
  const std::string text = write_trace(trace);
  const auto back = read_trace(text);
  CHECK(back == trace);
  CHECK(write_trace(back) == text);
  // Field names and order on the wire.
  CHECK(text.find("{\"t\":1,\"state\":") != std::string::npos);
  CHECK(text.find("\"belief_after\":[") != std::string::npos);
  CHECK(text.rfind("{\"trace_id\":\"sim-", 0) == 0);
}

TEST_CASE("trace format: ingest errors name the line") {
  const std::string header =
      R"({"trace_id":"x","scenario":"s","config_hash":"h","seed":null})";
  auto step = [](int t) {
    return R"({"t":)" + std::to_string(t) +
           R"(,"state":0,"attacker_action":0,"defender_action":0,"observation":[1],"reward":1.0,"belief_after":null})";
  };
  try {
    (void)read_trace(header + "\n" + step(1) + "\n" + step(2) + "\n" + step(2) + "\n");
    FAIL("expected ingest error");
  } catch (const IngestError& e) {
    CHECK(e.line() == 4);
  }
  try {
    (void)read_trace("");
    FAIL("expected ingest error");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("missing header") != std::string::npos);
  }
  try {
    (void)read_trace(header + "\n" +
                     R"({"t":1,"state":"zero","attacker_action":0,"defender_action":0,"observation":[1],"reward":1})");
    FAIL("expected ingest error");
  } catch (const IngestError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(read_trace(header + "\n"), IngestError);
  const auto ok = read_trace(header + "\n" + step(1) + "\n");
  CHECK(!ok.seed.has_value());
  CHECK(!ok.terminated_reason.has_value());
}
