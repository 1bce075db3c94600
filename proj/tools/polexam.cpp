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

// polexam command-line entry point.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error. Every successful
// run prints one JSON summary line on stdout; errors go to stderr as
// {"code", "message"}.

#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "polexam/api/server.hpp"
#include "polexam/error.hpp"
#include "polexam/json.hpp"
#include "polexam/policy/baselines.hpp"
#include "polexam/policy/evaluate.hpp"
#include "polexam/policy/network.hpp"
#include "polexam/policy/policy_io.hpp"
#include "polexam/policy/ppo.hpp"
#include "polexam/pomdp/episode.hpp"
#include "polexam/pomdp/scenario.hpp"
#include "polexam/pomdp/trace.hpp"
#include "polexam/store/estimate.hpp"
#include "polexam/store/store.hpp"

namespace fs = std::filesystem;
using namespace polexam;

namespace {

void emit(const Json& summary) { std::cout << summary.dump() << std::endl; }

std::unique_ptr<store::TraceStore> open_store(const std::string& root) {
  if (root.empty()) return nullptr;
  return std::make_unique<store::TraceStore>(root);
}

/// Built-in name, catalogued id (with a store), or path to a config file.
pomdp::ScenarioConfig resolve_scenario(const std::string& ref,
                                       const store::TraceStore* st) {
  if (auto builtin = pomdp::find_builtin_scenario(ref)) return *builtin;
  if (st) {
    try {
      return st->scenario_config(ref);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotFound) throw;
    }
  }
  if (fs::is_regular_file(ref)) {
    auto config = pomdp::scenario_config_from_json(parse_json(store::read_file(ref), ref));
    pomdp::validate_config(config);
    return config;
  }
  throw Error(ErrorCode::kNotFound, "unknown scenario '" + ref + "'");
}

/// "builtin:<spec>", catalogued id (with a store), or path to a policy file.
std::shared_ptr<const policy::Policy> resolve_policy(const std::string& ref,
                                                     const pomdp::PomdpModel& model,
                                                     const store::TraceStore* st) {
  std::shared_ptr<const policy::Policy> p;
  if (ref.rfind("builtin:", 0) == 0) {
    p = policy::make_builtin_policy(model, ref.substr(8));
    if (!p) throw Error(ErrorCode::kNotFound, "unknown built-in policy '" + ref + "'");
  } else if (fs::is_regular_file(ref)) {
    p = policy::load_policy(store::read_file(ref));
  } else if (st) {
    p = st->load_policy(ref);
  } else {
    throw Error(ErrorCode::kNotFound, "unknown policy '" + ref + "'");
  }
  policy::check_compatible(model, *p);
  return p;
}

int cmd_simulate(const std::string& scenario, const std::string& policy_ref, std::uint64_t seed,
                 std::optional<std::size_t> horizon, const std::string& trace_id,
                 const std::string& out, const std::string& store_root) {
  const auto st = open_store(store_root);
  const auto model = pomdp::build_intrusion_scenario(resolve_scenario(scenario, st.get()));
  const auto p = resolve_policy(policy_ref, model, st.get());
  auto trace = pomdp::simulate_episode(model, *p, seed, horizon);
  if (!trace_id.empty()) {
    if (!pomdp::is_valid_identifier(trace_id)) {
      throw Error(ErrorCode::kValidation, "invalid trace id '" + trace_id + "'");
    }
    trace.trace_id = trace_id;
  }
  store::atomic_write_file(out, pomdp::write_trace(trace));
  Json s;
  s["command"] = "simulate";
  s["trace_id"] = trace.trace_id;
  s["scenario"] = trace.scenario;
  s["seed"] = seed;
  s["steps"] = trace.steps.size();
  s["total_reward"] = trace.total_reward();
  s["terminated_reason"] =
      trace.terminated_reason
          ? Json(std::string(pomdp::termination_reason_name(*trace.terminated_reason)))
          : Json(nullptr);
  s["out"] = out;
  emit(s);
  return 0;
}

int cmd_train(const std::string& scenario, const std::string& config_path, const std::string& out,
              std::string stats_path, std::optional<std::size_t> iterations,
              std::optional<std::uint64_t> seed, bool quiet) {
  const auto model = pomdp::build_intrusion_scenario(resolve_scenario(scenario, nullptr));
  policy::TrainingConfig config;
  if (!config_path.empty()) {
    config = policy::training_config_from_json(
        parse_json(store::read_file(config_path), config_path));
  }
  if (iterations) config.iterations = *iterations;
  if (seed) config.seed = *seed;
  policy::validate_config(config);

  const auto started = std::chrono::steady_clock::now();
  auto progress = [&](const policy::IterationStats& it) {
    if (quiet) return;
    std::cerr << "iteration " << it.iteration + 1 << "/" << config.iterations
              << " mean_return " << it.mean_return << " mean_length " << it.mean_length
              << " entropy " << it.entropy << " approx_kl " << it.approx_kl << '\n';
  };
  const auto result = policy::ppo_train(model, config, progress);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const policy::NetworkPolicy trained(policy::PolicySpaces::of(model), result.params);
  store::atomic_write_file(out, policy::save_policy(trained));
  if (stats_path.empty()) stats_path = out + ".stats.json";
  Json stats;
  stats["scenario"] = model.name;
  stats["config"] = policy::to_json(config);
  stats["seconds"] = seconds;
  stats["stats"] = policy::to_json(result.stats);
  store::atomic_write_file(stats_path, stats.dump(2) + "\n");

  Json s;
  s["command"] = "train";
  s["scenario"] = model.name;
  s["iterations"] = result.stats.iterations.size();
  s["first_mean_return"] = result.stats.iterations.empty()
                               ? Json(nullptr)
                               : Json(result.stats.iterations.front().mean_return);
  s["final_mean_return"] = result.stats.iterations.empty()
                               ? Json(nullptr)
                               : Json(result.stats.iterations.back().mean_return);
  s["seconds"] = seconds;
  s["out"] = out;
  s["stats"] = stats_path;
  emit(s);
  return 0;
}

int cmd_evaluate(const std::string& scenario, const std::string& policy_ref, std::size_t episodes,
                 std::uint64_t seed, const std::string& store_root) {
  const auto st = open_store(store_root);
  const auto model = pomdp::build_intrusion_scenario(resolve_scenario(scenario, st.get()));
  const auto p = resolve_policy(policy_ref, model, st.get());
  Json s;
  s["command"] = "evaluate";
  s["scenario"] = model.name;
  s["policy"] = policy_ref;
  s["seed"] = seed;
  s.update(policy::to_json(policy::evaluate_policy(model, *p, episodes, seed)));
  emit(s);
  return 0;
}

int cmd_ingest(const std::string& store_root, const std::vector<std::string>& files) {
  store::TraceStore st(store_root);
  Json s;
  s["command"] = "ingest";
  s["trace_ids"] = Json::array();
  for (const auto& f : files) s["trace_ids"].push_back(st.ingest(store::read_file(f)));
  emit(s);
  return 0;
}

int cmd_export(const std::string& store_root, const std::string& trace_id,
               const std::string& out) {
  store::TraceStore st(store_root);
  const std::string bytes = st.export_trace(trace_id);
  store::atomic_write_file(out, bytes);
  Json s;
  s["command"] = "export";
  s["trace_id"] = trace_id;
  s["bytes"] = bytes.size();
  s["out"] = out;
  emit(s);
  return 0;
}

int cmd_estimate(const std::string& store_root, const std::string& scenario,
                 const std::vector<std::string>& trace_ids, const store::EstimationConfig& config,
                 const std::string& register_as, const std::string& out) {
  store::TraceStore st(store_root);
  const auto base = st.scenario_config(scenario);
  const auto model = pomdp::build_intrusion_scenario(base);
  std::vector<pomdp::EpisodeTrace> traces;
  for (const auto& id : trace_ids) traces.push_back(st.get_trace(id));
  if (trace_ids.empty()) {
    for (const auto& meta : st.list_traces({scenario})) traces.push_back(st.get_trace(meta.trace_id));
  }
  const auto estimate = store::estimate_observation_model(model, traces, config);
  Json doc = store::to_json(estimate);
  if (!out.empty()) store::atomic_write_file(out, doc.dump(2) + "\n");
  Json s;
  s["command"] = "estimate";
  s.update(doc);
  s["registered_scenario"] = nullptr;
  if (!register_as.empty()) {
    const auto derived = store::estimated_scenario(base, estimate, register_as);
    s["registered_scenario"] = st.register_scenario(register_as, pomdp::to_json(derived).dump(2));
  }
  emit(s);
  return 0;
}

int cmd_scenarios(const std::string& store_root, const std::string& show) {
  const auto st = open_store(store_root);
  Json s;
  s["command"] = "scenarios";
  if (!show.empty()) {
    s["scenario"] = pomdp::to_json(resolve_scenario(show, st.get()));
    emit(s);
    return 0;
  }
  s["scenarios"] = Json::array();
  if (st) {
    for (const auto& entry : st->list_scenarios()) {
      Json item;
      item["id"] = entry.id;
      item["kind"] = entry.kind;
      item["description"] = st->scenario_config(entry.id).description;
      s["scenarios"].push_back(std::move(item));
    }
  } else {
    for (const auto& config : pomdp::builtin_scenarios()) {
      Json item;
      item["id"] = config.name;
      item["kind"] = "builtin";
      item["description"] = config.description;
      s["scenarios"].push_back(std::move(item));
    }
  }
  emit(s);
  return 0;
}

int cmd_find_false_alarm(const std::string& scenario, const std::string& environment,
                         const std::string& policy_ref, std::uint64_t first_seed,
                         std::size_t seeds, double threshold, const std::string& store_root) {
  const auto st = open_store(store_root);
  const auto model = pomdp::build_intrusion_scenario(resolve_scenario(scenario, st.get()));
  const auto env = pomdp::build_intrusion_scenario(resolve_scenario(environment, st.get()));
  const auto p = resolve_policy(policy_ref, model, st.get());
  const auto hit = policy::find_false_alarm(env, model, *p, first_seed, seeds, threshold);
  Json s;
  s["command"] = "find-false-alarm";
  s["scenario"] = model.name;
  s["environment"] = env.name;
  s["policy"] = policy_ref;
  s["first_seed"] = first_seed;
  s["seeds_searched"] = seeds;
  s["threshold"] = threshold;
  s["found"] = hit.has_value();
  if (hit) s.update(policy::to_json(*hit));
  emit(s);
  return 0;
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) return {bind, 8080};
  const std::string port = bind.substr(colon + 1);
  if (port.empty() || port.size() > 5 || port.find_first_not_of("0123456789") != std::string::npos ||
      std::stoi(port) > 65535) {
    throw Error(ErrorCode::kConfig, "invalid port in bind address '" + bind + "'");
  }
  return {bind.substr(0, colon), std::stoi(port)};
}

int cmd_serve(const std::string& store_root, const std::string& bind, const std::string& static_dir,
              const std::string& log_level, std::size_t max_sessions, std::size_t idle_ttl_s) {
  if (store_root.empty()) throw Error(ErrorCode::kConfig, "no store root (--store or POLEXAM_STORE)");

  // SIGINT/SIGTERM are handled on a dedicated thread; block them everywhere else.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  api::ServerConfig config;
  config.store_root = store_root;
  std::tie(config.host, config.port) = split_bind(bind);
  config.sessions.max_sessions = max_sessions;
  config.sessions.idle_ttl = std::chrono::seconds(idle_ttl_s);
  if (!static_dir.empty()) config.static_dir = static_dir;
  if (log_level == "info" || log_level == "debug") config.request_log = &std::cerr;

  api::ApiServer server(config);
  const int port = server.bind();
  Json s;
  s["command"] = "serve";
  s["status"] = "listening";
  s["address"] = config.host + ":" + std::to_string(port);
  s["store"] = store_root;
  emit(s);

  std::atomic<bool> done{false};
  std::thread waiter([&] {
    const timespec tick{0, 200'000'000};
    while (!done) {
      if (sigtimedwait(&signals, nullptr, &tick) > 0) break;
    }
    server.stop();
  });
  server.serve();
  done = true;
  waiter.join();
  server.stop();
  return 0;
}

int report(const std::string& code, const std::string& message) {
  Json e;
  e["code"] = code;
  e["message"] = message;
  std::cerr << e.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive debugger and tooling for learned intrusion-response policies."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(api::kApiVersion));

  std::string scenario = "intrusion-default";
  std::string policy_ref;
  std::string out;
  std::string store_root;
  std::uint64_t seed = 0;
  std::optional<std::size_t> horizon;
  std::string trace_id;

  auto* simulate = app.add_subcommand("simulate", "Simulate one episode and write its trace.");
  simulate->add_option("--scenario", scenario, "Built-in name, catalogued id or config file")
      ->capture_default_str();
  simulate->add_option("--policy", policy_ref, "builtin:<spec>, policy file or catalogued id")
      ->required();
  simulate->add_option("--seed", seed)->capture_default_str();
  simulate->add_option("--horizon", horizon, "Override the scenario horizon")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--trace-id", trace_id, "Replace the derived trace id");
  simulate->add_option("--out", out, "Trace file to write")->required();
  simulate->add_option("--store", store_root, "Store used to resolve catalogued ids");

  std::string config_path;
  std::string stats_path;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> train_seed;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train a network policy with PPO.");
  train->add_option("--scenario", scenario)->capture_default_str();
  train->add_option("--config", config_path, "Training config JSON file")
      ->check(CLI::ExistingFile);
  train->add_option("--out", out, "Policy file to write")->required();
  train->add_option("--stats", stats_path, "Stats file (default <out>.stats.json)");
  train->add_option("--iterations", iterations, "Override config iterations");
  train->add_option("--seed", train_seed, "Override config seed");
  train->add_flag("--quiet", quiet, "No per-iteration progress on stderr");

  std::size_t episodes = 100;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a policy over many episodes.");
  evaluate->add_option("--scenario", scenario)->capture_default_str();
  evaluate->add_option("--policy", policy_ref)->required();
  evaluate->add_option("--episodes", episodes)->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--seed", seed)->capture_default_str();
  evaluate->add_option("--store", store_root);

  std::vector<std::string> files;
  auto* ingest = app.add_subcommand("ingest", "Ingest trace files into a store.");
  ingest->add_option("--store", store_root)->required();
  ingest->add_option("files", files, "Trace files")->required()->check(CLI::ExistingFile);

  auto* export_cmd = app.add_subcommand("export", "Write a stored trace to a file.");
  export_cmd->add_option("--store", store_root)->required();
  export_cmd->add_option("--trace", trace_id)->required();
  export_cmd->add_option("--out", out)->required();

  std::vector<std::string> trace_ids;
  store::EstimationConfig estimation;
  std::string register_as;
  auto* estimate = app.add_subcommand("estimate", "Estimate the observation model from traces.");
  estimate->add_option("--store", store_root)->required();
  estimate->add_option("--scenario", scenario)->capture_default_str();
  estimate
      ->add_option("--traces", trace_ids,
                   "Trace ids (comma-separated or repeated); default every trace of the scenario")
      ->delimiter(',');
  estimate->add_option("--alpha", estimation.alpha)->capture_default_str();
  estimate->add_option("--min-samples", estimation.min_samples)->capture_default_str();
  estimate->add_flag("--state-only", estimation.condition_on_state_only,
                     "Pool attacker actions per state");
  estimate->add_option("--register-as", register_as, "Register the estimate as a scenario");
  estimate->add_option("--out", out, "Also write the estimate to this file");

  std::string bind = "127.0.0.1:8080";
  std::string static_dir;
  std::string log_level = "info";
  std::size_t max_sessions = 64;
  std::size_t idle_ttl_s = 1800;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API.");
  serve->add_option("--store", store_root)->envname("POLEXAM_STORE");
  serve->add_option("--bind", bind, "host:port; port 0 picks a free port")
      ->envname("POLEXAM_BIND")
      ->capture_default_str();
  serve->add_option("--log-level", log_level)
      ->envname("POLEXAM_LOG_LEVEL")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}))
      ->capture_default_str();
  serve->add_option("--static", static_dir, "Directory of built UI assets")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--max-sessions", max_sessions)->check(CLI::PositiveNumber)->capture_default_str();
  serve->add_option("--idle-ttl", idle_ttl_s, "Seconds before an idle session is dropped")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string show;
  auto* scenarios = app.add_subcommand("scenarios", "List scenarios or show one config.");
  scenarios->add_option("--store", store_root);
  scenarios->add_option("--show", show, "Print this scenario's config");

  std::string alarm_environment = "intrusion-no-attack";
  std::size_t seeds = 500;
  double threshold = 0.5;
  auto* alarm = app.add_subcommand(
      "find-false-alarm",
      "Search attack-free episodes for a step with a high defend probability.");
  alarm->add_option("--scenario", scenario, "Model the defender filters with")
      ->capture_default_str();
  alarm->add_option("--environment", alarm_environment, "Scenario that generates the episodes")
      ->capture_default_str();
  alarm->add_option("--policy", policy_ref)->required();
  alarm->add_option("--first-seed", seed)->capture_default_str();
  alarm->add_option("--seeds", seeds)->check(CLI::PositiveNumber)->capture_default_str();
  alarm->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  alarm->add_option("--store", store_root);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* context = &app;
    for (const auto* sub : app.get_subcommands()) context = sub;
    std::cerr << context->help();
    return 2;
  }

  try {
    if (*simulate) {
      return cmd_simulate(scenario, policy_ref, seed, horizon, trace_id, out, store_root);
    }
    if (*train) {
      return cmd_train(scenario, config_path, out, stats_path, iterations, train_seed, quiet);
    }
    if (*evaluate) return cmd_evaluate(scenario, policy_ref, episodes, seed, store_root);
    if (*ingest) return cmd_ingest(store_root, files);
    if (*export_cmd) return cmd_export(store_root, trace_id, out);
    if (*estimate) {
      return cmd_estimate(store_root, scenario, trace_ids, estimation, register_as, out);
    }
    if (*serve) {
      return cmd_serve(store_root, bind, static_dir, log_level, max_sessions, idle_ttl_s);
    }
    if (*scenarios) return cmd_scenarios(store_root, show);
    if (*alarm) {
      return cmd_find_false_alarm(scenario, alarm_environment, policy_ref, seed, seeds, threshold,
                                  store_root);
    }
  } catch (const Error& e) {
    return report(std::string(error_code_name(e.code())), e.what());
  } catch (const std::exception& e) {
    return report("internal", e.what());
  }
  return 0;
}
