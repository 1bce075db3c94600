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

#include "polexam/api/server.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "polexam/policy/baselines.hpp"
#include "polexam/policy/policy_io.hpp"
#include "polexam/pomdp/scenario.hpp"
#include "polexam/pomdp/trace.hpp"
#include "polexam/store/estimate.hpp"

namespace polexam::api {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kFinished:
    case ErrorCode::kPrecondition:
      return 409;
    case ErrorCode::kIncompatible:
    case ErrorCode::kValidation:
    case ErrorCode::kIngest:
    case ErrorCode::kLoad:
    case ErrorCode::kConfig:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kModelInvalid:
    case ErrorCode::kShape:
    case ErrorCode::kIndex:
    case ErrorCode::kImpossibleObservation:
      return 422;
    case ErrorCode::kRange:
      return 400;
    case ErrorCode::kCapacity:
      return 429;
    case ErrorCode::kNumeric:
    case ErrorCode::kTerminalState:
    case ErrorCode::kTrainingAborted:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

Json error_body(const Error& error) {
  Json body;
  body["code"] = std::string(error_code_name(error.code()));
  body["message"] = error.what();
  if (const auto* ingest = dynamic_cast<const pomdp::IngestError*>(&error)) {
    body["detail"]["line"] = ingest->line();
  } else {
    body["detail"] = nullptr;
  }
  return body;
}

namespace {

using httplib::Request;
using httplib::Response;

constexpr const char* kJsonType = "application/json";
constexpr const char* kNdjsonType = "application/x-ndjson";
constexpr const char* kPrefix = "/api/v1";
constexpr std::size_t kMaxPayload = 256u << 20;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kValidation, message);
}

void send_json(Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJsonType);
}

void send_error(Response& res, int status, const std::string& code,
                const std::string& message) {
  Json body;
  body["code"] = code;
  body["message"] = message;
  body["detail"] = nullptr;
  send_json(res, status, body);
}

Json parse_body(const Request& req) {
  if (req.body.empty()) return Json::object();
  Json doc = parse_json(req.body, "request body");
  if (!doc.is_object()) invalid("request body must be a JSON object");
  return doc;
}

template <typename T>
T field(const Json& body, const char* key, T fallback) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
      if (!it->is_number_unsigned()) throw Error(ErrorCode::kValidation, "");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw Error(ErrorCode::kValidation, "");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw Error(ErrorCode::kValidation, "");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw Error(ErrorCode::kValidation, "");
    }
    return it->get<T>();
  } catch (const std::exception&) {
    invalid(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  return field<T>(body, key, T{});
}

template <typename T>
T required_field(const Json& body, const char* key) {
  auto value = optional_field<T>(body, key);
  if (!value) invalid(std::string("missing field '") + key + "'");
  return *value;
}

std::optional<std::size_t> query_index(const Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string text = req.get_param_value(key);
  if (text.empty() || text.size() > 18 ||
      text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kRange, std::string("query parameter '") + key +
                                       "' must be a non-negative integer");
  }
  return std::stoull(text);
}

Json model_json(const pomdp::PomdpModel& model) {
  Json doc;
  doc["name"] = model.name;
  doc["config_hash"] = model.config_hash;
  doc["base_scenario"] = model.base_scenario;
  doc["states"] = model.state_names;
  doc["defender_actions"] = Json::array();
  for (const auto& a : model.defender_actions) doc["defender_actions"].push_back(a.name);
  doc["attacker_actions"] = model.attacker_actions;
  doc["metrics"] = Json::array();
  for (const auto& m : model.metrics) {
    Json metric;
    metric["name"] = m.name;
    metric["bins"] = m.bins;
    doc["metrics"].push_back(std::move(metric));
  }
  doc["horizon"] = model.horizon;
  doc["terminal_states"] = model.terminal_states;
  doc["initial_distribution"] = model.initial_distribution;
  doc["reward"] = model.reward;
  return doc;
}

Json list_json(const char* key, const std::vector<store::CatalogEntry>& entries) {
  Json doc;
  doc[key] = Json::array();
  for (const auto& e : entries) doc[key].push_back(store::to_json(e));
  return doc;
}

std::vector<double> number_array(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_array()) {
    invalid(std::string("field '") + key + "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) invalid(std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t tt = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));
  return buf;
}

thread_local std::chrono::steady_clock::time_point request_start;

}  // namespace

struct ApiServer::Impl {
  explicit Impl(ServerConfig cfg)
      : config(std::move(cfg)), store(config.store_root), sessions(config.sessions) {}

  ServerConfig config;
  store::TraceStore store;
  debugger::SessionManager sessions;
  httplib::Server http;
  std::thread thread;
  int port = -1;
  bool stopped = false;
  std::mutex log_mutex;

  void install();
  void route(const char* method, const std::string& pattern,
             std::function<void(const Request&, Response&)> handler);

  std::shared_ptr<const pomdp::PomdpModel> model_for(const std::string& scenario_id) const {
    return std::make_shared<const pomdp::PomdpModel>(
        pomdp::build_intrusion_scenario(store.scenario_config(scenario_id)));
  }

  /// "builtin:<spec>" or a catalogued policy id.
  std::shared_ptr<const policy::Policy> policy_for(const pomdp::PomdpModel& model,
                                                   const std::string& ref) const {
    std::shared_ptr<const policy::Policy> p;
    if (ref.rfind("builtin:", 0) == 0) {
      try {
        p = policy::make_builtin_policy(model, ref.substr(8));
      } catch (const Error& e) {
        invalid(e.what());
      }
      if (!p) throw Error(ErrorCode::kNotFound, "unknown built-in policy '" + ref + "'");
    } else {
      p = store.load_policy(ref);
    }
    policy::check_compatible(model, *p);
    return p;
  }

  Json session_response(const debugger::DebugSession& s) const {
    Json doc = to_json(s.current_frame(), s.model(), s.options().reveal_attacker);
    doc["session_id"] = s.id();
    doc["status"] = std::string(debugger::session_status_name(s.status()));
    doc["cursor"] = s.cursor();
    return doc;
  }

  Json describe_with_frame(const std::string& id) {
    return sessions.with_session(id, [&](debugger::DebugSession& s) {
      Json doc = s.describe();
      doc["frame"] = to_json(s.current_frame(), s.model(), s.options().reveal_attacker);
      return doc;
    });
  }

  void create_session(const Request& req, Response& res);
  void ingest_trace(const Request& req, Response& res);
  void register_policy(const Request& req, Response& res);
  void predict(const std::string& policy_id, const Request& req, Response& res);
  void estimate(const std::string& scenario_id, const Request& req, Response& res);
};

void ApiServer::Impl::route(const char* method, const std::string& pattern,
                            std::function<void(const Request&, Response&)> handler) {
  auto wrapped = [handler = std::move(handler)](const Request& req, Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_json(res, http_status(e.code()), error_body(e));
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
  const std::string full = std::string(kPrefix) + pattern;
  const std::string m = method;
  if (m == "GET") {
    http.Get(full, wrapped);
  } else if (m == "POST") {
    http.Post(full, wrapped);
  } else if (m == "DELETE") {
    http.Delete(full, wrapped);
  }
}

void ApiServer::Impl::create_session(const Request& req, Response& res) {
  const Json body = parse_body(req);
  const std::string source = field<std::string>(body, "source", "simulation");

  debugger::SessionOptions options;
  const std::string mode = field<std::string>(body, "mode", "manual");
  if (mode == "manual") {
    options.mode = debugger::SessionMode::kManual;
  } else if (mode == "autoplay") {
    options.mode = debugger::SessionMode::kAutoplay;
  } else {
    invalid("mode must be 'manual' or 'autoplay'");
  }
  const auto interval = field<std::uint64_t>(body, "autoplay_interval_ms", 1000);
  if (interval < 1 || interval > 3'600'000) invalid("autoplay_interval_ms out of range");
  options.autoplay_interval = std::chrono::milliseconds(interval);
  options.reveal_attacker = field<bool>(body, "reveal_attacker", true);

  std::string id;
  if (source == "simulation") {
    debugger::SimulationSource sim;
    const std::string scenario = field<std::string>(body, "scenario", "intrusion-default");
    const std::string policy_ref = required_field<std::string>(body, "policy");
    sim.model = model_for(scenario);
    sim.policy = policy_for(*sim.model, policy_ref);
    sim.seed = field<std::uint64_t>(body, "seed", 0);
    sim.horizon = optional_field<std::size_t>(body, "horizon");
    if (sim.horizon && *sim.horizon < 1) throw Error(ErrorCode::kRange, "horizon must be >= 1");
    if (auto env = optional_field<std::string>(body, "environment")) {
      sim.env_model = model_for(*env);
      options.labels["environment"] = *env;
    }
    options.labels["policy"] = policy_ref;
    id = sessions.create([&](const std::string& new_id) {
      return std::make_unique<debugger::DebugSession>(new_id, sim, options);
    });
  } else if (source == "replay") {
    debugger::ReplaySource replay;
    replay.trace = store.get_trace(required_field<std::string>(body, "trace_id"));
    const std::string scenario = field<std::string>(body, "scenario", replay.trace.scenario);
    replay.model = model_for(scenario);
    if (auto policy_ref = optional_field<std::string>(body, "policy")) {
      replay.overlay = policy_for(*replay.model, *policy_ref);
      options.labels["policy"] = *policy_ref;
    }
    id = sessions.create([&](const std::string& new_id) {
      return std::make_unique<debugger::DebugSession>(new_id, replay, options);
    });
  } else {
    invalid("source must be 'simulation' or 'replay'");
  }
  send_json(res, 201, describe_with_frame(id));
}

void ApiServer::Impl::ingest_trace(const Request& req, Response& res) {
  const std::string type = req.get_header_value("Content-Type");
  std::string id;
  if (type.rfind(kJsonType, 0) == 0) {
    Json doc = parse_json(req.body, "request body");
    if (!doc.is_array()) invalid("JSON trace body must be an array of records");
    id = store.ingest(pomdp::trace_from_records(doc.get<std::vector<Json>>()));
  } else {
    id = store.ingest(req.body);
  }
  send_json(res, 201, store::to_json(store.trace_metadata(id)));
}

void ApiServer::Impl::register_policy(const Request& req, Response& res) {
  const Json body = parse_body(req);
  const std::string name = required_field<std::string>(body, "name");
  std::string bytes;
  if (auto builtin = optional_field<std::string>(body, "builtin")) {
    const auto model = model_for(field<std::string>(body, "scenario", "intrusion-default"));
    bytes = policy::save_policy(*policy_for(*model, "builtin:" + *builtin));
  } else {
    auto it = body.find("payload");
    if (it == body.end()) invalid("body needs 'payload' or 'builtin'");
    bytes = it->is_string() ? it->get<std::string>() : it->dump();
  }
  const std::string id = store.register_policy(name, bytes);
  for (const auto& entry : store.list_policies()) {
    if (entry.id == id) return send_json(res, 201, store::to_json(entry));
  }
  throw Error(ErrorCode::kNotFound, "policy vanished after registration");
}

void ApiServer::Impl::predict(const std::string& policy_id, const Request& req,
                              Response& res) {
  const auto p = store.load_policy(policy_id);
  const Json body = parse_body(req);
  const auto& spaces = p->spaces();

  policy::PolicyInput input;
  input.belief.probs = number_array(body, "belief");
  double sum = 0.0;
  for (double v : input.belief.probs) {
    if (!std::isfinite(v) || v < 0.0) invalid("belief entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) invalid("belief must sum to 1 within 1e-6");
  if (input.belief.probs.size() != spaces.num_states) {
    throw Error(ErrorCode::kIncompatible, "belief has " +
                                              std::to_string(input.belief.probs.size()) +
                                              " entries, policy expects " +
                                              std::to_string(spaces.num_states));
  }

  if (body.contains("last_observation") && !body["last_observation"].is_null()) {
    const auto& obs = body["last_observation"];
    if (!obs.is_array()) invalid("last_observation must be an array of bins");
    for (const auto& b : obs) {
      if (!b.is_number_unsigned()) invalid("last_observation bins must be non-negative integers");
      input.last_observation.bins.push_back(b.get<std::size_t>());
    }
  } else {
    input.last_observation.bins.assign(spaces.metric_bins.size(), 0);
  }

  const auto t = field<std::uint64_t>(body, "t", 0);
  const auto horizon = required_field<std::uint64_t>(body, "horizon");
  if (horizon < 1) invalid("horizon must be >= 1");
  if (t > horizon) invalid("t must not exceed horizon");
  input.t_normalized = static_cast<double>(t) / static_cast<double>(horizon);

  policy::check_input(spaces, input);
  Json doc;
  doc["probs"] = p->predict(input).probs;
  send_json(res, 200, doc);
}

void ApiServer::Impl::estimate(const std::string& scenario_id, const Request& req,
                               Response& res) {
  const auto base = store.scenario_config(scenario_id);
  const auto model = pomdp::build_intrusion_scenario(base);
  const Json body = parse_body(req);

  store::EstimationConfig cfg;
  cfg.alpha = field<double>(body, "alpha", cfg.alpha);
  cfg.min_samples = field<std::size_t>(body, "min_samples", cfg.min_samples);
  cfg.condition_on_state_only =
      field<bool>(body, "condition_on_state_only", cfg.condition_on_state_only);

  std::vector<pomdp::EpisodeTrace> traces;
  auto ids = body.find("trace_ids");
  if (ids == body.end() || ids->is_null()) {
    store::TraceFilter filter;
    filter.scenario = scenario_id;
    for (const auto& meta : store.list_traces(filter)) {
      traces.push_back(store.get_trace(meta.trace_id));
    }
  } else {
    if (!ids->is_array()) invalid("trace_ids must be an array of ids");
    for (const auto& tid : *ids) {
      if (!tid.is_string()) invalid("trace_ids must hold strings");
      traces.push_back(store.get_trace(tid.get<std::string>()));
    }
  }

  const auto estimate = store::estimate_observation_model(model, traces, cfg);
  Json doc = store::to_json(estimate);
  doc["registered_scenario"] = nullptr;
  if (auto name = optional_field<std::string>(body, "register_as")) {
    const auto derived = store::estimated_scenario(base, estimate, *name);
    doc["registered_scenario"] = store.register_scenario(*name, pomdp::to_json(derived).dump(2));
  }
  send_json(res, 200, doc);
}

void ApiServer::Impl::install() {
  http.set_payload_max_length(kMaxPayload);
  // SO_REUSEADDR only, so a port held by another server is a bind failure.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  http.set_pre_routing_handler([](const Request&, Response&) {
    request_start = std::chrono::steady_clock::now();
    return httplib::Server::HandlerResponse::Unhandled;
  });
  http.set_error_handler([](const Request& req, Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    if (res.status == 404) {
      send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
    } else {
      send_error(res, res.status, "bad_request", "request rejected by the HTTP layer");
    }
    return httplib::Server::HandlerResponse::Handled;
  });
  http.set_exception_handler([](const Request&, Response& res, std::exception_ptr) {
    send_error(res, 500, "internal", "unhandled exception");
  });
  if (config.request_log != nullptr) {
    http.set_logger([this](const Request& req, const Response& res) {
      const auto elapsed = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - request_start)
                               .count();
      Json line;
      line["ts"] = now_iso8601();
      line["method"] = req.method;
      line["path"] = req.path;
      line["status"] = res.status;
      line["duration_ms"] = std::round(elapsed * 1000.0) / 1000.0;
      std::lock_guard lock(log_mutex);
      *config.request_log << line.dump() << '\n' << std::flush;
    });
  }
  if (config.static_dir) {
    if (!http.set_mount_point("/", config.static_dir->string())) {
      throw Error(ErrorCode::kIo, "static dir not found: " + config.static_dir->string());
    }
  }

  route("GET", "/health", [](const Request&, Response& res) {
    Json doc;
    doc["status"] = "ok";
    doc["version"] = std::string(kApiVersion);
    send_json(res, 200, doc);
  });

  // Sessions.
  const std::string sid = "/sessions/([^/]+)";
  route("POST", "/sessions", [this](const Request& req, Response& res) {
    create_session(req, res);
  });
  route("GET", "/sessions", [this](const Request&, Response& res) {
    Json doc;
    doc["sessions"] = Json::array();
    for (const auto& id : sessions.list()) {
      try {
        doc["sessions"].push_back(
            sessions.with_session(id, [](debugger::DebugSession& s) { return s.describe(); }));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNotFound) throw;
      }
    }
    send_json(res, 200, doc);
  });
  route("GET", sid, [this](const Request& req, Response& res) {
    send_json(res, 200, describe_with_frame(req.matches[1]));
  });
  route("DELETE", sid, [this](const Request& req, Response& res) {
    const std::string id = req.matches[1];
    sessions.remove(id);
    Json doc;
    doc["session_id"] = id;
    doc["deleted"] = true;
    send_json(res, 200, doc);
  });
  route("POST", sid + "/step", [this](const Request& req, Response& res) {
    const Json body = parse_body(req);
    const auto n = field<std::uint64_t>(body, "n", 1);
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      s.step(n);
      return session_response(s);
    }));
  });
  route("POST", sid + "/continue", [this](const Request& req, Response& res) {
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      s.continue_run();
      return session_response(s);
    }));
  });
  route("POST", sid + "/halt", [this](const Request& req, Response& res) {
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      s.halt();
      return session_response(s);
    }));
  });
  route("POST", sid + "/reverse", [this](const Request& req, Response& res) {
    const Json body = parse_body(req);
    const auto n = field<std::uint64_t>(body, "n", 1);
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      s.reverse(n);
      return session_response(s);
    }));
  });
  route("POST", sid + "/fork", [this](const Request& req, Response& res) {
    const Json body = parse_body(req);
    const auto seed = field<std::uint64_t>(body, "seed", 0);
    send_json(res, 201, describe_with_frame(sessions.fork(req.matches[1], seed)));
  });
  route("POST", sid + "/what-if", [this](const Request& req, Response& res) {
    const Json body = parse_body(req);
    const auto action = required_field<std::size_t>(body, "action");
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      return to_json(s.what_if(action), s.model());
    }));
  });
  route("GET", sid + "/frame", [this](const Request& req, Response& res) {
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      return session_response(s);
    }));
  });
  route("GET", sid + "/frames", [this](const Request& req, Response& res) {
    const auto from = query_index(req, "from");
    const auto to = query_index(req, "to");
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      const auto& frames = s.frames();
      const std::size_t lo = from.value_or(0);
      const std::size_t hi = std::min(to.value_or(frames.size() - 1), frames.size() - 1);
      if (lo > hi) throw Error(ErrorCode::kRange, "empty frame window");
      Json doc;
      doc["session_id"] = s.id();
      doc["from"] = lo;
      doc["to"] = hi;
      doc["frames"] = Json::array();
      for (std::size_t i = lo; i <= hi; ++i) {
        doc["frames"].push_back(to_json(frames[i], s.model(), s.options().reveal_attacker));
      }
      return doc;
    }));
  });
  route("GET", sid + "/breakpoints", [this](const Request& req, Response& res) {
    send_json(res, 200, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      Json doc;
      doc["breakpoints"] = Json::array();
      for (const auto& bp : s.breakpoints()) doc["breakpoints"].push_back(to_json(bp));
      return doc;
    }));
  });
  route("POST", sid + "/breakpoints", [this](const Request& req, Response& res) {
    const Json body = parse_body(req);
    const auto predicate =
        debugger::predicate_from_json(body.contains("predicate") ? body["predicate"] : body);
    send_json(res, 201, sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      debugger::check_predicate(s.model(), predicate);
      return to_json(debugger::Breakpoint{s.add_breakpoint(predicate), predicate});
    }));
  });
  route("DELETE", sid + "/breakpoints/([^/]+)", [this](const Request& req, Response& res) {
    const std::string text = req.matches[2];
    if (text.empty() || text.size() > 18 ||
        text.find_first_not_of("0123456789") != std::string::npos) {
      throw Error(ErrorCode::kNotFound, "unknown breakpoint '" + text + "'");
    }
    const std::uint64_t bid = std::stoull(text);
    sessions.with_session(req.matches[1], [&](debugger::DebugSession& s) {
      s.remove_breakpoint(bid);
      return 0;
    });
    Json doc;
    doc["id"] = bid;
    doc["deleted"] = true;
    send_json(res, 200, doc);
  });

  // Traces.
  route("GET", "/traces", [this](const Request& req, Response& res) {
    store::TraceFilter filter;
    if (req.has_param("scenario")) filter.scenario = req.get_param_value("scenario");
    Json doc;
    doc["traces"] = Json::array();
    for (const auto& meta : store.list_traces(filter)) doc["traces"].push_back(store::to_json(meta));
    send_json(res, 200, doc);
  });
  route("POST", "/traces", [this](const Request& req, Response& res) {
    ingest_trace(req, res);
  });
  route("GET", "/traces/([^/]+)", [this](const Request& req, Response& res) {
    const std::string id = req.matches[1];
    const auto trace = store.get_trace(id);
    Json doc;
    doc["metadata"] = store::to_json(store.trace_metadata(id));
    doc["header"] = pomdp::header_to_json(trace);
    doc["steps"] = Json::array();
    for (const auto& step : trace.steps) doc["steps"].push_back(pomdp::step_to_json(step));
    send_json(res, 200, doc);
  });
  route("GET", "/traces/([^/]+)/export", [this](const Request& req, Response& res) {
    res.status = 200;
    res.set_content(store.export_trace(req.matches[1]), kNdjsonType);
  });

  // Policies.
  route("GET", "/policies", [this](const Request&, Response& res) {
    send_json(res, 200, list_json("policies", store.list_policies()));
  });
  route("POST", "/policies", [this](const Request& req, Response& res) {
    register_policy(req, res);
  });
  route("GET", "/policies/([^/]+)", [this](const Request& req, Response& res) {
    res.status = 200;
    res.set_content(store.policy_payload(req.matches[1]), kJsonType);
  });
  route("POST", "/policies/([^/]+)/predict", [this](const Request& req, Response& res) {
    predict(req.matches[1], req, res);
  });

  // Scenarios.
  route("GET", "/scenarios", [this](const Request&, Response& res) {
    send_json(res, 200, list_json("scenarios", store.list_scenarios()));
  });
  route("POST", "/scenarios", [this](const Request& req, Response& res) {
    const Json body = parse_body(req);
    const std::string name = required_field<std::string>(body, "name");
    auto it = body.find("config");
    if (it == body.end() || !it->is_object()) invalid("body needs a 'config' object");
    const std::string id = store.register_scenario(name, it->dump(2));
    for (const auto& entry : store.list_scenarios()) {
      if (entry.id == id) return send_json(res, 201, store::to_json(entry));
    }
    throw Error(ErrorCode::kNotFound, "scenario vanished after registration");
  });
  route("GET", "/scenarios/([^/]+)", [this](const Request& req, Response& res) {
    const std::string id = req.matches[1];
    const auto cfg = store.scenario_config(id);
    Json doc;
    doc["id"] = id;
    doc["config"] = pomdp::to_json(cfg);
    doc["model"] = model_json(pomdp::build_intrusion_scenario(cfg));
    send_json(res, 200, doc);
  });
  route("POST", "/scenarios/([^/]+)/estimate-observation-model",
        [this](const Request& req, Response& res) { estimate(req.matches[1], req, res); });
}

ApiServer::ApiServer(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->install();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind() {
  auto& impl = *impl_;
  if (impl.config.port == 0) {
    impl.port = impl.http.bind_to_any_port(impl.config.host);
  } else if (impl.http.bind_to_port(impl.config.host, impl.config.port)) {
    impl.port = impl.config.port;
  } else {
    impl.port = -1;
  }
  if (impl.port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + impl.config.host + ":" +
                                    std::to_string(impl.config.port));
  }
  return impl.port;
}

void ApiServer::serve() {
  impl_->sessions.start_autoplay();
  impl_->http.listen_after_bind();
}

int ApiServer::start() {
  const int port = bind();
  impl_->sessions.start_autoplay();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void ApiServer::stop() {
  auto& impl = *impl_;
  if (impl.stopped) return;
  impl.stopped = true;
  impl.http.stop();
  if (impl.thread.joinable()) impl.thread.join();
  impl.sessions.stop_autoplay();
  impl.store.flush_index();
}

int ApiServer::port() const { return impl_->port; }
store::TraceStore& ApiServer::store() { return impl_->store; }
debugger::SessionManager& ApiServer::sessions() { return impl_->sessions; }

}  // namespace polexam::api
