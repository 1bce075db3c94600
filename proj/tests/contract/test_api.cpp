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

// REST contract suite against an in-process server with no UI assets.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <httplib.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "polexam/api/server.hpp"
#include "polexam/policy/baselines.hpp"
#include "polexam/policy/policy_io.hpp"
#include "polexam/pomdp/episode.hpp"
#include "polexam/pomdp/scenario.hpp"
#include "polexam/pomdp/trace.hpp"
#include "schema.hpp"
#include "temp_dir.hpp"

using polexam::ErrorCode;
using polexam::Json;
using J = nlohmann::json;

namespace {

polexam::testing::SchemaSet& schemas() {
  static polexam::testing::SchemaSet set(POLEXAM_SCHEMA_DIR);
  return set;
}

struct Reply {
  int status = 0;
  J body;
  std::string raw;
  std::string content_type;
};

/// Thread-safe sink for the request log.
class LogSink : public std::stringbuf {
 public:
  std::string text() {
    std::lock_guard lock(mutex_);
    return str();
  }

 protected:
  int sync() override {
    std::lock_guard lock(mutex_);
    return std::stringbuf::sync();
  }

 private:
  std::mutex mutex_;
};

struct Api {
  explicit Api(polexam::debugger::ManagerConfig sessions = {},
               std::optional<std::filesystem::path> static_dir = std::nullopt)
      : log_stream(&log) {
    polexam::api::ServerConfig config;
    config.store_root = dir.path() / "store";
    config.port = 0;
    config.sessions = sessions;
    config.static_dir = static_dir;
    config.request_log = &log_stream;
    server = std::make_unique<polexam::api::ApiServer>(config);
    port = server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(30, 0);
  }

  static Reply wrap(const httplib::Result& r) {
    REQUIRE(r);
    Reply out;
    out.status = r->status;
    out.raw = r->body;
    out.content_type = r->get_header_value("Content-Type");
    if (out.content_type.rfind("application/json", 0) == 0 && !r->body.empty()) {
      out.body = J::parse(r->body);
    }
    return out;
  }

  Reply get(const std::string& path) { return wrap(client->Get("/api/v1" + path)); }
  Reply del(const std::string& path) { return wrap(client->Delete("/api/v1" + path)); }
  Reply post(const std::string& path, const J& body = J::object()) {
    return wrap(client->Post("/api/v1" + path, body.dump(), "application/json"));
  }
  Reply post_raw(const std::string& path, const std::string& body, const std::string& type) {
    return wrap(client->Post("/api/v1" + path, body, type));
  }

  std::string create_session(J body) {
    auto r = post("/sessions", body);
    REQUIRE_MESSAGE(r.status == 201, r.raw);
    return r.body["session_id"];
  }

  polexam::testing::TempDir dir;
  LogSink log;
  std::ostream log_stream;
  std::unique_ptr<polexam::api::ApiServer> server;
  int port = 0;
  std::unique_ptr<httplib::Client> client;
};

void expect_schema(const std::string& schema, const J& doc) {
  const bool ok = schemas().ok(schema, doc);
  CHECK_MESSAGE(ok, schemas().last_errors() << doc.dump().substr(0, 400));
}

void expect_error(const Reply& r, int status, const std::string& code) {
  CHECK_MESSAGE(r.status == status, r.raw);
  CHECK_MESSAGE(r.body.value("code", "") == code, r.raw);
  expect_schema("api_error.json", r.body);
}

J simulation_body(const std::string& policy = "builtin:threshold:0.5", std::uint64_t seed = 7) {
  return J{{"source", "simulation"}, {"scenario", "intrusion-default"},
           {"policy", policy}, {"seed", seed}};
}

polexam::pomdp::EpisodeTrace make_trace(const std::string& scenario, std::uint64_t seed,
                                        const std::string& id) {
  const auto model =
      polexam::pomdp::build_intrusion_scenario(*polexam::pomdp::find_builtin_scenario(scenario));
  const auto policy = polexam::policy::make_threshold_policy(model, 0.5);
  auto trace = polexam::pomdp::simulate_episode(model, *policy, seed);
  trace.trace_id = id;
  return trace;
}

std::string raw_request(int port, const std::string& request) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  REQUIRE(::send(fd, request.data(), request.size(), 0) == static_cast<ssize_t>(request.size()));
  std::string out;
  char buf[4096];
  ssize_t n;
  while ((n = ::recv(fd, buf, sizeof buf, 0)) > 0) out.append(buf, static_cast<std::size_t>(n));
  ::close(fd);
  return out;
}

}  // namespace

TEST_CASE("every error code maps to one documented status and body") {
  const std::set<int> allowed = {400, 404, 409, 422, 429, 500};
  for (int c = 0; c <= static_cast<int>(ErrorCode::kIo); ++c) {
    const auto code = static_cast<ErrorCode>(c);
    CHECK(allowed.count(polexam::api::http_status(code)) == 1);
    const J body = J::parse(polexam::api::error_body(polexam::Error(code, "x")).dump());
    expect_schema("api_error.json", body);
    CHECK(body["code"] == std::string(polexam::error_code_name(code)));
  }
  CHECK(polexam::api::http_status(ErrorCode::kNotFound) == 404);
  CHECK(polexam::api::http_status(ErrorCode::kIncompatible) == 422);
  CHECK(polexam::api::http_status(ErrorCode::kFinished) == 409);
  CHECK(polexam::api::http_status(ErrorCode::kRange) == 400);
  CHECK(polexam::api::http_status(ErrorCode::kIngest) == 422);
  CHECK(polexam::api::http_status(ErrorCode::kCapacity) == 429);
  const J ingest = J::parse(polexam::api::error_body(polexam::pomdp::IngestError(3, "bad")).dump());
  CHECK(ingest["detail"]["line"] == 3);
}

TEST_CASE("health and unknown routes") {
  Api api;
  auto r = api.get("/health");
  CHECK(r.status == 200);
  expect_schema("health.json", r.body);
  CHECK(r.body["version"] == "0.1.0");

  expect_error(api.get("/nope"), 404, "not_found");
  expect_error(api.post("/sessions/x/bogus"), 404, "not_found");
}

TEST_CASE("malformed HTTP is rejected with bad_request") {
  Api api;
  const std::string reply = raw_request(api.port, "GARBAGE\r\n\r\n");
  CHECK(reply.rfind("HTTP/1.1 400", 0) == 0);
  const auto body = J::parse(reply.substr(reply.find("\r\n\r\n") + 4));
  CHECK(body["code"] == "bad_request");
  expect_schema("api_error.json", body);
}

TEST_CASE("session lifecycle") {
  Api api;
  auto created = api.post("/sessions", simulation_body());
  REQUIRE(created.status == 201);
  expect_schema("session.json", created.body);
  const std::string id = created.body["session_id"];
  CHECK(created.body["status"] == "halted");
  CHECK(created.body["cursor"] == 0);
  CHECK(created.body["frame"]["t"] == 0);
  CHECK(created.body["frame"]["belief"] == J::array({1.0, 0.0, 0.0, 0.0}));
  CHECK(created.body["frame"]["action_distribution"].is_null());
  CHECK(created.body["source"]["policy"] == "builtin:threshold:0.5");

  auto listed = api.get("/sessions");
  CHECK(listed.status == 200);
  expect_schema("session_list.json", listed.body);
  CHECK(listed.body["sessions"].size() == 1);

  auto one = api.get("/sessions/" + id);
  CHECK(one.status == 200);
  expect_schema("session.json", one.body);

  auto stepped = api.post("/sessions/" + id + "/step", {{"n", 2}});
  CHECK(stepped.status == 200);
  expect_schema("frame_response.json", stepped.body);
  CHECK(stepped.body["t"].get<int>() > 0);
  CHECK(stepped.body["t"].get<int>() <= 2);
  expect_schema("action_distribution.json", stepped.body["action_distribution"]);

  auto one_step = api.post("/sessions/" + id + "/step");
  CHECK(one_step.status == 200);
  expect_error(api.post("/sessions/" + id + "/step", {{"n", 0}}), 400, "range");
  expect_error(api.post("/sessions/" + id + "/step", {{"n", "two"}}), 422, "validation");
  expect_error(api.post_raw("/sessions/" + id + "/step", "{not json", "application/json"), 422,
               "validation");

  auto frame = api.get("/sessions/" + id + "/frame");
  CHECK(frame.status == 200);
  expect_schema("frame_response.json", frame.body);
  const int t = frame.body["t"];

  auto reversed = api.post("/sessions/" + id + "/reverse", {{"n", 1}});
  CHECK(reversed.status == 200);
  expect_schema("frame_response.json", reversed.body);
  CHECK(reversed.body["t"] == t - 1);
  expect_error(api.post("/sessions/" + id + "/reverse", {{"n", 99}}), 400, "range");

  auto window = api.get("/sessions/" + id + "/frames?from=0&to=100");
  CHECK(window.status == 200);
  expect_schema("frame_window.json", window.body);
  CHECK(window.body["from"] == 0);
  CHECK(window.body["to"] == t);
  CHECK(window.body["frames"].size() == static_cast<std::size_t>(t + 1));
  auto tail = api.get("/sessions/" + id + "/frames?from=1");
  CHECK(tail.body["frames"].size() == static_cast<std::size_t>(t));
  expect_error(api.get("/sessions/" + id + "/frames?from=abc"), 400, "range");
  expect_error(api.get("/sessions/" + id + "/frames?from=5&to=2"), 400, "range");

  auto probe = api.post("/sessions/" + id + "/what-if", {{"action", 1}});
  CHECK(probe.status == 200);
  expect_schema("what_if.json", probe.body);
  CHECK(probe.body["defender_action"] == 1);
  expect_error(api.post("/sessions/" + id + "/what-if", {{"action", 9}}), 400, "range");
  expect_error(api.post("/sessions/" + id + "/what-if"), 422, "validation");

  auto forked = api.post("/sessions/" + id + "/fork", {{"seed", 3}});
  CHECK(forked.status == 201);
  expect_schema("session.json", forked.body);
  CHECK(forked.body["source"]["forked_from"] == id);
  CHECK(forked.body["cursor"] == t - 1);

  auto deleted = api.del("/sessions/" + id);
  CHECK(deleted.status == 200);
  expect_schema("deleted.json", deleted.body);
  expect_error(api.get("/sessions/" + id), 404, "not_found");
  expect_error(api.post("/sessions/" + id + "/step"), 404, "not_found");
  expect_error(api.del("/sessions/" + id), 404, "not_found");
  expect_error(api.post("/sessions/" + id + "/fork"), 404, "not_found");
}

TEST_CASE("step n=2 on a halted session advances t by at most 2") {
  Api api;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto id = api.create_session(simulation_body("builtin:threshold:0.5", seed));
    int t = 0;
    for (int i = 0; i < 60; ++i) {
      auto r = api.post("/sessions/" + id + "/step", {{"n", 2}});
      if (r.status == 409) break;
      REQUIRE(r.status == 200);
      const int next = r.body["t"];
      CHECK(next > t);
      CHECK(next - t <= 2);
      t = next;
    }
  }
}

TEST_CASE("breakpoints endpoints") {
  Api api;
  const auto id = api.create_session(simulation_body("builtin:never-defend"));
  auto bp = api.post("/sessions/" + id + "/breakpoints", {{"type", "time_equals"}, {"t", 10}});
  CHECK(bp.status == 201);
  expect_schema("breakpoint.json", bp.body);
  const int bid = bp.body["id"];

  auto wrapped = api.post("/sessions/" + id + "/breakpoints",
                          {{"predicate", {{"type", "all"},
                                          {"of", J::array({{{"type", "belief_threshold"},
                                                            {"state", 2},
                                                            {"op", ">="},
                                                            {"value", 0.9}}})}}}});
  CHECK(wrapped.status == 201);
  expect_schema("breakpoint.json", wrapped.body);

  auto listed = api.get("/sessions/" + id + "/breakpoints");
  CHECK(listed.status == 200);
  expect_schema("breakpoint_list.json", listed.body);
  CHECK(listed.body["breakpoints"].size() == 2);

  auto hit = api.post("/sessions/" + id + "/continue");
  CHECK(hit.status == 200);
  expect_schema("frame_response.json", hit.body);
  if (hit.body["halt_reason"]["kind"] == "breakpoint") {
    CHECK(hit.body["t"].get<int>() <= 10);
  }

  expect_error(api.post("/sessions/" + id + "/breakpoints", {{"type", "sometimes"}}), 422,
               "validation");
  expect_error(api.post("/sessions/" + id + "/breakpoints",
                        {{"type", "belief_threshold"}, {"state", 99}, {"op", ">="}, {"value", 0.5}}),
               422, "validation");

  auto removed = api.del("/sessions/" + id + "/breakpoints/" + std::to_string(bid));
  CHECK(removed.status == 200);
  expect_schema("deleted.json", removed.body);
  expect_error(api.del("/sessions/" + id + "/breakpoints/" + std::to_string(bid)), 404,
               "not_found");
  expect_error(api.del("/sessions/" + id + "/breakpoints/abc"), 404, "not_found");
  CHECK(api.get("/sessions/" + id + "/breakpoints").body["breakpoints"].size() == 1);
}

TEST_CASE("finished and precondition errors") {
  Api api;
  const auto id = api.create_session(simulation_body());
  expect_error(api.post("/sessions/" + id + "/halt"), 409, "precondition");
  auto done = api.post("/sessions/" + id + "/continue");
  CHECK(done.status == 200);
  CHECK(done.body["status"] == "finished");
  CHECK_FALSE(done.body["terminated"].is_null());
  expect_error(api.post("/sessions/" + id + "/step"), 409, "finished");
  expect_error(api.post("/sessions/" + id + "/continue"), 409, "finished");

  J body = simulation_body();
  body["mode"] = "autoplay";
  body["autoplay_interval_ms"] = 60000;
  const auto auto_id = api.create_session(body);
  auto running = api.post("/sessions/" + auto_id + "/continue");
  CHECK(running.status == 200);
  CHECK(running.body["status"] == "running");
  expect_error(api.post("/sessions/" + auto_id + "/step"), 409, "precondition");
  expect_error(api.post("/sessions/" + auto_id + "/what-if", {{"action", 0}}), 409,
               "precondition");
  auto halted = api.post("/sessions/" + auto_id + "/halt");
  CHECK(halted.status == 200);
  CHECK(halted.body["status"] == "halted");
  CHECK(halted.body["halt_reason"]["kind"] == "user");
}

TEST_CASE("autoplay frames are delivered by polling") {
  Api api;
  J body = simulation_body();
  body["mode"] = "autoplay";
  body["autoplay_interval_ms"] = 5;
  const auto id = api.create_session(body);
  CHECK(api.post("/sessions/" + id + "/continue").status == 200);
  int t = 0;
  for (int i = 0; i < 400 && t < 3; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    t = api.get("/sessions/" + id + "/frame").body["t"];
  }
  CHECK(t >= 3);
}

TEST_CASE("session creation errors") {
  Api api;
  J unknown_scenario = simulation_body();
  unknown_scenario["scenario"] = "no-such-scenario";
  expect_error(api.post("/sessions", unknown_scenario), 404, "not_found");
  expect_error(api.post("/sessions", simulation_body("no-such-policy")), 404, "not_found");
  expect_error(api.post("/sessions", simulation_body("builtin:bogus")), 404, "not_found");
  expect_error(api.post("/sessions", simulation_body("builtin:threshold:abc")), 422,
               "validation");
  expect_error(api.post("/sessions", J{{"source", "simulation"}}), 422, "validation");
  expect_error(api.post("/sessions", J{{"source", "dream"}, {"policy", "builtin:random"}}), 422,
               "validation");
  J bad_mode = simulation_body();
  bad_mode["mode"] = "turbo";
  expect_error(api.post("/sessions", bad_mode), 422, "validation");
  J bad_horizon = simulation_body();
  bad_horizon["horizon"] = 0;
  expect_error(api.post("/sessions", bad_horizon), 400, "range");
  expect_error(api.post_raw("/sessions", "[1,2]", "application/json"), 422, "validation");
  expect_error(api.post("/sessions", J{{"source", "replay"}, {"trace_id", "missing"}}), 404,
               "not_found");

  // A policy built for eight-bin metrics does not fit the default scenario.
  J config = polexam::pomdp::to_json(polexam::pomdp::ScenarioConfig{});
  config["bins"] = 8;
  REQUIRE(api.post("/scenarios", {{"name", "eight-bins"}, {"config", config}}).status == 201);
  REQUIRE(api.post("/policies", {{"name", "coarse"}, {"builtin", "random"}, {"scenario", "eight-bins"}})
              .status == 201);
  expect_error(api.post("/sessions", simulation_body("coarse")), 422, "incompatible");
}

TEST_CASE("session cap") {
  polexam::debugger::ManagerConfig caps;
  caps.max_sessions = 2;
  Api api(caps);
  api.create_session(simulation_body());
  api.create_session(simulation_body());
  expect_error(api.post("/sessions", simulation_body()), 429, "capacity");
}

TEST_CASE("trace ingest, listing, retrieval and export") {
  Api api;
  const auto trace = make_trace("intrusion-default", 11, "trace-a");
  const std::string ndjson = polexam::pomdp::write_trace(trace);

  auto ingested = api.post_raw("/traces", ndjson, "application/x-ndjson");
  CHECK(ingested.status == 201);
  expect_schema("trace_metadata.json", ingested.body);
  CHECK(ingested.body["trace_id"] == "trace-a");
  CHECK(ingested.body["step_count"] == trace.steps.size());
  expect_error(api.post_raw("/traces", ndjson, "application/x-ndjson"), 409, "conflict");

  // JSON array form.
  const auto other = make_trace("intrusion-ping-scan", 12, "trace-b");
  J records = J::array();
  records.push_back(J::parse(polexam::pomdp::header_to_json(other).dump()));
  for (const auto& s : other.steps) {
    records.push_back(J::parse(polexam::pomdp::step_to_json(s).dump()));
  }
  auto json_ingest = api.post_raw("/traces", records.dump(), "application/json");
  CHECK(json_ingest.status == 201);
  expect_schema("trace_metadata.json", json_ingest.body);

  // Broken second line.
  std::string broken = ndjson.substr(0, ndjson.find('\n') + 1) + "{\"t\":\n";
  auto bad = api.post_raw("/traces", broken, "application/x-ndjson");
  expect_error(bad, 422, "ingest");
  CHECK(bad.body["detail"]["line"] == 2);
  expect_error(api.post_raw("/traces", "{\"x\":1}", "application/json"), 422, "validation");

  auto listed = api.get("/traces");
  CHECK(listed.status == 200);
  expect_schema("trace_list.json", listed.body);
  CHECK(listed.body["traces"].size() == 2);
  auto filtered = api.get("/traces?scenario=intrusion-ping-scan");
  CHECK(filtered.body["traces"].size() == 1);
  CHECK(filtered.body["traces"][0]["trace_id"] == "trace-b");

  auto got = api.get("/traces/trace-a");
  CHECK(got.status == 200);
  expect_schema("trace.json", got.body);
  CHECK(got.body["steps"].size() == trace.steps.size());

  auto exported = api.get("/traces/trace-a/export");
  CHECK(exported.status == 200);
  CHECK(exported.content_type.rfind("application/x-ndjson", 0) == 0);
  CHECK(exported.raw == ndjson);

  expect_error(api.get("/traces/nope"), 404, "not_found");
  expect_error(api.get("/traces/nope/export"), 404, "not_found");

  // Form-encoded bodies, as curl sends by default, are taken as text.
  const std::string large = polexam::pomdp::write_trace(make_trace("intrusion-default", 13, "trace-c"));
  REQUIRE(large.size() > 8192);
  auto form = api.post_raw("/traces", large, "application/x-www-form-urlencoded");
  CHECK(form.status == 201);
  CHECK(api.get("/traces/trace-c/export").raw == large);
}

TEST_CASE("replay sessions") {
  Api api;
  const auto trace = make_trace("intrusion-default", 21, "replay-me");
  REQUIRE(api.post_raw("/traces", polexam::pomdp::write_trace(trace), "application/x-ndjson")
              .status == 201);
  auto created = api.post("/sessions", {{"source", "replay"}, {"trace_id", "replay-me"}});
  REQUIRE(created.status == 201);
  expect_schema("session.json", created.body);
  CHECK(created.body["source"]["type"] == "replay");
  CHECK(created.body["source"]["trace_id"] == "replay-me");
  const std::string id = created.body["session_id"];
  auto step = api.post("/sessions/" + id + "/step");
  CHECK(step.body["defender_action"] == trace.steps[0].defender_action);
  CHECK(step.body["hidden_state"] == trace.steps[0].state);

  auto overlay = api.post("/sessions", {{"source", "replay"},
                                        {"trace_id", "replay-me"},
                                        {"policy", "builtin:random"}});
  CHECK(overlay.status == 201);

  expect_error(api.post("/sessions", {{"source", "replay"},
                                      {"trace_id", "replay-me"},
                                      {"scenario", "intrusion-ping-scan"}}),
               422, "incompatible");
}

TEST_CASE("policy catalogue and predictions") {
  Api api;
  auto random = api.post("/policies", {{"name", "coin"}, {"builtin", "random"}});
  CHECK(random.status == 201);
  expect_schema("catalog_entry.json", random.body);
  CHECK(random.body["kind"] == "random");
  expect_error(api.post("/policies", {{"name", "coin"}, {"builtin", "random"}}), 409, "conflict");

  const auto model = polexam::pomdp::build_intrusion_scenario(polexam::pomdp::ScenarioConfig{});
  const auto threshold = polexam::policy::make_threshold_policy(model, 0.5);
  auto by_payload = api.post(
      "/policies", {{"name", "alpha-half"}, {"payload", polexam::policy::save_policy(*threshold)}});
  CHECK(by_payload.status == 201);
  CHECK(by_payload.body["kind"] == "threshold");
  auto by_object = api.post(
      "/policies", {{"name", "alpha-half-object"},
                    {"payload", J::parse(polexam::policy::save_policy(*threshold))}});
  CHECK(by_object.status == 201);

  expect_error(api.post("/policies", {{"name", "junk"}, {"payload", "not a policy"}}), 422,
               "validation");
  expect_error(api.post("/policies", {{"name", "../escape"}, {"builtin", "random"}}), 422,
               "validation");
  expect_error(api.post("/policies", {{"name", "x"}}), 422, "validation");

  auto listed = api.get("/policies");
  CHECK(listed.status == 200);
  expect_schema("policy_list.json", listed.body);
  CHECK(listed.body["policies"].size() == 3);
  auto payload = api.get("/policies/alpha-half");
  CHECK(payload.status == 200);
  CHECK(payload.raw == polexam::policy::save_policy(*threshold));
  expect_error(api.get("/policies/nope"), 404, "not_found");

  const J uniform_body = {{"belief", {0.25, 0.25, 0.25, 0.25}},
                          {"last_observation", {3, 0, 7}},
                          {"t", 10},
                          {"horizon", 100}};
  auto p = api.post("/policies/coin/predict", uniform_body);
  CHECK(p.status == 200);
  expect_schema("action_distribution.json", p.body);
  CHECK(p.body["probs"] == J::array({0.5, 0.5}));

  // Mass 0.6 on the intrusion states with alpha = 0.5 defends.
  auto defend = api.post("/policies/alpha-half/predict",
                         {{"belief", {0.4, 0.2, 0.2, 0.2}}, {"t", 0}, {"horizon", 100}});
  CHECK(defend.status == 200);
  J expected = J::array({0.0, 0.0});
  expected[*model.defend_action] = 1.0;
  CHECK(defend.body["probs"] == expected);

  expect_error(api.post("/policies/coin/predict",
                        {{"belief", {0.5, 0.5, 0.5, 0.0}}, {"t", 0}, {"horizon", 100}}),
               422, "validation");
  expect_error(api.post("/policies/coin/predict",
                        {{"belief", {0.25, 0.25, 0.25, 0.2500011}}, {"t", 0}, {"horizon", 100}}),
               422, "validation");
  CHECK(api.post("/policies/coin/predict",
                 {{"belief", {0.25, 0.25, 0.25, 0.2500009}}, {"t", 0}, {"horizon", 100}})
            .status == 200);
  expect_error(api.post("/policies/coin/predict",
                        {{"belief", {0.5, 0.5}}, {"t", 0}, {"horizon", 100}}),
               422, "incompatible");
  expect_error(api.post("/policies/coin/predict",
                        {{"belief", {1, 0, 0, 0}}, {"last_observation", {1}}, {"horizon", 100}}),
               422, "incompatible");
  expect_error(api.post("/policies/coin/predict", {{"belief", {1, 0, 0, 0}}, {"t", 5}}), 422,
               "validation");
  expect_error(api.post("/policies/coin/predict",
                        {{"belief", {1, 0, 0, 0}}, {"t", 200}, {"horizon", 100}}),
               422, "validation");
  expect_error(api.post("/policies/nope/predict", uniform_body), 404, "not_found");
}

TEST_CASE("scenario catalogue and observation-model estimation") {
  Api api;
  auto listed = api.get("/scenarios");
  CHECK(listed.status == 200);
  expect_schema("scenario_list.json", listed.body);
  CHECK(listed.body["scenarios"].size() == 3);

  J config = polexam::pomdp::to_json(polexam::pomdp::ScenarioConfig{});
  config["horizon"] = 50;
  auto created = api.post("/scenarios", {{"name", "short"}, {"config", config}});
  CHECK(created.status == 201);
  expect_schema("catalog_entry.json", created.body);
  expect_error(api.post("/scenarios", {{"name", "short"}, {"config", config}}), 409, "conflict");
  expect_error(api.post("/scenarios", {{"name", "intrusion-default"}, {"config", config}}), 409,
               "conflict");
  J broken = config;
  broken["horizon"] = "long";
  expect_error(api.post("/scenarios", {{"name", "broken"}, {"config", broken}}), 422,
               "validation");
  expect_error(api.post("/scenarios", {{"name", "noconfig"}}), 422, "validation");

  auto detail = api.get("/scenarios/short");
  CHECK(detail.status == 200);
  expect_schema("scenario.json", detail.body);
  CHECK(detail.body["model"]["horizon"] == 50);
  expect_schema("scenario.json", api.get("/scenarios/intrusion-default").body);
  expect_error(api.get("/scenarios/nope"), 404, "not_found");

  std::vector<std::string> ids;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::string id = "est-" + std::to_string(seed);
    REQUIRE(api.post_raw("/traces",
                         polexam::pomdp::write_trace(make_trace("intrusion-default", seed, id)),
                         "application/x-ndjson")
                .status == 201);
    ids.push_back(id);
  }
  const std::string path = "/scenarios/intrusion-default/estimate-observation-model";
  auto estimate = api.post(path, {{"trace_ids", ids}, {"alpha", 1.0}, {"min_samples", 10}});
  CHECK(estimate.status == 200);
  expect_schema("observation_kernel_estimate.json", estimate.body);
  CHECK(estimate.body["registered_scenario"].is_null());

  auto all = api.post(path, J::object());
  CHECK(all.status == 200);
  CHECK(all.body["observation_kernel"] == estimate.body["observation_kernel"]);

  auto registered = api.post(path, {{"trace_ids", ids}, {"register_as", "estimated"}});
  CHECK(registered.status == 200);
  CHECK(registered.body["registered_scenario"] == "estimated");
  CHECK(api.post("/sessions", {{"scenario", "estimated"}, {"policy", "builtin:random"}}).status ==
        201);

  expect_error(api.post(path, {{"trace_ids", ids}, {"alpha", -1.0}}), 422, "config");
  expect_error(api.post(path, {{"trace_ids", J::array()}}), 422, "empty_input");
  expect_error(api.post(path, {{"trace_ids", {"missing"}}}), 404, "not_found");
  expect_error(api.post(path, {{"trace_ids", "est-0"}}), 422, "validation");
  expect_error(api.post("/scenarios/nope/estimate-observation-model", J::object()), 404,
               "not_found");

  REQUIRE(api.post_raw("/traces",
                       polexam::pomdp::write_trace(make_trace("intrusion-ping-scan", 1, "ping")),
                       "application/x-ndjson")
              .status == 201);
  expect_error(api.post(path, {{"trace_ids", {"est-0", "ping"}}}), 422, "incompatible");
}

TEST_CASE("concurrent steps on one session are serialized") {
  Api api;
  J body = simulation_body("builtin:never-defend", 5);
  body["horizon"] = 100;
  const auto id = api.create_session(body);
  const auto reference = api.create_session(body);

  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int k = 0; k < 6; ++k) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", api.port);
      for (int i = 0; i < 5; ++i) {
        auto r = c.Post("/api/v1/sessions/" + id + "/step", "{\"n\":1}", "application/json");
        if (r && r->status == 200) ++ok;
      }
    });
  }
  for (auto& t : threads) t.join();

  for (int i = 0; i < ok; ++i) api.post("/sessions/" + reference + "/step");
  auto a = api.get("/sessions/" + id + "/frames");
  auto b = api.get("/sessions/" + reference + "/frames");
  CHECK(a.body["frames"].size() == static_cast<std::size_t>(ok + 1));
  a.body.erase("session_id");
  b.body.erase("session_id");
  CHECK(a.body == b.body);
}

TEST_CASE("reads do not mutate sessions or the store") {
  Api api;
  REQUIRE(api.post_raw("/traces",
                       polexam::pomdp::write_trace(make_trace("intrusion-default", 3, "t3")),
                       "application/x-ndjson")
              .status == 201);
  REQUIRE(api.post("/policies", {{"name", "coin"}, {"builtin", "random"}}).status == 201);
  const auto id = api.create_session(simulation_body());
  api.post("/sessions/" + id + "/step", {{"n", 3}});
  api.post("/sessions/" + id + "/reverse");

  const auto store_before = api.server->store().index();
  const auto session_before = api.get("/sessions/" + id).body;
  for (int i = 0; i < 2; ++i) {
    for (const std::string& path : std::vector<std::string>{"/health", "/sessions", "/sessions/" + id, "/sessions/" + id + "/frame",
          "/sessions/" + id + "/frames", "/sessions/" + id + "/breakpoints", "/traces",
          "/traces/t3", "/traces/t3/export", "/policies", "/policies/coin", "/scenarios",
          "/scenarios/intrusion-default"}) {
      CHECK_MESSAGE(api.get(path).status == 200, path);
    }
  }
  CHECK(api.server->store().index() == store_before);
  CHECK(api.get("/sessions/" + id).body == session_before);
}

TEST_CASE("request log has one structured line per request") {
  Api api;
  api.get("/health");
  api.get("/nope");
  api.post("/sessions", simulation_body());
  api.server->stop();
  std::istringstream in(api.log.text());
  std::vector<J> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(J::parse(line));
  REQUIRE(lines.size() == 3);
  // Lines are written after each response, so their order is not fixed.
  std::multiset<std::string> seen;
  for (const auto& l : lines) {
    seen.insert(l["method"].get<std::string>() + " " + l["path"].get<std::string>() + " " +
                std::to_string(l["status"].get<int>()));
  }
  CHECK(seen == std::multiset<std::string>{"GET /api/v1/health 200", "GET /api/v1/nope 404",
                                           "POST /api/v1/sessions 201"});
  for (const auto& l : lines) {
    CHECK(l.contains("ts"));
    CHECK(l["duration_ms"].is_number());
  }
}

TEST_CASE("static assets are optional") {
  polexam::testing::TempDir assets;
  {
    std::ofstream(assets.path() / "index.html") << "<html>ui</html>";
  }
  Api with_ui({}, assets.path());
  auto page = with_ui.client->Get("/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body == "<html>ui</html>");
  CHECK(with_ui.get("/health").status == 200);

  Api without_ui;
  auto missing = without_ui.client->Get("/index.html");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(without_ui.get("/health").status == 200);
}

TEST_CASE("shutdown flushes the store index") {
  Api api;
  REQUIRE(api.post("/policies", {{"name", "coin"}, {"builtin", "random"}}).status == 201);
  std::filesystem::remove(api.dir.path() / "store" / "index.json");
  api.server->stop();
  std::ifstream in(api.dir.path() / "store" / "index.json");
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(J::parse(ss.str()) ==
        J::parse(polexam::store::to_json(api.server->store().index()).dump()));
}

TEST_CASE("bind failure is reported") {
  Api first;
  polexam::api::ServerConfig config;
  polexam::testing::TempDir dir;
  config.store_root = dir.path();
  config.port = first.port;
  polexam::api::ApiServer second(config);
  CHECK_THROWS_AS(second.bind(), polexam::Error);
}
