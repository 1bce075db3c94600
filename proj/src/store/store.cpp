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

#include "polexam/store/store.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "polexam/error.hpp"
#include "polexam/policy/policy_io.hpp"

namespace polexam::store {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTraceSuffix = ".jsonl";
constexpr std::string_view kMetaSuffix = ".meta.json";

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

[[noreturn]] void not_found(std::string_view what, const std::string& id) {
  throw Error(ErrorCode::kNotFound, std::string(what) + " '" + id + "' not found");
}

void require_identifier(std::string_view what, const std::string& id) {
  if (!pomdp::is_valid_identifier(id)) {
    throw Error(ErrorCode::kValidation,
                std::string(what) + " id '" + id +
                    "' must be 1-128 characters from [A-Za-z0-9._-] and not start with '.'");
  }
}

struct Sidecar {
  std::uint64_t sequence = 0;
  std::string created_at;
};

std::string sidecar_bytes(const Sidecar& s) {
  Json doc;
  doc["sequence"] = s.sequence;
  doc["created_at"] = s.created_at;
  return doc.dump() + "\n";
}

std::optional<Sidecar> read_sidecar(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  try {
    const Json doc = Json::parse(read_file(path));
    return Sidecar{doc.at("sequence").get<std::uint64_t>(),
                   doc.at("created_at").get<std::string>()};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

TraceMetadata metadata_of(const pomdp::EpisodeTrace& trace, const Sidecar& side) {
  return TraceMetadata{trace.trace_id,      trace.scenario,
                       trace.config_hash,   trace.seed,
                       trace.steps.size(),  trace.terminated_reason,
                       side.created_at,     side.sequence};
}

// Ids of payloads `dir/<id><suffix>` that have a sidecar.
std::vector<std::string> complete_entries(const fs::path& dir, std::string_view suffix) {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.size() <= suffix.size() || !name.ends_with(suffix)) continue;
    if (name.ends_with(kMetaSuffix) || name.front() == '.') continue;
    const std::string id = name.substr(0, name.size() - suffix.size());
    if (!pomdp::is_valid_identifier(id)) continue;
    if (fs::is_regular_file(dir / (id + std::string(kMetaSuffix)), ec)) ids.push_back(id);
  }
  return ids;
}

template <typename T>
void sort_by_sequence(std::vector<T>& items) {
  std::sort(items.begin(), items.end(),
            [](const T& a, const T& b) { return a.sequence < b.sequence; });
}

}  // namespace

void atomic_write_file(const fs::path& path, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  const fs::path tmp = path.parent_path() /
                       ("." + path.filename().string() + ".tmp" + std::to_string(++counter));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename onto " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json to_json(const TraceMetadata& meta) {
  Json doc;
  doc["trace_id"] = meta.trace_id;
  doc["scenario"] = meta.scenario;
  doc["config_hash"] = meta.config_hash;
  doc["seed"] = meta.seed ? Json(*meta.seed) : Json(nullptr);
  doc["step_count"] = meta.step_count;
  doc["terminated_reason"] =
      meta.terminated_reason
          ? Json(std::string(pomdp::termination_reason_name(*meta.terminated_reason)))
          : Json(nullptr);
  doc["created_at"] = meta.created_at;
  doc["sequence"] = meta.sequence;
  return doc;
}

Json to_json(const CatalogEntry& entry) {
  Json doc;
  doc["id"] = entry.id;
  doc["kind"] = entry.kind;
  doc["created_at"] = entry.created_at;
  doc["sequence"] = entry.sequence;
  return doc;
}

Json to_json(const StoreIndex& index) {
  Json doc;
  doc["traces"] = Json::array();
  for (const auto& t : index.traces) doc["traces"].push_back(to_json(t));
  doc["policies"] = Json::array();
  for (const auto& p : index.policies) doc["policies"].push_back(to_json(p));
  doc["scenarios"] = Json::array();
  for (const auto& s : index.scenarios) doc["scenarios"].push_back(to_json(s));
  return doc;
}

pomdp::ScenarioConfig parse_scenario_payload(std::string_view bytes,
                                             const std::string& name) {
  auto config = pomdp::scenario_config_from_json(parse_json(bytes, "scenario config"));
  config.name = name;
  pomdp::validate_config(config);
  return config;
}

TraceStore::TraceStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const fs::path& dir : {root_ / "traces", root_ / "catalog" / "policies",
                             root_ / "catalog" / "scenarios"}) {
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }
  rebuild_index();
}

fs::path TraceStore::trace_path(const std::string& id) const {
  return root_ / "traces" / (id + std::string(kTraceSuffix));
}

fs::path TraceStore::policy_path(const std::string& id) const {
  return root_ / "catalog" / "policies" / (id + ".json");
}

fs::path TraceStore::scenario_path(const std::string& id) const {
  return root_ / "catalog" / "scenarios" / (id + ".json");
}

static fs::path sidecar_path(const fs::path& payload, std::string_view suffix) {
  std::string name = payload.filename().string();
  name.resize(name.size() - suffix.size());
  return payload.parent_path() / (name + std::string(kMetaSuffix));
}

StoreIndex TraceStore::scan() const {
  StoreIndex index;
  for (const auto& id : complete_entries(root_ / "traces", kTraceSuffix)) {
    const auto side = read_sidecar(sidecar_path(trace_path(id), kTraceSuffix));
    if (!side) continue;
    try {
      const auto trace = pomdp::read_trace(read_file(trace_path(id)));
      if (trace.trace_id != id) continue;
      index.traces.push_back(metadata_of(trace, *side));
    } catch (const Error&) {
      continue;
    }
  }
  for (const auto& id : complete_entries(root_ / "catalog" / "policies", ".json")) {
    const auto side = read_sidecar(sidecar_path(policy_path(id), ".json"));
    if (!side) continue;
    try {
      const auto p = policy::load_policy(read_file(policy_path(id)));
      index.policies.push_back(
          {id, std::string(policy::policy_kind_name(p->kind())), side->created_at, side->sequence});
    } catch (const Error&) {
      continue;
    }
  }
  for (const auto& id : complete_entries(root_ / "catalog" / "scenarios", ".json")) {
    const auto side = read_sidecar(sidecar_path(scenario_path(id), ".json"));
    if (!side) continue;
    try {
      (void)parse_scenario_payload(read_file(scenario_path(id)), id);
      index.scenarios.push_back({id, "scenario", side->created_at, side->sequence});
    } catch (const Error&) {
      continue;
    }
  }
  sort_by_sequence(index.traces);
  sort_by_sequence(index.policies);
  sort_by_sequence(index.scenarios);
  return index;
}

StoreIndex TraceStore::rebuild_index() {
  StoreIndex fresh = scan();
  std::unique_lock lock(mutex_);
  index_ = std::move(fresh);
  write_index_locked();
  return index_;
}

StoreIndex TraceStore::index() const {
  std::shared_lock lock(mutex_);
  return index_;
}

void TraceStore::flush_index() const {
  std::shared_lock lock(mutex_);
  write_index_locked();
}

void TraceStore::write_index_locked() const {
  atomic_write_file(root_ / "index.json", to_json(index_).dump(2) + "\n");
}

std::uint64_t TraceStore::next_sequence() const {
  std::uint64_t top = 0;
  for (const auto& t : index_.traces) top = std::max(top, t.sequence);
  for (const auto& p : index_.policies) top = std::max(top, p.sequence);
  for (const auto& s : index_.scenarios) top = std::max(top, s.sequence);
  return top + 1;
}

std::string TraceStore::ingest(std::string_view text) {
  return ingest(pomdp::read_trace(text));
}

std::string TraceStore::ingest(const pomdp::EpisodeTrace& trace) {
  require_identifier("trace", trace.trace_id);
  const std::string bytes = pomdp::write_trace(trace);
  std::unique_lock lock(mutex_);
  for (const auto& t : index_.traces) {
    if (t.trace_id == trace.trace_id) {
      throw Error(ErrorCode::kConflict, "trace '" + trace.trace_id + "' already exists");
    }
  }
  const Sidecar side{next_sequence(), utc_now()};
  const fs::path payload = trace_path(trace.trace_id);
  atomic_write_file(payload, bytes);
  atomic_write_file(sidecar_path(payload, kTraceSuffix), sidecar_bytes(side));
  index_.traces.push_back(metadata_of(trace, side));
  write_index_locked();
  return trace.trace_id;
}

TraceMetadata TraceStore::trace_metadata(const std::string& trace_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& t : index_.traces) {
    if (t.trace_id == trace_id) return t;
  }
  not_found("trace", trace_id);
}

std::string TraceStore::export_trace(const std::string& trace_id) const {
  (void)trace_metadata(trace_id);
  std::shared_lock lock(mutex_);
  return read_file(trace_path(trace_id));
}

pomdp::EpisodeTrace TraceStore::get_trace(const std::string& trace_id) const {
  return pomdp::read_trace(export_trace(trace_id));
}

std::vector<TraceMetadata> TraceStore::list_traces(const TraceFilter& filter) const {
  std::shared_lock lock(mutex_);
  std::vector<TraceMetadata> out;
  for (const auto& t : index_.traces) {
    if (filter.scenario && t.scenario != *filter.scenario) continue;
    out.push_back(t);
  }
  return out;
}

std::string TraceStore::register_policy(const std::string& name, std::string_view bytes) {
  require_identifier("policy", name);
  std::shared_ptr<const policy::Policy> loaded;
  try {
    loaded = policy::load_policy(bytes);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
  std::unique_lock lock(mutex_);
  for (const auto& p : index_.policies) {
    if (p.id == name) throw Error(ErrorCode::kConflict, "policy '" + name + "' already exists");
  }
  const Sidecar side{next_sequence(), utc_now()};
  const fs::path payload = policy_path(name);
  atomic_write_file(payload, bytes);
  atomic_write_file(sidecar_path(payload, ".json"), sidecar_bytes(side));
  index_.policies.push_back(
      {name, std::string(policy::policy_kind_name(loaded->kind())), side.created_at, side.sequence});
  write_index_locked();
  return name;
}

std::string TraceStore::policy_payload(const std::string& policy_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& p : index_.policies) {
    if (p.id == policy_id) return read_file(policy_path(policy_id));
  }
  not_found("policy", policy_id);
}

std::shared_ptr<const policy::Policy> TraceStore::load_policy(const std::string& policy_id) const {
  return policy::load_policy(policy_payload(policy_id));
}

std::vector<CatalogEntry> TraceStore::list_policies() const {
  std::shared_lock lock(mutex_);
  return index_.policies;
}

std::string TraceStore::register_scenario(const std::string& name, std::string_view bytes) {
  require_identifier("scenario", name);
  if (pomdp::find_builtin_scenario(name)) {
    throw Error(ErrorCode::kConflict, "scenario '" + name + "' is built in");
  }
  try {
    (void)parse_scenario_payload(bytes, name);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
  std::unique_lock lock(mutex_);
  for (const auto& s : index_.scenarios) {
    if (s.id == name) throw Error(ErrorCode::kConflict, "scenario '" + name + "' already exists");
  }
  const Sidecar side{next_sequence(), utc_now()};
  const fs::path payload = scenario_path(name);
  atomic_write_file(payload, bytes);
  atomic_write_file(sidecar_path(payload, ".json"), sidecar_bytes(side));
  index_.scenarios.push_back({name, "scenario", side.created_at, side.sequence});
  write_index_locked();
  return name;
}

std::string TraceStore::scenario_payload(const std::string& scenario_id) const {
  if (auto builtin = pomdp::find_builtin_scenario(scenario_id)) {
    return pomdp::to_json(*builtin).dump() + "\n";
  }
  std::shared_lock lock(mutex_);
  for (const auto& s : index_.scenarios) {
    if (s.id == scenario_id) return read_file(scenario_path(scenario_id));
  }
  not_found("scenario", scenario_id);
}

pomdp::ScenarioConfig TraceStore::scenario_config(const std::string& scenario_id) const {
  if (auto builtin = pomdp::find_builtin_scenario(scenario_id)) return *builtin;
  return parse_scenario_payload(scenario_payload(scenario_id), scenario_id);
}

std::vector<CatalogEntry> TraceStore::list_scenarios() const {
  std::vector<CatalogEntry> out;
  for (const auto& config : pomdp::builtin_scenarios()) {
    out.push_back({config.name, "builtin", "", 0});
  }
  std::shared_lock lock(mutex_);
  out.insert(out.end(), index_.scenarios.begin(), index_.scenarios.end());
  return out;
}

}  // namespace polexam::store
