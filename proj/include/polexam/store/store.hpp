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

#ifndef POLEXAM_STORE_STORE_HPP_
#define POLEXAM_STORE_STORE_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "polexam/json.hpp"
#include "polexam/policy/policy.hpp"
#include "polexam/pomdp/scenario.hpp"
#include "polexam/pomdp/trace.hpp"

namespace polexam::store {

/// Writes `bytes` to a sibling temp file and renames it over `path`.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

/// Whole file as bytes; Error(kIo) if it cannot be read.
std::string read_file(const std::filesystem::path& path);

struct TraceMetadata {
  std::string trace_id;
  std::string scenario;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  std::size_t step_count = 0;
  std::optional<pomdp::TerminationReason> terminated_reason;
  std::string created_at;
  std::uint64_t sequence = 0;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

struct CatalogEntry {
  std::string id;
  /// Policy kind or "scenario".
  std::string kind;
  std::string created_at;
  std::uint64_t sequence = 0;

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

struct StoreIndex {
  std::vector<TraceMetadata> traces;
  std::vector<CatalogEntry> policies;
  std::vector<CatalogEntry> scenarios;

  friend bool operator==(const StoreIndex&, const StoreIndex&) = default;
};

Json to_json(const TraceMetadata& meta);
Json to_json(const CatalogEntry& entry);
Json to_json(const StoreIndex& index);

struct TraceFilter {
  std::optional<std::string> scenario;
};

/**
 * File-backed store of traces, policies and scenarios.
 *
 * Layout under the root:
 *
 *   traces/<id>.jsonl              canonical trace payload
 *   traces/<id>.meta.json          {sequence, created_at}
 *   catalog/policies/<id>.json     policy file bytes as registered
 *   catalog/scenarios/<id>.json    scenario config bytes as registered
 *   catalog/<kind>/<id>.meta.json  {sequence, created_at}
 *   index.json                     derived; rebuilt by scanning on open
 *
 * Payloads are written before their sidecars, each by temp file and
 * rename, so a crash leaves either a complete entry or an orphan payload
 * that the next scan ignores. Readers share a lock; writers are exclusive.
 */
class TraceStore {
 public:
  /// Creates the directory layout if missing and rebuilds the index.
  explicit TraceStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Parses, canonicalizes and persists a trace. The id comes from the
  /// header. Throws IngestError, or Error(kConflict) for a duplicate id and
  /// Error(kValidation) for an unusable id.
  std::string ingest(std::string_view text);
  std::string ingest(const pomdp::EpisodeTrace& trace);

  pomdp::EpisodeTrace get_trace(const std::string& trace_id) const;
  /// Stored canonical bytes.
  std::string export_trace(const std::string& trace_id) const;
  TraceMetadata trace_metadata(const std::string& trace_id) const;
  /// Ordered by creation.
  std::vector<TraceMetadata> list_traces(const TraceFilter& filter = {}) const;

  /// Stores the bytes verbatim after checking they load. Error(kValidation)
  /// for unloadable bytes or a bad name, Error(kConflict) for a duplicate.
  std::string register_policy(const std::string& name, std::string_view bytes);
  std::string policy_payload(const std::string& policy_id) const;
  std::shared_ptr<const policy::Policy> load_policy(const std::string& policy_id) const;
  std::vector<CatalogEntry> list_policies() const;

  /// Stores the bytes verbatim after checking they parse as a scenario
  /// config. Built-in scenario names are reserved.
  std::string register_scenario(const std::string& name, std::string_view bytes);
  std::string scenario_payload(const std::string& scenario_id) const;
  /// Built-in or catalogued config; the returned name is the id.
  pomdp::ScenarioConfig scenario_config(const std::string& scenario_id) const;
  std::vector<CatalogEntry> list_scenarios() const;

  StoreIndex index() const;
  /// Rescans payloads, replaces the in-memory index and rewrites index.json.
  StoreIndex rebuild_index();
  /// Rewrites index.json from the in-memory index.
  void flush_index() const;

 private:
  StoreIndex scan() const;
  std::uint64_t next_sequence() const;
  void write_index_locked() const;
  std::filesystem::path trace_path(const std::string& id) const;
  std::filesystem::path policy_path(const std::string& id) const;
  std::filesystem::path scenario_path(const std::string& id) const;

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
  StoreIndex index_;
};

/// Parses a scenario config document (JSON text) with `name` as its name.
pomdp::ScenarioConfig parse_scenario_payload(std::string_view bytes,
                                             const std::string& name);

}  // namespace polexam::store

#endif  // POLEXAM_STORE_STORE_HPP_
