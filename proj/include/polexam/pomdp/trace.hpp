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

#ifndef POLEXAM_POMDP_TRACE_HPP_
#define POLEXAM_POMDP_TRACE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polexam/error.hpp"
#include "polexam/json.hpp"
#include "polexam/pomdp/model.hpp"

namespace polexam::pomdp {

/**
 * One step of an episode.
 *
 * At step t the defender takes `defender_action` in the hidden state of
 * step t-1; the process moves to `state`, where the attacker emits
 * `attacker_action` and the metrics produce `observation`. `reward` is
 * R[state of step t-1][defender_action].
 */
struct StepRecord {
  std::size_t t = 0;
  StateId state = 0;
  AttackerActionId attacker_action = 0;
  ActionId defender_action = 0;
  Observation observation;
  double reward = 0.0;
  std::optional<Belief> belief_after;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class TerminationReason { kHorizon, kTerminalState };

std::string_view termination_reason_name(TerminationReason reason);

struct EpisodeTrace {
  std::string trace_id;
  std::string scenario;
  std::string config_hash;
  /// Absent for traces ingested from outside the simulator.
  std::optional<std::uint64_t> seed;
  std::vector<StepRecord> steps;
  std::optional<TerminationReason> terminated_reason;

  double total_reward() const;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

/// Ingest failure pointing at a 1-based line of the input stream.
class IngestError : public Error {
 public:
  IngestError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kIngest,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

Json header_to_json(const EpisodeTrace& trace);
Json step_to_json(const StepRecord& step);

/// Canonical line-delimited encoding: a header line, then one line per
/// step, each terminated by '\n'.
std::string write_trace(const EpisodeTrace& trace);

/// Parses the line-delimited encoding. Checks structure, field types and
/// that t runs 1, 2, 3, ...; throws IngestError.
EpisodeTrace read_trace(std::string_view text);

/// Same checks as read_trace for records already split into JSON values.
EpisodeTrace trace_from_records(const std::vector<Json>& records);

/// Throws Error(kIncompatible) if ids, bins or length do not fit `model`.
void check_trace_against(const PomdpModel& model, const EpisodeTrace& trace);

/// Identifiers used for traces, policies and scenarios: 1-128 characters
/// from [A-Za-z0-9._-], not starting with '.'.
bool is_valid_identifier(std::string_view id);

}  // namespace polexam::pomdp

#endif  // POLEXAM_POMDP_TRACE_HPP_
