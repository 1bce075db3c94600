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

#include "polexam/pomdp/trace.hpp"

#include <set>

namespace polexam::pomdp {

std::string_view termination_reason_name(TerminationReason reason) {
  return reason == TerminationReason::kHorizon ? "horizon" : "terminal_state";
}

double EpisodeTrace::total_reward() const {
  double total = 0.0;
  for (const auto& step : steps) total += step.reward;
  return total;
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

Json header_to_json(const EpisodeTrace& trace) {
  Json header;
  header["trace_id"] = trace.trace_id;
  header["scenario"] = trace.scenario;
  header["config_hash"] = trace.config_hash;
  header["seed"] = trace.seed ? Json(*trace.seed) : Json(nullptr);
  if (trace.terminated_reason) {
    header["terminated_reason"] =
        std::string(termination_reason_name(*trace.terminated_reason));
  }
  return header;
}

Json step_to_json(const StepRecord& step) {
  Json line;
  line["t"] = step.t;
  line["state"] = step.state;
  line["attacker_action"] = step.attacker_action;
  line["defender_action"] = step.defender_action;
  line["observation"] = step.observation.bins;
  line["reward"] = step.reward;
  line["belief_after"] =
      step.belief_after ? Json(step.belief_after->probs) : Json(nullptr);
  return line;
}

std::string write_trace(const EpisodeTrace& trace) {
  std::string out = header_to_json(trace).dump();
  out += '\n';
  for (const auto& step : trace.steps) {
    out += step_to_json(step).dump();
    out += '\n';
  }
  return out;
}

namespace {

class RecordReader {
 public:
  RecordReader(const Json& record, std::size_t line)
      : record_(record), line_(line) {
    if (!record_.is_object()) fail("record must be a JSON object");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw IngestError(line_, message);
  }

  void only(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : record_.items()) {
      if (!allowed.contains(key)) fail("unknown field '" + key + "'");
    }
  }

  const Json& required(const char* field) const {
    if (!record_.contains(field)) fail(std::string("missing field '") + field + "'");
    return record_.at(field);
  }

  std::uint64_t index(const char* field) const {
    const Json& v = required(field);
    if (!v.is_number_unsigned()) {
      fail(std::string("field '") + field + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  double number(const char* field) const {
    const Json& v = required(field);
    if (!v.is_number()) fail(std::string("field '") + field + "' must be a number");
    return v.get<double>();
  }

  std::string text(const char* field) const {
    const Json& v = required(field);
    if (!v.is_string()) fail(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
  }

  const Json& raw() const { return record_; }

 private:
  const Json& record_;
  std::size_t line_;
};

EpisodeTrace parse_header(const Json& record, std::size_t line) {
  RecordReader r(record, line);
  if (!record.contains("trace_id")) r.fail("missing header");
  r.only({"trace_id", "scenario", "config_hash", "seed", "terminated_reason"});
  EpisodeTrace trace;
  trace.trace_id = r.text("trace_id");
  if (!is_valid_identifier(trace.trace_id)) r.fail("invalid trace_id");
  trace.scenario = r.text("scenario");
  trace.config_hash = r.text("config_hash");
  const Json& seed = r.required("seed");
  if (seed.is_number_unsigned()) {
    trace.seed = seed.get<std::uint64_t>();
  } else if (!seed.is_null()) {
    r.fail("field 'seed' must be an unsigned integer or null");
  }
  if (record.contains("terminated_reason")) {
    const std::string reason = r.text("terminated_reason");
    if (reason == "horizon") {
      trace.terminated_reason = TerminationReason::kHorizon;
    } else if (reason == "terminal_state") {
      trace.terminated_reason = TerminationReason::kTerminalState;
    } else {
      r.fail("unknown terminated_reason '" + reason + "'");
    }
  }
  return trace;
}

StepRecord parse_step(const Json& record, std::size_t line) {
  RecordReader r(record, line);
  r.only({"t", "state", "attacker_action", "defender_action", "observation",
          "reward", "belief_after"});
  StepRecord step;
  step.t = r.index("t");
  step.state = r.index("state");
  step.attacker_action = r.index("attacker_action");
  step.defender_action = r.index("defender_action");
  const Json& obs = r.required("observation");
  if (!obs.is_array()) r.fail("field 'observation' must be an array");
  for (const auto& bin : obs) {
    if (!bin.is_number_unsigned()) {
      r.fail("observation bins must be non-negative integers");
    }
    step.observation.bins.push_back(bin.get<std::size_t>());
  }
  step.reward = r.number("reward");
  if (record.contains("belief_after") && !record.at("belief_after").is_null()) {
    const Json& belief = record.at("belief_after");
    if (!belief.is_array()) r.fail("field 'belief_after' must be an array or null");
    Belief b;
    for (const auto& p : belief) {
      if (!p.is_number()) r.fail("belief_after entries must be numbers");
      b.probs.push_back(p.get<double>());
    }
    step.belief_after = std::move(b);
  }
  return step;
}

}  // namespace

EpisodeTrace trace_from_records(const std::vector<Json>& records) {
  if (records.empty()) throw IngestError(1, "missing header");
  EpisodeTrace trace = parse_header(records.front(), 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const std::size_t line = i + 1;
    StepRecord step = parse_step(records[i], line);
    if (step.t != trace.steps.size() + 1) {
      throw IngestError(line, "expected t=" +
                                  std::to_string(trace.steps.size() + 1) +
                                  ", got t=" + std::to_string(step.t));
    }
    trace.steps.push_back(std::move(step));
  }
  if (trace.steps.empty()) {
    throw IngestError(records.size() + 1, "trace has no steps");
  }
  return trace;
}

EpisodeTrace read_trace(std::string_view text) {
  std::vector<Json> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      // Blank lines are only tolerated at the end of the stream.
      if (text.substr(std::min(pos, text.size())).find_first_not_of(" \t\r\n") !=
          std::string_view::npos) {
        throw IngestError(line_no, "blank line inside trace");
      }
      continue;
    }
    try {
      records.push_back(Json::parse(line.begin(), line.end()));
    } catch (const Json::parse_error&) {
      throw IngestError(line_no, "malformed JSON");
    }
    // Report structural problems at the earliest line.
    if (records.size() == 1) {
      (void)parse_header(records.front(), line_no);
    }
  }
  if (records.empty()) throw IngestError(1, "missing header");
  return trace_from_records(records);
}

void check_trace_against(const PomdpModel& model, const EpisodeTrace& trace) {
  auto fail = [&](const std::string& message) {
    throw Error(ErrorCode::kIncompatible,
                "trace '" + trace.trace_id + "' does not fit model '" +
                    model.name + "': " + message);
  };
  if (!same_scenario_family(model, trace.scenario)) {
    fail("recorded under scenario '" + trace.scenario + "'");
  }
  if (trace.steps.size() > model.horizon) fail("longer than the horizon");
  for (const auto& step : trace.steps) {
    const std::string at = "step " + std::to_string(step.t) + ": ";
    if (step.state >= model.num_states()) fail(at + "state out of range");
    if (step.attacker_action >= model.num_attacker_actions()) {
      fail(at + "attacker action out of range");
    }
    if (step.defender_action >= model.num_defender_actions()) {
      fail(at + "defender action out of range");
    }
    if (step.observation.bins.size() != model.num_metrics()) {
      fail(at + "wrong metric count");
    }
    for (std::size_t m = 0; m < model.num_metrics(); ++m) {
      if (step.observation.bins[m] >= model.metrics[m].bins) {
        fail(at + "bin out of range");
      }
    }
    if (step.belief_after && step.belief_after->probs.size() != model.num_states()) {
      fail(at + "belief_after has wrong length");
    }
  }
}

}  // namespace polexam::pomdp
