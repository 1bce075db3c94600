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

#include "polexam/debugger/breakpoint.hpp"

#include <cmath>
#include <set>

#include "polexam/debugger/session.hpp"
#include "polexam/error.hpp"

namespace polexam::debugger {

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kValidation, "breakpoint: " + message);
}

void only_fields(const Json& doc, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) invalid("unknown field '" + key + "'");
  }
}

std::size_t index_field(const Json& doc, const char* name) {
  if (!doc.contains(name) || !doc.at(name).is_number_unsigned()) {
    invalid(std::string("'") + name + "' must be a non-negative integer");
  }
  return doc.at(name).get<std::size_t>();
}

Comparison op_field(const Json& doc) {
  if (!doc.contains("op") || !doc.at("op").is_string()) invalid("'op' must be \">=\" or \"<=\"");
  const auto op = doc.at("op").get<std::string>();
  if (op == ">=") return Comparison::kAtLeast;
  if (op == "<=") return Comparison::kAtMost;
  invalid("'op' must be \">=\" or \"<=\"");
}

bool compare(double lhs, Comparison op, double rhs) {
  return op == Comparison::kAtLeast ? lhs >= rhs : lhs <= rhs;
}

}  // namespace

BreakpointPredicate predicate_from_json(const Json& doc) {
  using Kind = BreakpointPredicate::Kind;
  if (!doc.is_object()) invalid("predicate must be an object");
  if (!doc.contains("type") || !doc.at("type").is_string()) invalid("missing 'type'");
  const auto type = doc.at("type").get<std::string>();
  BreakpointPredicate p;
  if (type == "time_equals") {
    only_fields(doc, {"type", "t"});
    p.kind = Kind::kTimeEquals;
    p.index = index_field(doc, "t");
  } else if (type == "defender_action_is") {
    only_fields(doc, {"type", "action"});
    p.kind = Kind::kDefenderActionIs;
    p.index = index_field(doc, "action");
  } else if (type == "belief_threshold") {
    only_fields(doc, {"type", "state", "op", "value"});
    p.kind = Kind::kBeliefThreshold;
    p.index = index_field(doc, "state");
    p.op = op_field(doc);
    if (!doc.contains("value") || !doc.at("value").is_number()) invalid("'value' must be a number");
    p.value = doc.at("value").get<double>();
    if (!(p.value >= 0.0 && p.value <= 1.0)) invalid("'value' must lie in [0, 1]");
  } else if (type == "metric_threshold") {
    only_fields(doc, {"type", "metric", "op", "bin"});
    p.kind = Kind::kMetricThreshold;
    p.index = index_field(doc, "metric");
    p.op = op_field(doc);
    p.value = static_cast<double>(index_field(doc, "bin"));
  } else if (type == "all") {
    only_fields(doc, {"type", "of"});
    p.kind = Kind::kAll;
    if (!doc.contains("of") || !doc.at("of").is_array() || doc.at("of").empty()) {
      invalid("'of' must be a non-empty array");
    }
    for (const auto& child : doc.at("of")) p.all.push_back(predicate_from_json(child));
  } else {
    invalid("unknown type '" + type + "'");
  }
  return p;
}

Json to_json(const BreakpointPredicate& p) {
  using Kind = BreakpointPredicate::Kind;
  Json doc;
  const char* op = p.op == Comparison::kAtLeast ? ">=" : "<=";
  switch (p.kind) {
    case Kind::kTimeEquals:
      doc["type"] = "time_equals";
      doc["t"] = p.index;
      break;
    case Kind::kDefenderActionIs:
      doc["type"] = "defender_action_is";
      doc["action"] = p.index;
      break;
    case Kind::kBeliefThreshold:
      doc["type"] = "belief_threshold";
      doc["state"] = p.index;
      doc["op"] = op;
      doc["value"] = p.value;
      break;
    case Kind::kMetricThreshold:
      doc["type"] = "metric_threshold";
      doc["metric"] = p.index;
      doc["op"] = op;
      doc["bin"] = static_cast<std::size_t>(p.value);
      break;
    case Kind::kAll:
      doc["type"] = "all";
      doc["of"] = Json::array();
      for (const auto& child : p.all) doc["of"].push_back(to_json(child));
      break;
  }
  return doc;
}

Json to_json(const Breakpoint& breakpoint) {
  Json doc;
  doc["id"] = breakpoint.id;
  doc["predicate"] = to_json(breakpoint.predicate);
  return doc;
}

void check_predicate(const pomdp::PomdpModel& model, const BreakpointPredicate& p) {
  using Kind = BreakpointPredicate::Kind;
  switch (p.kind) {
    case Kind::kTimeEquals:
      break;
    case Kind::kDefenderActionIs:
      if (p.index >= model.num_defender_actions()) invalid("action out of range");
      break;
    case Kind::kBeliefThreshold:
      if (p.index >= model.num_states()) invalid("state out of range");
      break;
    case Kind::kMetricThreshold:
      if (p.index >= model.num_metrics()) invalid("metric out of range");
      if (p.value >= static_cast<double>(model.metrics[p.index].bins)) invalid("bin out of range");
      break;
    case Kind::kAll:
      if (p.all.empty()) invalid("'all' needs at least one condition");
      for (const auto& child : p.all) check_predicate(model, child);
      break;
  }
}

bool matches(const BreakpointPredicate& p, const Frame& frame) {
  using Kind = BreakpointPredicate::Kind;
  switch (p.kind) {
    case Kind::kTimeEquals:
      return frame.t == p.index;
    case Kind::kDefenderActionIs:
      return frame.defender_action && *frame.defender_action == p.index;
    case Kind::kBeliefThreshold:
      return p.index < frame.belief.probs.size() &&
             compare(frame.belief.probs[p.index], p.op, p.value);
    case Kind::kMetricThreshold:
      return frame.observation && p.index < frame.observation->bins.size() &&
             compare(static_cast<double>(frame.observation->bins[p.index]), p.op, p.value);
    case Kind::kAll:
      for (const auto& child : p.all) {
        if (!matches(child, frame)) return false;
      }
      return !p.all.empty();
  }
  return false;
}

}  // namespace polexam::debugger
