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

#ifndef POLEXAM_DEBUGGER_BREAKPOINT_HPP_
#define POLEXAM_DEBUGGER_BREAKPOINT_HPP_

#include <cstdint>
#include <vector>

#include "polexam/json.hpp"
#include "polexam/pomdp/model.hpp"

namespace polexam::debugger {

struct Frame;

enum class Comparison { kAtLeast, kAtMost };

/**
 * Breakpoint condition on a frame. Wire form:
 *
 *   {"type":"time_equals","t":3}
 *   {"type":"defender_action_is","action":1}
 *   {"type":"belief_threshold","state":2,"op":">=","value":0.8}
 *   {"type":"metric_threshold","metric":0,"op":"<=","bin":5}
 *   {"type":"all","of":[...]}
 *
 * Frame 0 has no action or observation, so the action and metric
 * conditions never match it.
 */
struct BreakpointPredicate {
  enum class Kind { kTimeEquals, kDefenderActionIs, kBeliefThreshold, kMetricThreshold, kAll };

  Kind kind = Kind::kTimeEquals;
  /// t, action, state or metric, depending on kind.
  std::size_t index = 0;
  Comparison op = Comparison::kAtLeast;
  /// Belief probability or bin.
  double value = 0.0;
  std::vector<BreakpointPredicate> all;

  friend bool operator==(const BreakpointPredicate&, const BreakpointPredicate&) = default;
};

struct Breakpoint {
  std::uint64_t id = 0;
  BreakpointPredicate predicate;
};

/// Throws Error(kValidation) on malformed documents.
BreakpointPredicate predicate_from_json(const Json& doc);
Json to_json(const BreakpointPredicate& predicate);
Json to_json(const Breakpoint& breakpoint);

/// Throws Error(kValidation) if ids or ranges do not fit the model.
void check_predicate(const pomdp::PomdpModel& model, const BreakpointPredicate& predicate);

bool matches(const BreakpointPredicate& predicate, const Frame& frame);

}  // namespace polexam::debugger

#endif  // POLEXAM_DEBUGGER_BREAKPOINT_HPP_
