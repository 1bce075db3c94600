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

#ifndef POLEXAM_DEBUGGER_SESSION_HPP_
#define POLEXAM_DEBUGGER_SESSION_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polexam/debugger/breakpoint.hpp"
#include "polexam/json.hpp"
#include "polexam/policy/policy.hpp"
#include "polexam/pomdp/episode.hpp"
#include "polexam/pomdp/model.hpp"
#include "polexam/pomdp/trace.hpp"

namespace polexam::debugger {

enum class SessionMode { kManual, kAutoplay };
enum class SessionStatus { kHalted, kRunning, kFinished };
enum class HaltKind { kUser, kBreakpoint, kTerminal, kHorizon, kImpossibleObservation };

std::string_view session_mode_name(SessionMode mode);
std::string_view session_status_name(SessionStatus status);
std::string_view halt_kind_name(HaltKind kind);

struct HaltReason {
  HaltKind kind = HaltKind::kUser;
  std::optional<std::uint64_t> breakpoint_id;

  friend bool operator==(const HaltReason&, const HaltReason&) = default;
};

/**
 * Inspection view of one position in an episode.
 *
 * Frame t > 0 describes step t: `defender_action` was drawn from
 * `action_distribution`, the process moved to `hidden_state`, which emitted
 * `attacker_action` and `observation`, and `belief` is the filter after that
 * observation. `metric_distributions` are the per-metric observation laws
 * under `predicted_belief`, i.e. what the filter expected to see. Frame 0 is
 * the pre-episode position: belief rho_1 and no action yet.
 */
struct Frame {
  std::size_t t = 0;
  pomdp::Belief belief;
  pomdp::Belief predicted_belief;
  std::optional<policy::ActionDistribution> action_distribution;
  std::optional<pomdp::ActionId> defender_action;
  std::optional<pomdp::Observation> observation;
  std::vector<std::vector<double>> metric_distributions;
  std::optional<pomdp::StateId> hidden_state;
  std::optional<pomdp::AttackerActionId> attacker_action;
  double reward = 0.0;
  double cumulative_reward = 0.0;
  /// Set when the episode ends at this frame.
  std::optional<pomdp::TerminationReason> terminated;
  bool impossible_observation = false;
  std::optional<HaltReason> halt_reason;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// `reveal_attacker` false nulls hidden_state and attacker_action.
Json to_json(const Frame& frame, const pomdp::PomdpModel& model, bool reveal_attacker);

struct WhatIfReport {
  pomdp::ActionId defender_action = 0;
  /// Sum over s of b(s) R[s][a].
  double expected_reward = 0.0;
  /// R[hidden state][a] when the hidden state is known and revealed.
  std::optional<double> true_reward;
  pomdp::Belief predicted_belief;
  std::vector<std::vector<double>> expected_observation;
};

Json to_json(const WhatIfReport& report, const pomdp::PomdpModel& model);

struct SimulationSource {
  std::shared_ptr<const pomdp::PomdpModel> model;
  std::shared_ptr<const policy::Policy> policy;
  std::uint64_t seed = 0;
  /// Defaults to the model's horizon.
  std::optional<std::size_t> horizon;
  /// Environment that generates the episode when it differs from the model
  /// the defender filters with.
  std::shared_ptr<const pomdp::PomdpModel> env_model;
};

struct ReplaySource {
  pomdp::EpisodeTrace trace;
  std::shared_ptr<const pomdp::PomdpModel> model;
  /// Optional policy whose output is shown alongside the recorded actions.
  std::shared_ptr<const policy::Policy> overlay;
};

struct SessionOptions {
  SessionMode mode = SessionMode::kManual;
  std::chrono::milliseconds autoplay_interval{1000};
  bool reveal_attacker = true;
  /// Free-form labels echoed in describe(), e.g. catalog ids.
  Json labels = Json::object();
};

/**
 * Debugger state machine over one episode.
 *
 * Frames are appended as the episode is produced and never recomputed:
 * reverse only moves the cursor, and stepping forward from a rewound cursor
 * revisits the stored frames before producing new ones. Simulation sessions
 * keep the runner state after every frame, so fork() can branch from any
 * visited position.
 *
 * Breakpoints are evaluated on every frame the cursor lands on while moving
 * forward; the lowest matching id is reported. Precedence of halt reasons:
 * impossible_observation, then breakpoint, then terminal/horizon.
 *
 * Not thread-safe; SessionManager serializes access.
 */
class DebugSession {
 public:
  DebugSession(std::string id, SimulationSource source, SessionOptions options = {});
  DebugSession(std::string id, ReplaySource source, SessionOptions options = {});

  const std::string& id() const { return id_; }
  bool is_replay() const { return replay_.has_value(); }
  SessionMode mode() const { return options_.mode; }
  SessionStatus status() const { return status_; }
  std::size_t cursor() const { return cursor_; }
  const Frame& current_frame() const { return frames_[cursor_]; }
  const std::vector<Frame>& frames() const { return frames_; }
  const pomdp::PomdpModel& model() const { return *model_; }
  const SessionOptions& options() const { return options_; }

  /// Up to n forward moves. Error(kRange) for n < 1, Error(kFinished) on a
  /// finished session, Error(kPrecondition) while autoplay is running.
  const Frame& step(std::size_t n = 1);
  /// Manual mode: runs until a halt. Autoplay: starts ticking.
  const Frame& continue_run();
  /// Stops a running autoplay session. Error(kPrecondition) otherwise.
  const Frame& halt();
  /// Moves the cursor back n frames. Error(kRange) if n < 1 or n > cursor.
  const Frame& reverse(std::size_t n = 1);
  /// One autoplay move; no-op unless running.
  void tick();

  /// Pure probe of one defender action from the current belief.
  WhatIfReport what_if(pomdp::ActionId action) const;

  std::uint64_t add_breakpoint(const BreakpointPredicate& predicate);
  /// Error(kNotFound) for an unknown id.
  void remove_breakpoint(std::uint64_t breakpoint_id);
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

  /// New session sharing frames 0..cursor. Simulation sessions continue
  /// with a fresh generator seeded by `seed`; replay sessions ignore it.
  std::unique_ptr<DebugSession> fork(std::string new_id, std::uint64_t seed) const;

  Json describe() const;

 private:
  DebugSession() = default;

  bool at_end() const;
  void produce_next();
  /// Moves one frame forward; returns true if execution must stop there.
  bool move_forward();
  std::optional<HaltReason> evaluate_halt(const Frame& frame) const;
  Frame make_frame(const pomdp::Belief& predicted, std::size_t t) const;

  std::string id_;
  SessionOptions options_;
  std::shared_ptr<const pomdp::PomdpModel> model_;
  std::shared_ptr<const pomdp::PomdpModel> env_model_;
  std::shared_ptr<const policy::Policy> policy_;
  std::optional<std::uint64_t> seed_;
  std::optional<pomdp::EpisodeTrace> replay_;
  /// Runner state after each frame, simulation only.
  std::vector<pomdp::EpisodeRunner> snapshots_;
  std::vector<Frame> frames_;
  std::size_t cursor_ = 0;
  SessionStatus status_ = SessionStatus::kHalted;
  std::vector<Breakpoint> breakpoints_;
  std::uint64_t next_breakpoint_id_ = 1;
};

}  // namespace polexam::debugger

#endif  // POLEXAM_DEBUGGER_SESSION_HPP_
