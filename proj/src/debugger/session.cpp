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

#include "polexam/debugger/session.hpp"

#include "polexam/error.hpp"
#include "polexam/pomdp/filter.hpp"

namespace polexam::debugger {

using pomdp::Belief;
using pomdp::TerminationReason;

std::string_view session_mode_name(SessionMode mode) {
  return mode == SessionMode::kManual ? "manual" : "autoplay";
}

std::string_view session_status_name(SessionStatus status) {
  switch (status) {
    case SessionStatus::kHalted: return "halted";
    case SessionStatus::kRunning: return "running";
    case SessionStatus::kFinished: return "finished";
  }
  return "halted";
}

std::string_view halt_kind_name(HaltKind kind) {
  switch (kind) {
    case HaltKind::kUser: return "user";
    case HaltKind::kBreakpoint: return "breakpoint";
    case HaltKind::kTerminal: return "terminal";
    case HaltKind::kHorizon: return "horizon";
    case HaltKind::kImpossibleObservation: return "impossible_observation";
  }
  return "user";
}

namespace {

Json distributions_json(const pomdp::PomdpModel& model,
                        const std::vector<std::vector<double>>& rows) {
  Json out = Json::array();
  for (std::size_t m = 0; m < rows.size(); ++m) {
    Json row;
    row["metric"] = model.metrics[m].name;
    row["probs"] = rows[m];
    out.push_back(std::move(row));
  }
  return out;
}

template <typename T>
Json optional_json(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

}  // namespace

Json to_json(const Frame& f, const pomdp::PomdpModel& model, bool reveal) {
  Json doc;
  doc["t"] = f.t;
  doc["belief"] = f.belief.probs;
  doc["predicted_belief"] = f.predicted_belief.probs;
  if (f.action_distribution) {
    doc["action_distribution"]["probs"] = f.action_distribution->probs;
  } else {
    doc["action_distribution"] = nullptr;
  }
  doc["defender_action"] = optional_json(f.defender_action);
  doc["observation"] = f.observation ? Json(f.observation->bins) : Json(nullptr);
  doc["metric_distributions"] = distributions_json(model, f.metric_distributions);
  doc["revealed"] = reveal;
  doc["hidden_state"] = reveal ? optional_json(f.hidden_state) : Json(nullptr);
  doc["attacker_action"] = reveal ? optional_json(f.attacker_action) : Json(nullptr);
  doc["reward"] = f.reward;
  doc["cumulative_reward"] = f.cumulative_reward;
  doc["terminated"] =
      f.terminated ? Json(std::string(pomdp::termination_reason_name(*f.terminated)))
                   : Json(nullptr);
  doc["impossible_observation"] = f.impossible_observation;
  if (f.halt_reason) {
    Json halt;
    halt["kind"] = std::string(halt_kind_name(f.halt_reason->kind));
    halt["breakpoint_id"] = optional_json(f.halt_reason->breakpoint_id);
    doc["halt_reason"] = std::move(halt);
  } else {
    doc["halt_reason"] = nullptr;
  }
  return doc;
}

Json to_json(const WhatIfReport& r, const pomdp::PomdpModel& model) {
  Json doc;
  doc["defender_action"] = r.defender_action;
  doc["expected_reward"] = r.expected_reward;
  doc["true_reward"] = optional_json(r.true_reward);
  doc["predicted_belief"] = r.predicted_belief.probs;
  doc["expected_observation"] = distributions_json(model, r.expected_observation);
  return doc;
}

DebugSession::DebugSession(std::string id, SimulationSource source, SessionOptions options)
    : id_(std::move(id)), options_(std::move(options)) {
  if (!source.model || !source.policy) {
    throw Error(ErrorCode::kValidation, "simulation needs a model and a policy");
  }
  model_ = std::move(source.model);
  env_model_ = source.env_model ? std::move(source.env_model) : model_;
  policy_ = std::move(source.policy);
  seed_ = source.seed;
  const std::size_t horizon = source.horizon.value_or(model_->horizon);
  snapshots_.emplace_back(*env_model_, *model_, *policy_, source.seed, horizon);
  const auto& runner = snapshots_.front();
  Frame f = make_frame(runner.belief(), 0);
  f.belief = runner.belief();
  f.hidden_state = runner.hidden_state();
  frames_.push_back(std::move(f));
}

DebugSession::DebugSession(std::string id, ReplaySource source, SessionOptions options)
    : id_(std::move(id)), options_(std::move(options)) {
  if (!source.model) throw Error(ErrorCode::kValidation, "replay needs a model");
  model_ = std::move(source.model);
  env_model_ = model_;
  pomdp::check_trace_against(*model_, source.trace);
  if (source.trace.steps.empty()) throw Error(ErrorCode::kValidation, "trace has no steps");
  policy_ = std::move(source.overlay);
  if (policy_) policy::check_compatible(*model_, *policy_);
  seed_ = source.trace.seed;
  replay_ = std::move(source.trace);
  const Belief b0 = pomdp::initial_belief(*model_);
  Frame f = make_frame(b0, 0);
  f.belief = b0;
  frames_.push_back(std::move(f));
}

Frame DebugSession::make_frame(const Belief& predicted, std::size_t t) const {
  Frame f;
  f.t = t;
  f.predicted_belief = predicted;
  f.metric_distributions = pomdp::metric_marginals(*model_, predicted);
  return f;
}

bool DebugSession::at_end() const {
  return cursor_ + 1 == frames_.size() && frames_.back().terminated.has_value();
}

void DebugSession::produce_next() {
  const Frame& prev = frames_.back();
  const std::size_t t = prev.t + 1;
  if (replay_) {
    const auto& rec = replay_->steps[t - 1];
    const Belief predicted = pomdp::predict_belief(*model_, prev.belief, rec.defender_action);
    Frame f = make_frame(predicted, t);
    try {
      f.belief = pomdp::belief_update(*model_, prev.belief, rec.defender_action, rec.observation);
    } catch (const pomdp::ImpossibleObservation&) {
      f.belief = predicted;
      f.impossible_observation = true;
    }
    if (policy_) {
      policy::PolicyInput in;
      in.belief = prev.belief;
      in.last_observation = prev.observation
                                ? *prev.observation
                                : pomdp::Observation{std::vector<std::size_t>(model_->num_metrics(), 0)};
      in.t_normalized = static_cast<double>(t - 1) / static_cast<double>(model_->horizon);
      f.action_distribution = policy_->predict(in);
    } else {
      policy::ActionDistribution point;
      point.probs.assign(model_->num_defender_actions(), 0.0);
      point.probs[rec.defender_action] = 1.0;
      f.action_distribution = point;
    }
    f.defender_action = rec.defender_action;
    f.observation = rec.observation;
    f.hidden_state = rec.state;
    f.attacker_action = rec.attacker_action;
    f.reward = rec.reward;
    f.cumulative_reward = prev.cumulative_reward + rec.reward;
    if (t == replay_->steps.size()) {
      f.terminated = replay_->terminated_reason.value_or(
          model_->is_terminal(rec.state) ? TerminationReason::kTerminalState
                                         : TerminationReason::kHorizon);
    }
    frames_.push_back(std::move(f));
    return;
  }
  pomdp::EpisodeRunner runner = snapshots_.back();
  const pomdp::Transition tr = runner.advance();
  Frame f = make_frame(tr.predicted_belief, t);
  f.belief = tr.belief_after;
  f.impossible_observation = tr.impossible_observation;
  f.action_distribution = tr.action_distribution;
  f.defender_action = tr.defender_action;
  f.observation = tr.outcome.observation;
  f.hidden_state = tr.outcome.next_state;
  f.attacker_action = tr.outcome.attacker_action;
  f.reward = tr.outcome.reward;
  f.cumulative_reward = tr.cumulative_reward;
  f.terminated = tr.terminated;
  snapshots_.push_back(std::move(runner));
  frames_.push_back(std::move(f));
}

std::optional<HaltReason> DebugSession::evaluate_halt(const Frame& frame) const {
  if (frame.impossible_observation) return HaltReason{HaltKind::kImpossibleObservation, {}};
  for (const auto& bp : breakpoints_) {
    if (matches(bp.predicate, frame)) return HaltReason{HaltKind::kBreakpoint, bp.id};
  }
  if (frame.terminated) {
    return HaltReason{*frame.terminated == TerminationReason::kTerminalState ? HaltKind::kTerminal
                                                                            : HaltKind::kHorizon,
                      {}};
  }
  return std::nullopt;
}

bool DebugSession::move_forward() {
  if (cursor_ + 1 == frames_.size()) produce_next();
  ++cursor_;
  Frame& frame = frames_[cursor_];
  frame.halt_reason = evaluate_halt(frame);
  return frame.halt_reason.has_value();
}

const Frame& DebugSession::step(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kRange, "step count must be >= 1");
  if (status_ == SessionStatus::kRunning) {
    throw Error(ErrorCode::kPrecondition, "session is running; halt it first");
  }
  if (at_end()) throw Error(ErrorCode::kFinished, "episode finished");
  for (std::size_t i = 0; i < n; ++i) {
    if (move_forward() || at_end()) break;
  }
  status_ = at_end() ? SessionStatus::kFinished : SessionStatus::kHalted;
  return current_frame();
}

const Frame& DebugSession::continue_run() {
  if (status_ == SessionStatus::kRunning) {
    throw Error(ErrorCode::kPrecondition, "session is already running");
  }
  if (at_end()) throw Error(ErrorCode::kFinished, "episode finished");
  if (options_.mode == SessionMode::kAutoplay) {
    status_ = SessionStatus::kRunning;
    return current_frame();
  }
  while (!move_forward() && !at_end()) {
  }
  status_ = at_end() ? SessionStatus::kFinished : SessionStatus::kHalted;
  return current_frame();
}

void DebugSession::tick() {
  if (status_ != SessionStatus::kRunning) return;
  const bool stop = move_forward();
  if (at_end()) {
    status_ = SessionStatus::kFinished;
  } else if (stop) {
    status_ = SessionStatus::kHalted;
  }
}

const Frame& DebugSession::halt() {
  if (options_.mode != SessionMode::kAutoplay || status_ != SessionStatus::kRunning) {
    throw Error(ErrorCode::kPrecondition, "halt needs a running autoplay session");
  }
  status_ = SessionStatus::kHalted;
  frames_[cursor_].halt_reason = HaltReason{HaltKind::kUser, {}};
  return current_frame();
}

const Frame& DebugSession::reverse(std::size_t n) {
  if (n < 1 || n > cursor_) {
    throw Error(ErrorCode::kRange, "cannot reverse " + std::to_string(n) +
                                       " frames from cursor " + std::to_string(cursor_));
  }
  cursor_ -= n;
  status_ = SessionStatus::kHalted;
  return current_frame();
}

WhatIfReport DebugSession::what_if(pomdp::ActionId action) const {
  if (status_ != SessionStatus::kHalted) {
    throw Error(ErrorCode::kPrecondition,
                std::string("what-if needs a halted session, status is ") +
                    std::string(session_status_name(status_)));
  }
  if (action >= model_->num_defender_actions()) {
    throw Error(ErrorCode::kRange, "defender action " + std::to_string(action) + " out of range");
  }
  const Frame& frame = current_frame();
  WhatIfReport r;
  r.defender_action = action;
  for (std::size_t s = 0; s < model_->num_states(); ++s) {
    r.expected_reward += frame.belief.probs[s] * model_->reward[s][action];
  }
  if (options_.reveal_attacker && frame.hidden_state) {
    r.true_reward = model_->reward[*frame.hidden_state][action];
  }
  r.predicted_belief = pomdp::predict_belief(*model_, frame.belief, action);
  r.expected_observation = pomdp::metric_marginals(*model_, r.predicted_belief);
  return r;
}

std::uint64_t DebugSession::add_breakpoint(const BreakpointPredicate& predicate) {
  check_predicate(*model_, predicate);
  breakpoints_.push_back({next_breakpoint_id_, predicate});
  return next_breakpoint_id_++;
}

void DebugSession::remove_breakpoint(std::uint64_t breakpoint_id) {
  for (auto it = breakpoints_.begin(); it != breakpoints_.end(); ++it) {
    if (it->id == breakpoint_id) {
      breakpoints_.erase(it);
      return;
    }
  }
  throw Error(ErrorCode::kNotFound, "breakpoint " + std::to_string(breakpoint_id) + " not found");
}

std::unique_ptr<DebugSession> DebugSession::fork(std::string new_id, std::uint64_t seed) const {
  if (status_ == SessionStatus::kRunning) {
    throw Error(ErrorCode::kPrecondition, "halt the session before forking");
  }
  std::unique_ptr<DebugSession> copy(new DebugSession(*this));
  copy->id_ = std::move(new_id);
  const auto keep = static_cast<std::ptrdiff_t>(cursor_ + 1);
  copy->frames_.erase(copy->frames_.begin() + keep, copy->frames_.end());
  if (!replay_) {
    copy->snapshots_.erase(copy->snapshots_.begin() + keep, copy->snapshots_.end());
    copy->snapshots_.back().reseed(seed);
    copy->seed_ = seed;
  }
  copy->options_.labels["forked_from"] = id_;
  copy->options_.labels["forked_at"] = cursor_;
  if (!replay_) copy->options_.labels["fork_seed"] = seed;
  copy->status_ = copy->at_end() ? SessionStatus::kFinished : SessionStatus::kHalted;
  return copy;
}

Json DebugSession::describe() const {
  Json doc;
  doc["session_id"] = id_;
  Json source = options_.labels;
  source["type"] = replay_ ? "replay" : "simulation";
  source["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
  if (replay_) source["trace_id"] = replay_->trace_id;
  source["scenario"] = model_->name;
  doc["source"] = std::move(source);
  doc["mode"] = std::string(session_mode_name(options_.mode));
  doc["autoplay_interval_ms"] = options_.autoplay_interval.count();
  doc["reveal_attacker"] = options_.reveal_attacker;
  doc["status"] = std::string(session_status_name(status_));
  doc["cursor"] = cursor_;
  doc["frame_count"] = frames_.size();
  doc["horizon"] = replay_ ? replay_->steps.size() : snapshots_.front().horizon();
  doc["breakpoints"] = Json::array();
  for (const auto& bp : breakpoints_) doc["breakpoints"].push_back(to_json(bp));
  return doc;
}

}  // namespace polexam::debugger
