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

#ifndef POLEXAM_DEBUGGER_MANAGER_HPP_
#define POLEXAM_DEBUGGER_MANAGER_HPP_

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "polexam/debugger/session.hpp"

namespace polexam::debugger {

struct ManagerConfig {
  std::size_t max_sessions = 64;
  std::chrono::milliseconds idle_ttl{30 * 60 * 1000};
  /// How often the autoplay thread wakes up.
  std::chrono::milliseconds tick_resolution{20};
};

/**
 * Owns live sessions. Each session has its own mutex and every command runs
 * under it, so commands on one session are serialized while different
 * sessions proceed in parallel. Sessions idle longer than the TTL are
 * evicted; when the cap is reached, creation first evicts expired sessions
 * and then fails with Error(kCapacity).
 */
class SessionManager {
 public:
  using Clock = std::chrono::steady_clock;

  explicit SessionManager(ManagerConfig config = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// `make` receives the new session id.
  std::string create(const std::function<std::unique_ptr<DebugSession>(const std::string&)>& make);

  /// Runs `fn` with the session locked. Error(kNotFound) if absent.
  template <typename Fn>
  auto with_session(const std::string& id, Fn&& fn) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    entry->last_used = Clock::now();
    return fn(*entry->session);
  }

  /// Forks a session into a new id.
  std::string fork(const std::string& id, std::uint64_t seed);

  void remove(const std::string& id);
  std::vector<std::string> list() const;
  std::size_t size() const;

  /// Drops sessions idle since before now - ttl. Returns how many.
  std::size_t evict_idle(Clock::time_point now = Clock::now());
  /// Advances running autoplay sessions that are due at `now`.
  void tick_due(Clock::time_point now = Clock::now());

  /// Background thread calling tick_due.
  void start_autoplay();
  void stop_autoplay();

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<DebugSession> session;
    Clock::time_point last_used;
    Clock::time_point next_tick;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::string insert(std::unique_ptr<DebugSession> session);
  std::string next_id();

  ManagerConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;

  std::thread ticker_;
  std::mutex ticker_mutex_;
  std::condition_variable ticker_cv_;
  bool stop_ = false;
};

}  // namespace polexam::debugger

#endif  // POLEXAM_DEBUGGER_MANAGER_HPP_
