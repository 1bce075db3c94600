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

#include "polexam/debugger/manager.hpp"

#include "polexam/error.hpp"
#include "polexam/json.hpp"

namespace polexam::debugger {

SessionManager::SessionManager(ManagerConfig config) : config_(config) {}

SessionManager::~SessionManager() { stop_autoplay(); }

std::string SessionManager::next_id() {
  ++counter_;
  return "s" + std::to_string(counter_) + "-" +
         hex64(fnv1a64(std::to_string(counter_) + "|" +
                       std::to_string(Clock::now().time_since_epoch().count())))
             .substr(0, 8);
}

std::string SessionManager::insert(std::unique_ptr<DebugSession> session) {
  auto entry = std::make_shared<Entry>();
  entry->last_used = Clock::now();
  entry->next_tick = entry->last_used;
  const std::string id = session->id();
  entry->session = std::move(session);
  std::lock_guard lock(mutex_);
  sessions_[id] = std::move(entry);
  return id;
}

std::string SessionManager::create(
    const std::function<std::unique_ptr<DebugSession>(const std::string&)>& make) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    if (sessions_.size() >= config_.max_sessions) {
      const auto cutoff = Clock::now() - config_.idle_ttl;
      for (auto it = sessions_.begin(); it != sessions_.end();) {
        it = it->second->last_used < cutoff ? sessions_.erase(it) : std::next(it);
      }
    }
    if (sessions_.size() >= config_.max_sessions) {
      throw Error(ErrorCode::kCapacity, "session limit of " + std::to_string(config_.max_sessions) +
                                            " reached");
    }
    id = next_id();
  }
  return insert(make(id));
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "session '" + id + "' not found");
  return it->second;
}

std::string SessionManager::fork(const std::string& id, std::uint64_t seed) {
  auto source = find(id);
  return create([&](const std::string& new_id) {
    std::lock_guard lock(source->mutex);
    source->last_used = Clock::now();
    return source->session->fork(new_id, seed);
  });
}

void SessionManager::remove(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (sessions_.erase(id) == 0) throw Error(ErrorCode::kNotFound, "session '" + id + "' not found");
}

std::vector<std::string> SessionManager::list() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, entry] : sessions_) ids.push_back(id);
  return ids;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionManager::evict_idle(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  std::size_t count = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (it->second->last_used + config_.idle_ttl < now) {
      it = sessions_.erase(it);
      ++count;
    } else {
      ++it;
    }
  }
  return count;
}

void SessionManager::tick_due(Clock::time_point now) {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, entry] : sessions_) entries.push_back(entry);
  }
  for (const auto& entry : entries) {
    std::lock_guard lock(entry->mutex);
    DebugSession& s = *entry->session;
    if (s.mode() != SessionMode::kAutoplay || s.status() != SessionStatus::kRunning) {
      entry->next_tick = now + s.options().autoplay_interval;
      continue;
    }
    if (now < entry->next_tick) continue;
    s.tick();
    // A running session counts as in use.
    entry->last_used = now;
    entry->next_tick = now + s.options().autoplay_interval;
  }
}

void SessionManager::start_autoplay() {
  std::lock_guard lock(ticker_mutex_);
  if (ticker_.joinable()) return;
  stop_ = false;
  ticker_ = std::thread([this] {
    std::unique_lock lock(ticker_mutex_);
    while (!stop_) {
      ticker_cv_.wait_for(lock, config_.tick_resolution);
      if (stop_) break;
      lock.unlock();
      tick_due();
      evict_idle();
      lock.lock();
    }
  });
}

void SessionManager::stop_autoplay() {
  {
    std::lock_guard lock(ticker_mutex_);
    stop_ = true;
  }
  ticker_cv_.notify_all();
  if (ticker_.joinable()) ticker_.join();
}

}  // namespace polexam::debugger
