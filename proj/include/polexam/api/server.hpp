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

#ifndef POLEXAM_API_SERVER_HPP_
#define POLEXAM_API_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "polexam/debugger/manager.hpp"
#include "polexam/error.hpp"
#include "polexam/json.hpp"
#include "polexam/store/store.hpp"

namespace polexam::api {

inline constexpr std::string_view kApiVersion = "0.1.0";

/// HTTP status for an error code; every code maps to exactly one status.
int http_status(ErrorCode code);

/// {"code", "message", "detail"}; detail carries the line for ingest errors.
Json error_body(const Error& error);

struct ServerConfig {
  std::filesystem::path store_root;
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  debugger::ManagerConfig sessions;
  /// Serves a built UI from here when set.
  std::optional<std::filesystem::path> static_dir;
  /// One JSON line per request; null disables logging.
  std::ostream* request_log = nullptr;
};

/**
 * REST service under /api/v1 over a TraceStore and a SessionManager.
 * All bodies are JSON except trace ingest and export, which also speak the
 * line-delimited trace format (application/x-ndjson).
 */
class ApiServer {
 public:
  explicit ApiServer(ServerConfig config);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket and returns the port. Error(kIo) on failure.
  int bind();
  /// Serves until stop(); requires bind().
  void serve();
  /// bind() then serve() on a background thread.
  int start();
  /// Stops serving, stops autoplay and flushes the store index.
  void stop();

  int port() const;
  store::TraceStore& store();
  debugger::SessionManager& sessions();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace polexam::api

#endif  // POLEXAM_API_SERVER_HPP_
