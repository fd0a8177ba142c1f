// Copyright 2026 The vexsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// HTTP/JSON transport for SessionService. Commands are POST requests; events
// are available by long-poll (GET .../events) or as a server-sent event
// stream (GET .../events/stream). docs/protocol.md lists every message.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "vexsense/session_service.hpp"

namespace vexsense {

struct HttpOptions {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  int port = 8080;
  /// Served at / when set (the operator console bundle).
  std::optional<std::filesystem::path> static_dir;
  std::chrono::milliseconds max_poll_wait{30'000};
};

class HttpFrontend {
 public:
  HttpFrontend(SessionService& service, HttpOptions options);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Binds the listening socket and returns the port. Throws Error on failure.
  int bind();
  /// Serves until stop(); bind() first.
  void serve();
  /// bind() and serve() on a background thread; returns the port.
  int start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vexsense
