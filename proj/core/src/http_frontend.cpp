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
#include "vexsense/http_frontend.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <thread>

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"schema", "vexsense.error/v1"}, {"error", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::uint64_t query_u64(const httplib::Request& req, const char* name, std::uint64_t fallback) {
  if (!req.has_param(name)) return fallback;
  const auto text = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw InvalidInput(std::string("query parameter '") + name + "' must be a non-negative integer");
  }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFound& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 409, "protocol_error", e.what());
    } catch (const StateError& e) {
      send_error(res, 409, "state_error", e.what());
    } catch (const InvalidInput& e) {
      send_error(res, 400, "invalid_input", e.what());
    } catch (const InvalidParameter& e) {
      send_error(res, 400, "invalid_parameter", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

void require_keys(const json& body, std::initializer_list<std::string_view> allowed) {
  if (!body.is_object()) throw InvalidInput("request body must be a JSON object");
  for (const auto& [key, value] : body.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidInput("unknown request key '" + key + "'");
    }
  }
}

}  // namespace

struct HttpFrontend::Impl {
  SessionService& service;
  HttpOptions options;
  httplib::Server server;
  std::thread worker;
  std::atomic<bool> bound{false};
  int port = 0;

  Impl(SessionService& s, HttpOptions o) : service(s), options(std::move(o)) { routes(); }

  void routes() {
    auto& svc = service;
    const auto max_wait = options.max_poll_wait;

    server.Get("/v1/health", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200,
                           {{"schema", "vexsense.health/v1"},
                            {"status", "ok"},
                            {"models", svc.models().list()},
                            {"sessions", svc.session_ids().size()}});
               }));
    server.Get("/v1/models", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, {{"schema", "vexsense.model_list/v1"}, {"models", svc.models().list()}});
               }));
    server.Get("/v1/sessions", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, {{"schema", "vexsense.session_list/v1"}, {"sessions", svc.session_ids()}});
               }));
    server.Post("/v1/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  const auto session = svc.create_session(session_request_from_json(parse_body(req)));
                  send_json(res, 201, session->describe());
                }));
    server.Get("/v1/sessions/:id", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, svc.session(req.path_params.at("id"))->describe());
               }));
    server.Post("/v1/sessions/:id/advance", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  require_keys(body, {"schema", "step_mm"});
                  if (!body.contains("step_mm") || !body["step_mm"].is_number()) {
                    throw InvalidInput("step_mm (number) is required");
                  }
                  send_json(res, 200, svc.session(req.path_params.at("id"))->advance(body["step_mm"].get<double>()));
                }));
    server.Post("/v1/sessions/:id/sense", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  require_keys(parse_body(req), {"schema"});
                  send_json(res, 200, svc.session(req.path_params.at("id"))->trigger_sense());
                }));
    server.Post("/v1/sessions/:id/declare", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  require_keys(body, {"schema", "estimate"});
                  if (!body.contains("estimate") || !body["estimate"].is_string()) {
                    throw InvalidInput("estimate ('contact' or 'no_contact') is required");
                  }
                  const auto estimate = contact_label_from_string(body["estimate"].get<std::string>());
                  send_json(res, 200, svc.session(req.path_params.at("id"))->declare(estimate));
                }));
    server.Post("/v1/sessions/:id/close", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                  require_keys(parse_body(req), {"schema"});
                  send_json(res, 200, svc.session(req.path_params.at("id"))->close());
                }));
    server.Get("/v1/sessions/:id/events",
               guarded([&svc, max_wait](const httplib::Request& req, httplib::Response& res) {
                 const auto session = svc.session(req.path_params.at("id"));
                 const auto after = query_u64(req, "after", 0);
                 const auto wait = std::min(std::chrono::milliseconds(query_u64(req, "wait_ms", 0)), max_wait);
                 const auto limit = static_cast<std::size_t>(query_u64(req, "limit", 1000));
                 const auto events = wait.count() > 0 ? session->wait_events(after, wait, limit)
                                                      : session->events_after(after, limit);
                 const auto last = events.empty() ? after : events.back()["seq"].get<std::uint64_t>();
                 send_json(res, 200,
                           {{"schema", "vexsense.event_batch/v1"},
                            {"session_id", session->id()},
                            {"events", events},
                            {"last_seq", last}});
               }));
    server.Get("/v1/sessions/:id/events/stream",
               guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const auto session = svc.session(req.path_params.at("id"));
                 auto cursor = std::make_shared<std::uint64_t>(query_u64(req, "after", 0));
                 res.set_header("Cache-Control", "no-cache");
                 res.set_chunked_content_provider(
                     "text/event-stream", [session, cursor](std::size_t, httplib::DataSink& sink) {
                       const auto events = session->wait_events(*cursor, std::chrono::milliseconds(1000));
                       if (events.empty()) {
                         const std::string ping = ": keep-alive\n\n";
                         return sink.write(ping.data(), ping.size());
                       }
                       for (const auto& e : events) {
                         const std::string frame = "id: " + std::to_string(e["seq"].get<std::uint64_t>()) +
                                                   "\nevent: " + e["kind"].get<std::string>() + "\ndata: " + e.dump() +
                                                   "\n\n";
                         if (!sink.write(frame.data(), frame.size())) return false;
                         *cursor = e["seq"].get<std::uint64_t>();
                         if (e["kind"] == "session_closed") {
                           sink.done();
                           return true;
                         }
                       }
                       return true;
                     });
               }));
    if (options.static_dir && !server.set_mount_point("/", options.static_dir->string())) {
      throw InvalidInput("static directory " + options.static_dir->string() + " does not exist");
    }
  }
};

HttpFrontend::HttpFrontend(SessionService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind() {
  if (impl_->bound) return impl_->port;
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    if (impl_->port < 0) throw Error("cannot bind " + impl_->options.host);
  } else {
    if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
      throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->port = impl_->options.port;
  }
  impl_->bound = true;
  return impl_->port;
}

void HttpFrontend::serve() {
  if (!impl_->bound) throw StateError("bind() before serve()");
  impl_->server.listen_after_bind();
}

int HttpFrontend::start() {
  const int port = bind();
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpFrontend::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace vexsense
