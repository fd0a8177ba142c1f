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

// Operator sessions re-enacting the user-study protocol on top of the
// simulator and detector. Transport-neutral: every command returns the JSON
// document sent to the client, and events are buffered per session for
// subscribers. Ground truth stays server-side until a session is closed.
//
// Data directory layout (nothing is written when data_dir is empty):
//   models/<id>.json                    trained models
//   sessions/<id>/events.ndjson         append-only service event log
//   sessions/<id>/ground_truth.json     hidden trial script
//   sessions/<id>/trial-NN/             detector session log (sensing trials)
//   sessions/<id>/study_records.csv     written on close
//   sessions/<id>/report.json           written on close

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexsense/config.hpp"
#include "vexsense/detector.hpp"
#include "vexsense/study_stats.hpp"

namespace vexsense {

inline constexpr const char* kEventSchema = "vexsense.event/v1";

enum class SessionCondition { control, sensing, study };

std::string_view to_string(SessionCondition condition) noexcept;
SessionCondition session_condition_from_string(std::string_view text);

struct SessionRequest {
  /// study: half control and half sensing trials in random order.
  SessionCondition condition = SessionCondition::study;
  /// Empty: the service default model.
  std::string model_id;
  std::uint64_t seed = 0;
  std::size_t trials = 12;
  std::string user_id = "operator";
  std::string scenario_set = "default";

  void validate() const;
};

/// Strict parse of a create request body.
SessionRequest session_request_from_json(const nlohmann::json& body);
nlohmann::json to_json(const SessionRequest& request);

/// A scripted declaration pause: intended distance to the clot as shown on
/// the roadmap, and where that leaves the tip in truth.
struct ScriptPause {
  double displayed_distance_mm = 0.0;
  double true_distance_mm = 0.0;
  bool contact = false;
};

struct TrialScript {
  std::size_t index = 0;
  /// control or sensing.
  StudyCondition condition = StudyCondition::control;
  std::string location;
  double tortuosity = 1.0;
  double heart_rate_bpm = 0.0;
  double clot_position_mm = 0.0;
  /// Displayed clot position minus true clot position.
  double roadmap_error_mm = 0.0;
  std::uint64_t seed = 0;
  std::vector<ScriptPause> pauses;
};

nlohmann::json to_json(const TrialScript& trial);

/// Deterministic in (request, settings, locations).
std::vector<TrialScript> generate_script(const SessionRequest& request, const ServiceSettings& settings,
                                         const std::vector<LocationGeometry>& locations);

/// Directory of trained models keyed by file stem. Safe for concurrent use.
class ModelRegistry {
 public:
  /// Empty directory: memory only.
  explicit ModelRegistry(std::filesystem::path models_dir = {});

  /// Throws NotFound for an unknown id.
  std::shared_ptr<const SvmModel> get(const std::string& id) const;
  bool contains(const std::string& id) const;
  void add(const std::string& id, SvmModel model, bool persist = false);
  std::vector<std::string> list() const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const SvmModel>> cache_;
};

enum class SessionPhase { active, completed, closed };

std::string_view to_string(SessionPhase phase) noexcept;

struct SessionContext {
  SimulatorConfig simulator;
  DetectorConfig detector;
  ServiceSettings settings;
  Clock clock = wall_clock_ms;
};

/// One operator session. Commands are serialized per session; event readers
/// may run concurrently with them.
class OperatorSession {
 public:
  OperatorSession(std::string id, SessionRequest request, std::string model_id, std::shared_ptr<const SvmModel> model,
                  SessionContext context, std::optional<std::filesystem::path> directory);

  const std::string& id() const noexcept { return id_; }
  const SessionRequest& request() const noexcept { return request_; }

  /// Client view; adds the ground truth only once closed.
  nlohmann::json describe() const;

  /// Moves the tip by \p step_mm (negative withdraws). Throws ProtocolError
  /// once contact is confirmed in a sensing trial or the session is not active.
  nlohmann::json advance(double step_mm);
  /// Sensing trials only; the reference is captured when the trial starts.
  nlohmann::json trigger_sense();
  nlohmann::json declare(ContactLabel estimate);
  /// Idempotent; returns the final report with ground truth.
  nlohmann::json close();

  /// Events with seq > after, at most \p max.
  std::vector<nlohmann::json> events_after(std::uint64_t after, std::size_t max = SIZE_MAX) const;
  /// Blocks until an event with seq > after exists, the session closes, or the timeout passes.
  std::vector<nlohmann::json> wait_events(std::uint64_t after, std::chrono::milliseconds timeout,
                                          std::size_t max = SIZE_MAX) const;
  std::uint64_t last_event_seq() const;

  SessionPhase phase() const;
  /// Server-side views used by audits and tests.
  std::vector<StudyRecord> records() const;
  const std::vector<TrialScript>& script() const noexcept { return script_; }
  std::size_t current_trial() const;
  double position_mm() const;

 private:
  struct TrialState {
    double position_mm = 0.0;
    std::size_t declarations = 0;
    std::size_t windows = 0;
    std::optional<ContactLabel> sense_since_advance;
    std::unique_ptr<DetectionSession> detector;
  };

  void require_active(const char* what) const;
  void start_trial(std::size_t index);
  void emit(const std::string& kind, nlohmann::json body);
  double true_distance_mm() const;
  double displayed_distance_mm() const;
  nlohmann::json position_view() const;
  PressureTrace simulate_window(double duration_s, bool contact);
  nlohmann::json report() const;

  std::string id_;
  SessionRequest request_;
  std::string model_id_;
  std::shared_ptr<const SvmModel> model_;
  SessionContext ctx_;
  std::optional<std::filesystem::path> dir_;
  std::vector<TrialScript> script_;

  mutable std::mutex command_mutex_;
  SessionPhase phase_ = SessionPhase::active;
  std::size_t trial_ = 0;
  TrialState state_;
  std::vector<StudyRecord> records_;

  mutable std::mutex event_mutex_;
  mutable std::condition_variable event_cv_;
  std::vector<nlohmann::json> events_;
  std::ofstream event_log_;
};

class SessionService {
 public:
  explicit SessionService(Config config, Clock clock = wall_clock_ms);

  ModelRegistry& models() noexcept { return models_; }
  const Config& config() const noexcept { return config_; }

  /// Throws NotFound for an unknown model and InvalidInput for a bad request.
  std::shared_ptr<OperatorSession> create_session(const SessionRequest& request);
  /// Throws NotFound.
  std::shared_ptr<OperatorSession> session(const std::string& id) const;
  std::vector<std::string> session_ids() const;

 private:
  Config config_;
  Clock clock_;
  ModelRegistry models_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<OperatorSession>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace vexsense
