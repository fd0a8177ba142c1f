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

// Append-only session logs: one newline-delimited JSON file per session plus
// one trace document per window under traces/.
//
//   {"type":"session_header","format":"vexsense.session_log","version":1,...}
//   {"type":"reference","trace_id":...,"trace_file":"traces/....json"}
//   {"type":"sense_event","sequence":0,...}

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vexsense/detector.hpp"

namespace vexsense {

inline constexpr const char* kSessionLogFormat = "vexsense.session_log";
inline constexpr int kSessionLogVersion = 1;

class SessionRecorder {
 public:
  /// Creates \p directory (and traces/) and writes the header line.
  SessionRecorder(std::filesystem::path directory, std::string model_digest, DetectorConfig config);

  void record_reference(const PressureTrace& trace, const std::string& trace_id);
  void record_event(const SenseEvent& event, const PressureTrace& trace);

  const std::filesystem::path& log_path() const noexcept { return log_path_; }

 private:
  std::string write_trace(const PressureTrace& trace, const std::string& trace_id);
  void append(const nlohmann::json& line);

  std::filesystem::path directory_;
  std::filesystem::path log_path_;
  std::mutex mutex_;
  std::ofstream out_;
};

struct LoggedWindow {
  std::string trace_id;
  std::filesystem::path trace_file;
};

struct LoggedEvent {
  SenseEvent event;
  std::filesystem::path trace_file;
};

struct SessionLog {
  std::string model_digest;
  DetectorConfig config;
  std::optional<LoggedWindow> reference;
  std::vector<LoggedEvent> events;
  std::filesystem::path base_directory;
};

/// Reads a log; an empty file yields an empty log.
SessionLog read_session_log(const std::filesystem::path& log_path);

struct ReplayMismatch {
  std::uint64_t sequence = 0;
  std::string trace_id;
  std::string detail;
};

struct ReplayResult {
  std::vector<SenseEvent> events;
  std::vector<ReplayMismatch> mismatches;

  bool identical() const noexcept { return mismatches.empty(); }
};

/// Re-runs every stored window through \p model. Throws ReplayError when the
/// model digest differs from the one recorded in the log.
ReplayResult replay(const SessionLog& log, const SvmModel& model);
ReplayResult replay(const std::filesystem::path& log_path, const SvmModel& model);

nlohmann::json to_json(const SenseEvent& event);
SenseEvent sense_event_from_json(const nlohmann::json& doc);

}  // namespace vexsense
