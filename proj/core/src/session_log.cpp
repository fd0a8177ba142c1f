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
#include "vexsense/session_log.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "vexsense/error.hpp"
#include "vexsense/trace_io.hpp"

namespace vexsense {
namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

std::string sanitize(const std::string& id) {
  std::string out;
  for (char ch : id) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '-' ||
                    ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  return out.empty() ? "trace" : out;
}

}  // namespace

nlohmann::json to_json(const SenseEvent& event) {
  return {{"type", "sense_event"},
          {"sequence", event.sequence},
          {"timestamp_ms", event.timestamp_ms},
          {"trace_id", event.trace_id},
          {"features",
           {{"relative_average_pressure_pa", event.features.relative_average_pressure_pa},
            {"pressure_change_from_prior_pa", event.features.pressure_change_from_prior_pa}}},
          {"verdict", std::string(to_string(event.verdict))},
          {"decision_score", event.decision_score}};
}

SenseEvent sense_event_from_json(const nlohmann::json& doc) {
  SenseEvent e;
  e.sequence = doc.at("sequence").get<std::uint64_t>();
  e.timestamp_ms = doc.at("timestamp_ms").get<std::int64_t>();
  e.trace_id = doc.at("trace_id").get<std::string>();
  e.features.relative_average_pressure_pa = doc.at("features").at("relative_average_pressure_pa").get<double>();
  e.features.pressure_change_from_prior_pa = doc.at("features").at("pressure_change_from_prior_pa").get<double>();
  e.verdict = contact_label_from_string(doc.at("verdict").get<std::string>());
  e.decision_score = doc.at("decision_score").get<double>();
  return e;
}

SessionRecorder::SessionRecorder(std::filesystem::path directory, std::string model_digest, DetectorConfig config)
    : directory_(std::move(directory)), log_path_(directory_ / "session.ndjson") {
  std::filesystem::create_directories(directory_ / "traces");
  out_.open(log_path_, std::ios::out | std::ios::app);
  if (!out_) throw InvalidInput("cannot open session log " + log_path_.string());
  append({{"type", "session_header"},
          {"format", kSessionLogFormat},
          {"version", kSessionLogVersion},
          {"model_digest", model_digest},
          {"reference_duration_s", config.reference_duration_s},
          {"sense_duration_s", config.sense_duration_s}});
}

std::string SessionRecorder::write_trace(const PressureTrace& trace, const std::string& trace_id) {
  const std::string relative = "traces/" + sanitize(trace_id) + ".json";
  save_trace_json(directory_ / relative, trace);
  return relative;
}

void SessionRecorder::append(const nlohmann::json& line) {
  out_ << line.dump() << '\n';
  out_.flush();
  if (!out_) throw InvalidInput("write to session log " + log_path_.string() + " failed");
}

void SessionRecorder::record_reference(const PressureTrace& trace, const std::string& trace_id) {
  std::lock_guard lock(mutex_);
  const auto file = write_trace(trace, trace_id);
  append({{"type", "reference"}, {"trace_id", trace_id}, {"trace_file", file}});
}

void SessionRecorder::record_event(const SenseEvent& event, const PressureTrace& trace) {
  std::lock_guard lock(mutex_);
  auto line = to_json(event);
  line["trace_file"] = write_trace(trace, event.trace_id);
  append(line);
}

SessionLog read_session_log(const std::filesystem::path& log_path) {
  std::ifstream in(log_path);
  if (!in) throw InvalidInput("cannot open session log " + log_path.string());
  SessionLog log;
  log.base_directory = log_path.parent_path();
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
      const auto type = doc.at("type").get<std::string>();
      if (type == "session_header") {
        if (doc.at("format").get<std::string>() != kSessionLogFormat ||
            doc.at("version").get<int>() != kSessionLogVersion) {
          throw InvalidInput("session log line " + std::to_string(number) + ": unsupported format");
        }
        log.model_digest = doc.at("model_digest").get<std::string>();
        log.config.reference_duration_s = doc.at("reference_duration_s").get<double>();
        log.config.sense_duration_s = doc.at("sense_duration_s").get<double>();
        header = true;
      } else if (!header) {
        throw InvalidInput("session log line " + std::to_string(number) + ": event before header");
      } else if (type == "reference") {
        log.reference = LoggedWindow{doc.at("trace_id").get<std::string>(), doc.at("trace_file").get<std::string>()};
      } else if (type == "sense_event") {
        log.events.push_back(LoggedEvent{sense_event_from_json(doc), doc.at("trace_file").get<std::string>()});
      } else {
        throw InvalidInput("session log line " + std::to_string(number) + ": unknown type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("session log line " + std::to_string(number) + ": " + e.what());
    }
  }
  return log;
}

ReplayResult replay(const SessionLog& log, const SvmModel& model) {
  ReplayResult result;
  if (log.events.empty() && !log.reference) return result;
  const std::string digest = model_digest(model);
  if (digest != log.model_digest) {
    throw ReplayError("model digest mismatch: log was recorded with " + log.model_digest + ", supplied model is " +
                      digest);
  }
  if (!log.reference) throw ReplayError("session log has events but no reference window");

  std::size_t next = 0;
  Clock logged_clock = [&log, &next]() { return next < log.events.size() ? log.events[next].event.timestamp_ms : 0; };
  DetectionSession session(std::make_shared<const SvmModel>(model), log.config, logged_clock);
  session.capture_reference(load_trace_json(log.base_directory / log.reference->trace_file), log.reference->trace_id);

  for (; next < log.events.size(); ++next) {
    const auto& logged = log.events[next];
    const SenseEvent& expected = logged.event;
    if (session.state() == DetectorState::contact_confirmed) {
      result.mismatches.push_back({expected.sequence, expected.trace_id,
                                   "replayed session confirmed contact before this logged event"});
      break;
    }
    const SenseEvent actual =
        session.sense_cycle(load_trace_json(log.base_directory / logged.trace_file), expected.trace_id);
    std::ostringstream diff;
    if (actual.verdict != expected.verdict) {
      diff << "verdict " << to_string(expected.verdict) << " -> " << to_string(actual.verdict) << "; ";
    }
    if (!same_bits(actual.decision_score, expected.decision_score)) {
      diff.precision(17);
      diff << "decision score " << expected.decision_score << " -> " << actual.decision_score << "; ";
    }
    if (!same_bits(actual.features.relative_average_pressure_pa, expected.features.relative_average_pressure_pa) ||
        !same_bits(actual.features.pressure_change_from_prior_pa, expected.features.pressure_change_from_prior_pa)) {
      diff << "features differ; ";
    }
    if (actual.sequence != expected.sequence) diff << "sequence " << expected.sequence << " -> " << actual.sequence;
    if (!diff.str().empty()) result.mismatches.push_back({expected.sequence, expected.trace_id, diff.str()});
    result.events.push_back(actual);
  }
  return result;
}

ReplayResult replay(const std::filesystem::path& log_path, const SvmModel& model) {
  return replay(read_session_log(log_path), model);
}

}  // namespace vexsense
