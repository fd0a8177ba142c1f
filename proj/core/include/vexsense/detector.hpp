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

// Reference-then-sense contact detection loop.
//
//   awaiting_reference --capture_reference--> sensing --contact--> contact_confirmed
//
// Each sense cycle compares the new window with the reference (relative
// average pressure) and with the prior window (pressure change from prior).
// The prior advances only on no-contact verdicts; the first contact verdict
// ends the session.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vexsense/features.hpp"
#include "vexsense/hydraulics.hpp"
#include "vexsense/svm.hpp"

namespace vexsense {

enum class DetectorState { awaiting_reference, sensing, contact_confirmed };

std::string_view to_string(DetectorState state) noexcept;

struct DetectorConfig {
  double reference_duration_s = 3.0;
  double sense_duration_s = 2.0;

  void validate() const;
};

struct SenseEvent {
  std::uint64_t sequence = 0;
  std::int64_t timestamp_ms = 0;
  FeatureVector features;
  ContactLabel verdict = ContactLabel::no_contact;
  double decision_score = 0.0;
  std::string trace_id;
};

using Clock = std::function<std::int64_t()>;

/// Milliseconds since the Unix epoch.
std::int64_t wall_clock_ms();

class SessionRecorder;

class DetectionSession {
 public:
  explicit DetectionSession(std::shared_ptr<const SvmModel> model, DetectorConfig config = {},
                            Clock clock = wall_clock_ms);

  /// Sets reference and prior. Returns warnings (e.g. an unexpected window
  /// length). Throws StateError unless awaiting a reference.
  std::vector<std::string> capture_reference(PressureTrace trace, std::string trace_id = "reference");

  /// Runs one sense cycle. Throws StateError unless sensing and
  /// InvalidInput when the sample rate differs from the reference.
  SenseEvent sense_cycle(PressureTrace trace, std::string trace_id = {});

  DetectorState state() const;
  const PressureTrace& reference() const;
  PressureTrace prior() const;
  std::vector<SenseEvent> events() const;
  std::size_t event_count() const;
  std::vector<std::string> warnings() const;
  const SvmModel& model() const noexcept { return *model_; }
  const DetectorConfig& config() const noexcept { return config_; }

  /// Persists the reference and every subsequent event.
  void attach_recorder(std::shared_ptr<SessionRecorder> recorder);

 private:
  std::shared_ptr<const SvmModel> model_;
  DetectorConfig config_;
  Clock clock_;
  mutable std::mutex mutex_;
  DetectorState state_ = DetectorState::awaiting_reference;
  std::optional<PressureTrace> reference_;
  std::optional<PressureTrace> prior_;
  std::vector<SenseEvent> events_;
  std::vector<std::string> warnings_;
  std::shared_ptr<SessionRecorder> recorder_;
};

}  // namespace vexsense
