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
#include "vexsense/detector.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "vexsense/error.hpp"
#include "vexsense/session_log.hpp"

namespace vexsense {
namespace {

std::optional<std::string> duration_warning(const char* what, const PressureTrace& trace, double expected_s) {
  if (std::abs(trace.duration_s() - expected_s) <= 0.5 / trace.sample_rate_hz()) return std::nullopt;
  std::ostringstream msg;
  msg << what << " window is " << trace.duration_s() << " s, configured " << expected_s << " s";
  return msg.str();
}

}  // namespace

std::string_view to_string(DetectorState state) noexcept {
  switch (state) {
    case DetectorState::awaiting_reference: return "awaiting_reference";
    case DetectorState::sensing: return "sensing";
    case DetectorState::contact_confirmed: return "contact_confirmed";
  }
  return "awaiting_reference";
}

void DetectorConfig::validate() const {
  if (!(std::isfinite(reference_duration_s) && reference_duration_s > 0.0)) {
    throw InvalidParameter("reference duration must be positive");
  }
  if (!(std::isfinite(sense_duration_s) && sense_duration_s > 0.0)) {
    throw InvalidParameter("sense duration must be positive");
  }
}

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

DetectionSession::DetectionSession(std::shared_ptr<const SvmModel> model, DetectorConfig config, Clock clock)
    : model_(std::move(model)), config_(config), clock_(std::move(clock)) {
  if (!model_) throw InvalidParameter("detection session needs a trained model");
  if (!clock_) clock_ = wall_clock_ms;
  config_.validate();
}

std::vector<std::string> DetectionSession::capture_reference(PressureTrace trace, std::string trace_id) {
  std::lock_guard lock(mutex_);
  if (state_ != DetectorState::awaiting_reference) {
    throw StateError("reference already captured; a session takes exactly one reference");
  }
  std::vector<std::string> warnings;
  if (auto w = duration_warning("reference", trace, config_.reference_duration_s)) warnings.push_back(*w);
  if (recorder_) recorder_->record_reference(trace, trace_id);
  reference_ = trace;
  prior_ = std::move(trace);
  state_ = DetectorState::sensing;
  warnings_.insert(warnings_.end(), warnings.begin(), warnings.end());
  return warnings;
}

SenseEvent DetectionSession::sense_cycle(PressureTrace trace, std::string trace_id) {
  std::lock_guard lock(mutex_);
  if (state_ == DetectorState::awaiting_reference) throw StateError("sense cycle before a reference was captured");
  if (state_ == DetectorState::contact_confirmed) throw StateError("contact already confirmed; the session has ended");
  if (auto w = duration_warning("sense", trace, config_.sense_duration_s)) warnings_.push_back(*w);

  SenseEvent event;
  event.sequence = events_.size();
  event.trace_id = trace_id.empty() ? "window-" + std::to_string(event.sequence) : std::move(trace_id);
  event.features = compute_features(trace, *reference_, *prior_);
  const Prediction prediction = predict(*model_, event.features);
  event.verdict = prediction.label;
  event.decision_score = prediction.decision_score;
  event.timestamp_ms = clock_();

  if (recorder_) recorder_->record_event(event, trace);
  events_.push_back(event);
  if (event.verdict == ContactLabel::contact) {
    state_ = DetectorState::contact_confirmed;
  } else {
    prior_ = std::move(trace);
  }
  return event;
}

DetectorState DetectionSession::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

const PressureTrace& DetectionSession::reference() const {
  std::lock_guard lock(mutex_);
  if (!reference_) throw StateError("no reference captured yet");
  return *reference_;
}

PressureTrace DetectionSession::prior() const {
  std::lock_guard lock(mutex_);
  if (!prior_) throw StateError("no reference captured yet");
  return *prior_;
}

std::vector<SenseEvent> DetectionSession::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t DetectionSession::event_count() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

std::vector<std::string> DetectionSession::warnings() const {
  std::lock_guard lock(mutex_);
  return warnings_;
}

void DetectionSession::attach_recorder(std::shared_ptr<SessionRecorder> recorder) {
  std::lock_guard lock(mutex_);
  if (state_ != DetectorState::awaiting_reference) {
    throw StateError("recorder must be attached before the reference is captured");
  }
  recorder_ = std::move(recorder);
}

}  // namespace vexsense
