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
#include "vexsense/session_service.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>

#include "vexsense/error.hpp"
#include "vexsense/rng.hpp"
#include "vexsense/session_log.hpp"
#include "vexsense/svm.hpp"

namespace vexsense {
namespace {

using nlohmann::json;

constexpr std::size_t kPreviewPoints = 200;

std::string trial_tag(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial-%02zu", index);
  return buf;
}

bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

bool valid_model_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

// Decimated samples only: the label and metadata of a trace stay server-side.
json trace_preview(const PressureTrace& trace) {
  const std::size_t stride = std::max<std::size_t>(1, (trace.size() + kPreviewPoints - 1) / kPreviewPoints);
  json samples = json::array();
  const auto s = trace.samples();
  for (std::size_t i = 0; i < s.size(); i += stride) samples.push_back(s[i]);
  return {{"sample_rate_hz", trace.sample_rate_hz() / static_cast<double>(stride)},
          {"samples_pa", samples}};
}

json record_to_json(const StudyRecord& r) {
  return {{"user_id", r.user_id},
          {"condition", to_string(r.condition)},
          {"actual", to_string(r.actual)},
          {"estimated", to_string(r.estimated)},
          {"trial_id", r.trial_id},
          {"correct", r.correct()}};
}

}  // namespace

std::string_view to_string(SessionCondition condition) noexcept {
  switch (condition) {
    case SessionCondition::control: return "control";
    case SessionCondition::sensing: return "sensing";
    case SessionCondition::study: return "study";
  }
  return "study";
}

SessionCondition session_condition_from_string(std::string_view text) {
  if (text == "control") return SessionCondition::control;
  if (text == "sensing") return SessionCondition::sensing;
  if (text == "study") return SessionCondition::study;
  if (text == "declarative") {
    throw InvalidInput("declarative records come from declarations made during sensing trials; "
                       "create a 'sensing' or 'study' session");
  }
  throw InvalidInput("unknown session condition '" + std::string(text) + "'");
}

std::string_view to_string(SessionPhase phase) noexcept {
  switch (phase) {
    case SessionPhase::active: return "active";
    case SessionPhase::completed: return "completed";
    case SessionPhase::closed: return "closed";
  }
  return "active";
}

void SessionRequest::validate() const {
  if (trials == 0 || trials > 1000) throw InvalidInput("trials must be in [1, 1000]");
  if (condition == SessionCondition::study && trials % 2 != 0) {
    throw InvalidInput("a study session needs an even number of trials");
  }
  if (scenario_set != "default") throw InvalidInput("unknown scenario set '" + scenario_set + "'");
  if (user_id.empty() || user_id.find_first_of(",\n\r") != std::string::npos) {
    throw InvalidInput("user_id must be non-empty and free of CSV delimiters");
  }
  if (!model_id.empty() && !valid_model_id(model_id)) throw InvalidInput("invalid model id '" + model_id + "'");
}

SessionRequest session_request_from_json(const json& body) {
  if (!body.is_object()) throw InvalidInput("request body must be a JSON object");
  SessionRequest r;
  for (const auto& [key, value] : body.items()) {
    if (key == "schema") {
      if (value != "vexsense.create_session/v1") throw InvalidInput("unsupported request schema");
    } else if (key == "condition") {
      if (!value.is_string()) throw InvalidInput("condition must be a string");
      r.condition = session_condition_from_string(value.get<std::string>());
    } else if (key == "model_id") {
      if (!value.is_string()) throw InvalidInput("model_id must be a string");
      r.model_id = value.get<std::string>();
    } else if (key == "seed") {
      if (!non_negative_integer(value)) throw InvalidInput("seed must be a non-negative integer");
      r.seed = value.get<std::uint64_t>();
    } else if (key == "trials") {
      if (!non_negative_integer(value)) throw InvalidInput("trials must be a positive integer");
      r.trials = value.get<std::size_t>();
    } else if (key == "user_id") {
      if (!value.is_string()) throw InvalidInput("user_id must be a string");
      r.user_id = value.get<std::string>();
    } else if (key == "scenario_set") {
      if (!value.is_string()) throw InvalidInput("scenario_set must be a string");
      r.scenario_set = value.get<std::string>();
    } else {
      throw InvalidInput("unknown request key '" + key + "'");
    }
  }
  r.validate();
  return r;
}

json to_json(const SessionRequest& r) {
  return {{"condition", to_string(r.condition)}, {"model_id", r.model_id},   {"seed", r.seed},
          {"trials", r.trials},                  {"user_id", r.user_id},     {"scenario_set", r.scenario_set}};
}

json to_json(const TrialScript& t) {
  json pauses = json::array();
  for (const auto& p : t.pauses) {
    pauses.push_back({{"displayed_distance_mm", p.displayed_distance_mm},
                      {"true_distance_mm", p.true_distance_mm},
                      {"contact", p.contact}});
  }
  return {{"trial", t.index},
          {"condition", to_string(t.condition)},
          {"location", t.location},
          {"tortuosity", t.tortuosity},
          {"heart_rate_bpm", t.heart_rate_bpm},
          {"clot_position_mm", t.clot_position_mm},
          {"roadmap_error_mm", t.roadmap_error_mm},
          {"seed", t.seed},
          {"pauses", pauses}};
}

std::vector<TrialScript> generate_script(const SessionRequest& request, const ServiceSettings& settings,
                                         const std::vector<LocationGeometry>& locations) {
  request.validate();
  settings.validate();
  if (locations.empty()) throw InvalidParameter("scenario set has no locations");
  const std::uint64_t base = derive_seed(request.seed, settings.seed);

  std::vector<StudyCondition> order(request.trials, StudyCondition::control);
  if (request.condition == SessionCondition::sensing) {
    std::fill(order.begin(), order.end(), StudyCondition::sensing);
  } else if (request.condition == SessionCondition::study) {
    std::fill(order.begin() + static_cast<std::ptrdiff_t>(order.size() / 2), order.end(), StudyCondition::sensing);
    Rng(derive_seed(base, 0xc0)).shuffle(std::span(order));
  }

  // Pauses at displayed distances from 10 mm down to 0 mm in equal steps.
  const std::size_t n = settings.declarations_per_trial;
  std::vector<TrialScript> script;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Rng rng(derive_seed(base, 0x7a1, i));
    TrialScript t;
    t.index = i;
    t.condition = order[i];
    const auto& loc = locations[static_cast<std::size_t>(rng.below(locations.size()))];
    t.location = loc.name;
    t.tortuosity = loc.tortuosity;
    t.heart_rate_bpm = settings.heart_rate_bpm;
    t.clot_position_mm = rng.uniform(settings.clot_position_min_mm, settings.clot_position_max_mm);
    t.roadmap_error_mm = rng.normal(0.0, settings.roadmap_sigma_mm);
    t.seed = rng.next_u64();
    for (std::size_t k = 0; k < n; ++k) {
      ScriptPause p;
      p.displayed_distance_mm = n == 1 ? 0.0 : 10.0 * static_cast<double>(n - 1 - k) / static_cast<double>(n - 1);
      p.true_distance_mm = p.displayed_distance_mm - t.roadmap_error_mm;
      p.contact = p.true_distance_mm <= 0.0;
      t.pauses.push_back(p);
    }
    script.push_back(std::move(t));
  }
  return script;
}

ModelRegistry::ModelRegistry(std::filesystem::path models_dir) : dir_(std::move(models_dir)) {}

std::shared_ptr<const SvmModel> ModelRegistry::get(const std::string& id) const {
  if (!valid_model_id(id)) throw InvalidInput("invalid model id '" + id + "'");
  std::lock_guard lock(mutex_);
  if (const auto it = cache_.find(id); it != cache_.end()) return it->second;
  if (!dir_.empty()) {
    const auto path = dir_ / (id + ".json");
    if (std::filesystem::is_regular_file(path)) {
      auto model = std::make_shared<const SvmModel>(load_model(path));
      cache_.emplace(id, model);
      return model;
    }
  }
  throw NotFound("unknown model id '" + id + "'");
}

bool ModelRegistry::contains(const std::string& id) const {
  try {
    get(id);
    return true;
  } catch (const NotFound&) {
    return false;
  }
}

void ModelRegistry::add(const std::string& id, SvmModel model, bool persist) {
  if (!valid_model_id(id)) throw InvalidInput("invalid model id '" + id + "'");
  std::lock_guard lock(mutex_);
  if (persist) {
    if (dir_.empty()) throw StateError("model registry has no directory to persist into");
    std::filesystem::create_directories(dir_);
    save_model(dir_ / (id + ".json"), model);
  }
  cache_[id] = std::make_shared<const SvmModel>(std::move(model));
}

std::vector<std::string> ModelRegistry::list() const {
  std::lock_guard lock(mutex_);
  std::set<std::string> ids;
  for (const auto& [id, model] : cache_) ids.insert(id);
  if (!dir_.empty() && std::filesystem::is_directory(dir_)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.path().extension() == ".json" && valid_model_id(entry.path().stem().string())) {
        ids.insert(entry.path().stem().string());
      }
    }
  }
  return {ids.begin(), ids.end()};
}

OperatorSession::OperatorSession(std::string id, SessionRequest request, std::string model_id,
                                 std::shared_ptr<const SvmModel> model, SessionContext context,
                                 std::optional<std::filesystem::path> directory)
    : id_(std::move(id)),
      request_(std::move(request)),
      model_id_(std::move(model_id)),
      model_(std::move(model)),
      ctx_(std::move(context)),
      dir_(std::move(directory)),
      script_(generate_script(request_, ctx_.settings, default_locations())) {
  ctx_.simulator.validate();
  ctx_.detector.validate();
  if (dir_) {
    std::filesystem::create_directories(*dir_);
    std::ofstream truth(*dir_ / "ground_truth.json");
    json trials = json::array();
    for (const auto& t : script_) trials.push_back(to_json(t));
    truth << json{{"schema", "vexsense.ground_truth/v1"}, {"session_id", id_}, {"trials", trials}}.dump(2) << '\n';
    event_log_.open(*dir_ / "events.ndjson", std::ios::app);
    if (!event_log_) throw InvalidInput("cannot open event log in " + dir_->string());
  }
  std::lock_guard lock(command_mutex_);
  auto req = to_json(request_);
  req["model_id"] = model_id_;
  emit("session_created", {{"request", req}, {"trial_count", script_.size()}});
  start_trial(0);
}

void OperatorSession::emit(const std::string& kind, json body) {
  std::lock_guard lock(event_mutex_);
  json event = {{"schema", kEventSchema},
                {"session_id", id_},
                {"seq", events_.size() + 1},
                {"timestamp_ms", ctx_.clock()},
                {"kind", kind},
                {"body", std::move(body)}};
  if (event_log_.is_open()) {
    event_log_ << event.dump() << '\n';
    event_log_.flush();
  }
  events_.push_back(std::move(event));
  event_cv_.notify_all();
}

void OperatorSession::require_active(const char* what) const {
  if (phase_ != SessionPhase::active) {
    throw ProtocolError(std::string(what) + " rejected: session is " + std::string(to_string(phase_)));
  }
}

double OperatorSession::true_distance_mm() const { return script_[trial_].clot_position_mm - state_.position_mm; }

double OperatorSession::displayed_distance_mm() const {
  const auto& t = script_[trial_];
  return t.clot_position_mm + t.roadmap_error_mm - state_.position_mm;
}

json OperatorSession::position_view() const {
  return {{"trial", trial_},
          {"trial_condition", to_string(script_[trial_].condition)},
          {"position_mm", state_.position_mm},
          {"estimated_distance_mm", displayed_distance_mm()},
          {"distance_uncertainty_mm", ctx_.settings.roadmap_sigma_mm},
          {"declarations_in_trial", state_.declarations},
          {"declarations_per_trial", ctx_.settings.declarations_per_trial}};
}

PressureTrace OperatorSession::simulate_window(double duration_s, bool contact) {
  const auto& t = script_[trial_];
  const auto seed = derive_seed(t.seed, 0x3e, state_.windows++);
  const auto scenario = ctx_.simulator.scenario(contact ? ContactState::clot_contact : ContactState::open_vessel,
                                                t.heart_rate_bpm, t.tortuosity,
                                                std::max(0.0, true_distance_mm()) / 1000.0, seed);
  return ctx_.simulator.simulate(scenario, duration_s);
}

void OperatorSession::start_trial(std::size_t index) {
  trial_ = index;
  state_ = TrialState{};
  state_.position_mm = ctx_.settings.start_position_mm;
  const auto& t = script_[trial_];
  json body = position_view();
  if (t.condition == StudyCondition::sensing) {
    state_.detector = std::make_unique<DetectionSession>(model_, ctx_.detector, ctx_.clock);
    if (dir_) {
      state_.detector->attach_recorder(
          std::make_shared<SessionRecorder>(*dir_ / trial_tag(trial_), model_digest(*model_), ctx_.detector));
    }
    // Reference window far from the clot, as the loop requires before sensing.
    auto trace = simulate_window(ctx_.detector.reference_duration_s, true_distance_mm() <= 0.0);
    const auto preview = trace_preview(trace);
    body["reference"] = {{"trace_id", trial_tag(trial_) + "-reference"},
                         {"warnings", state_.detector->capture_reference(std::move(trace), trial_tag(trial_) + "-reference")},
                         {"trace_preview", preview}};
  }
  body["detector_state"] = state_.detector ? json(to_string(state_.detector->state())) : json(nullptr);
  emit("trial_started", std::move(body));
}

json OperatorSession::advance(double step_mm) {
  std::lock_guard lock(command_mutex_);
  require_active("advance");
  if (!std::isfinite(step_mm)) throw InvalidInput("step_mm must be finite");
  if (state_.detector && state_.detector->state() == DetectorState::contact_confirmed) {
    throw ProtocolError("advance rejected: contact already confirmed in this sensing trial");
  }
  std::vector<std::string> warnings;
  double target = state_.position_mm + step_mm;
  bool clamped = false;
  if (target > ctx_.settings.vessel_length_mm) {
    target = ctx_.settings.vessel_length_mm;
    clamped = true;
    warnings.push_back("advance clamped at the vessel end");
  } else if (target < 0.0) {
    target = 0.0;
    clamped = true;
    warnings.push_back("withdrawal clamped at the insertion point");
  }
  state_.position_mm = target;
  state_.sense_since_advance.reset();
  json view = position_view();
  view["step_mm"] = step_mm;
  view["clamped"] = clamped;
  view["warnings"] = warnings;
  emit("catheter_advanced", view);
  view["schema"] = "vexsense.position/v1";
  view["session_id"] = id_;
  view["seq"] = last_event_seq();
  return view;
}

json OperatorSession::trigger_sense() {
  std::lock_guard lock(command_mutex_);
  require_active("sense");
  if (script_[trial_].condition != StudyCondition::sensing) {
    throw ProtocolError("sense rejected: trial " + std::to_string(trial_) + " is a control trial");
  }
  if (state_.detector->state() != DetectorState::sensing) {
    throw ProtocolError("sense rejected: detector is " + std::string(to_string(state_.detector->state())));
  }
  auto trace = simulate_window(ctx_.detector.sense_duration_s, true_distance_mm() <= 0.0);
  const auto preview = trace_preview(trace);
  const auto trace_id = trial_tag(trial_) + "-w" + std::to_string(state_.detector->event_count());
  const SenseEvent ev = state_.detector->sense_cycle(std::move(trace), trace_id);
  state_.sense_since_advance = ev.verdict;
  json body = {{"trial", trial_},
               {"sequence", ev.sequence},
               {"verdict", to_string(ev.verdict)},
               {"decision_score", ev.decision_score},
               {"features",
                {{"relative_average_pressure_pa", ev.features.relative_average_pressure_pa},
                 {"pressure_change_from_prior_pa", ev.features.pressure_change_from_prior_pa}}},
               {"trace_id", ev.trace_id},
               {"detector_state", to_string(state_.detector->state())},
               {"trace_preview", preview}};
  emit("sense", body);
  body["schema"] = "vexsense.sense_event/v1";
  body["session_id"] = id_;
  body["seq"] = last_event_seq();
  return body;
}

json OperatorSession::declare(ContactLabel estimate) {
  std::lock_guard lock(command_mutex_);
  require_active("declare");
  const auto& t = script_[trial_];
  const ContactLabel actual = true_distance_mm() <= 0.0 ? ContactLabel::contact : ContactLabel::no_contact;
  const std::size_t pause = state_.declarations;
  const std::string trial_id = trial_tag(trial_) + "-p" + std::to_string(pause);

  json recorded = json::array();
  auto append = [&](StudyCondition condition, ContactLabel estimated) {
    records_.push_back({request_.user_id, condition, actual, estimated, trial_id});
    recorded.push_back({{"condition", to_string(condition)}, {"estimated", to_string(estimated)}});
  };
  if (t.condition == StudyCondition::control) {
    append(StudyCondition::control, estimate);
  } else {
    // The operator's own call during a sensing trial, then the algorithm's
    // verdict at this position when one exists.
    append(StudyCondition::declarative, estimate);
    if (state_.sense_since_advance) append(StudyCondition::sensing, *state_.sense_since_advance);
  }
  ++state_.declarations;
  json body = {{"trial", trial_}, {"pause", pause}, {"trial_id", trial_id}, {"estimate", to_string(estimate)},
               {"records", recorded}};
  emit("declaration", body);

  const bool trial_done = state_.declarations >= ctx_.settings.declarations_per_trial;
  if (trial_done) {
    emit("trial_completed", {{"trial", trial_}});
    if (trial_ + 1 < script_.size()) {
      start_trial(trial_ + 1);
    } else {
      phase_ = SessionPhase::completed;
      emit("session_completed", {{"trials", script_.size()}});
    }
  }
  body["schema"] = "vexsense.declaration/v1";
  body["session_id"] = id_;
  body["trial_completed"] = trial_done;
  body["phase"] = to_string(phase_);
  body["next"] = phase_ == SessionPhase::active ? position_view() : json(nullptr);
  body["seq"] = last_event_seq();
  return body;
}

json OperatorSession::report() const {
  json trials = json::array();
  for (const auto& t : script_) trials.push_back(to_json(t));
  json records = json::array();
  for (const auto& r : records_) records.push_back(record_to_json(r));
  json summary = json::array();
  for (auto c : {StudyCondition::control, StudyCondition::declarative, StudyCondition::sensing}) {
    if (std::none_of(records_.begin(), records_.end(), [c](const StudyRecord& r) { return r.condition == c; })) {
      continue;
    }
    const auto s = condition_confusion(records_, c);
    summary.push_back({{"condition", to_string(c)},
                       {"counts", to_json(s.counts)},
                       {"error_rate", s.error_rate},
                       {"formatted_error_rate", s.formatted_error_rate()}});
  }
  auto req = to_json(request_);
  req["model_id"] = model_id_;
  return {{"schema", "vexsense.session_report/v1"},
          {"session_id", id_},
          {"request", req},
          {"ground_truth", trials},
          {"records", records},
          {"summary", summary}};
}

json OperatorSession::close() {
  std::lock_guard lock(command_mutex_);
  if (phase_ != SessionPhase::closed) {
    phase_ = SessionPhase::closed;
    const json rep = report();
    if (dir_) {
      std::ofstream csv(*dir_ / "study_records.csv");
      write_study_csv(csv, records_);
      std::ofstream(*dir_ / "report.json") << rep.dump(2) << '\n';
    }
    emit("session_closed", rep);
  }
  return report();
}

json OperatorSession::describe() const {
  std::lock_guard lock(command_mutex_);
  json view = position_view();
  view["schema"] = "vexsense.session/v1";
  view["session_id"] = id_;
  view["condition"] = to_string(request_.condition);
  view["user_id"] = request_.user_id;
  view["model_id"] = model_id_;
  view["phase"] = to_string(phase_);
  view["trial_count"] = script_.size();
  view["detector_state"] = state_.detector ? json(to_string(state_.detector->state())) : json(nullptr);
  view["record_count"] = records_.size();
  view["last_event_seq"] = last_event_seq();
  if (phase_ == SessionPhase::closed) view["report"] = report();
  return view;
}

std::vector<json> OperatorSession::events_after(std::uint64_t after, std::size_t max) const {
  std::lock_guard lock(event_mutex_);
  std::vector<json> out;
  for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(after, events_.size()));
       i < events_.size() && out.size() < max; ++i) {
    out.push_back(events_[i]);
  }
  return out;
}

std::vector<json> OperatorSession::wait_events(std::uint64_t after, std::chrono::milliseconds timeout,
                                               std::size_t max) const {
  {
    std::unique_lock lock(event_mutex_);
    event_cv_.wait_for(lock, timeout, [&] {
      return events_.size() > after || (!events_.empty() && events_.back()["kind"] == "session_closed");
    });
  }
  return events_after(after, max);
}

std::uint64_t OperatorSession::last_event_seq() const {
  std::lock_guard lock(event_mutex_);
  return events_.size();
}

SessionPhase OperatorSession::phase() const {
  std::lock_guard lock(command_mutex_);
  return phase_;
}

std::vector<StudyRecord> OperatorSession::records() const {
  std::lock_guard lock(command_mutex_);
  return records_;
}

std::size_t OperatorSession::current_trial() const {
  std::lock_guard lock(command_mutex_);
  return trial_;
}

double OperatorSession::position_mm() const {
  std::lock_guard lock(command_mutex_);
  return state_.position_mm;
}

SessionService::SessionService(Config config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      models_(config_.service.data_dir.empty() ? std::filesystem::path{} : config_.service.data_dir / "models") {
  config_.validate();
}

std::shared_ptr<OperatorSession> SessionService::create_session(const SessionRequest& request) {
  request.validate();
  const std::string model_id = request.model_id.empty() ? config_.service.default_model : request.model_id;
  auto model = models_.get(model_id);

  std::unique_lock lock(mutex_);
  const auto open = std::count_if(sessions_.begin(), sessions_.end(),
                                  [](const auto& kv) { return kv.second->phase() != SessionPhase::closed; });
  if (static_cast<std::size_t>(open) >= config_.service.max_sessions) {
    throw ProtocolError("session limit reached; close a session first");
  }
  std::optional<std::filesystem::path> dir;
  std::string id;
  for (;;) {
    ++counter_;
    char buf[48];
    std::snprintf(buf, sizeof buf, "s%06" PRIu64 "-%08" PRIx64, counter_,
                  derive_seed(request.seed, counter_, config_.service.seed) & 0xffffffffu);
    id = buf;
    if (sessions_.count(id) != 0) continue;
    if (!config_.service.data_dir.empty()) {
      dir = config_.service.data_dir / "sessions" / id;
      if (std::filesystem::exists(*dir)) continue;
    }
    break;
  }
  SessionContext ctx{config_.simulator, config_.detector, config_.service, clock_};
  auto session = std::make_shared<OperatorSession>(id, request, model_id, std::move(model), std::move(ctx), dir);
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<OperatorSession> SessionService::session(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionService::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

}  // namespace vexsense
