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
#include "vexsense/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

using nlohmann::json;

// Strict reader over one JSON object section.
class Section {
 public:
  Section(const json& doc, std::string path, std::initializer_list<std::string_view> allowed) : doc_(doc), path_(path) {
    if (!doc.is_object()) throw InvalidInput(path_ + ": expected an object");
    for (const auto& [key, value] : doc.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) throw InvalidInput(path_ + ": unknown key '" + key + "'");
    }
  }

  const json* find(const char* key) const {
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string where(const char* key) const { return path_ + "." + key; }

  void number(const char* key, double& out) const {
    if (const auto* v = find(key)) {
      if (!v->is_number()) throw InvalidInput(where(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  void optional_number(const char* key, std::optional<double>& out) const {
    if (const auto* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw InvalidInput(where(key) + ": expected a number or null");
      }
    }
  }

  template <typename Int>
  void integer(const char* key, Int& out) const {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) throw InvalidInput(where(key) + ": expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = v->get<Int>();
        } else if (v->get<std::int64_t>() >= 0) {
          out = static_cast<Int>(v->get<std::int64_t>());
        } else {
          throw InvalidInput(where(key) + ": expected a non-negative integer");
        }
      } else {
        out = v->get<Int>();
      }
    }
  }

  void string(const char* key, std::string& out) const {
    if (const auto* v = find(key)) {
      if (!v->is_string()) throw InvalidInput(where(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) const {
    if (const auto* v = find(key)) {
      if (!v->is_array()) throw InvalidInput(where(key) + ": expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw InvalidInput(where(key) + ": expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

 private:
  const json& doc_;
  std::string path_;
};

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void read_simulator(const json& doc, SimulatorConfig& sim) {
  const Section s(doc, "simulator", {"catheter", "drive", "trace_model", "noise_std_pa", "heartbeat_amplitude_pa"});
  if (const auto* c = s.find("catheter")) {
    const Section cs(*c, "simulator.catheter", {"length_m", "inner_diameter_m", "viscosity_pa_s"});
    cs.number("length_m", sim.catheter.length_m);
    cs.number("inner_diameter_m", sim.catheter.inner_diameter_m);
    cs.number("viscosity_pa_s", sim.catheter.viscosity_pa_s);
  }
  if (const auto* d = s.find("drive")) {
    const Section ds(*d, "simulator.drive",
                     {"stroke_volume_m3", "frequency_hz", "waveform", "sample_rate_hz", "vacuum_limit_pa"});
    ds.number("stroke_volume_m3", sim.drive.stroke_volume_m3);
    ds.number("frequency_hz", sim.drive.frequency_hz);
    std::string waveform = "sinusoidal";
    ds.string("waveform", waveform);
    if (waveform != "sinusoidal") throw InvalidInput("simulator.drive.waveform: only 'sinusoidal' is supported");
    ds.number("sample_rate_hz", sim.drive.sample_rate_hz);
    ds.optional_number("vacuum_limit_pa", sim.drive.vacuum_limit_pa);
  }
  if (const auto* m = s.find("trace_model")) {
    const Section ms(*m, "simulator.trace_model",
                     {"baseline_pa", "contact_mean_ratio", "compliance_m3_per_pa", "sealing_factor"});
    ms.number("baseline_pa", sim.trace_model.baseline_pa);
    ms.number("contact_mean_ratio", sim.trace_model.contact_mean_ratio);
    ms.optional_number("compliance_m3_per_pa", sim.trace_model.compliance_m3_per_pa);
    ms.number("sealing_factor", sim.trace_model.sealing_factor);
  }
  s.optional_number("noise_std_pa", sim.noise_std_pa);
  s.optional_number("heartbeat_amplitude_pa", sim.heartbeat_amplitude_pa);
}

void read_svm(const json& doc, SvmParams& svm) {
  const Section s(doc, "svm", {"gamma", "gamma_heuristic", "c", "tolerance", "max_iter"});
  s.optional_number("gamma", svm.gamma);
  std::string heuristic(to_string(svm.heuristic));
  s.string("gamma_heuristic", heuristic);
  svm.heuristic = gamma_heuristic_from_string(heuristic);
  s.number("c", svm.c);
  s.number("tolerance", svm.tolerance);
  s.integer("max_iter", svm.max_iter);
}

void read_bench(const json& doc, Config& cfg) {
  const Section s(doc, "bench",
                  {"locations", "trials_per_location", "non_contact_distances_m", "heart_rate_blocks_bpm",
                   "reference_distance_m", "extra_sample_probability", "seed", "threads"});
  auto& b = cfg.bench;
  if (const auto* locs = s.find("locations")) {
    if (!locs->is_array()) throw InvalidInput("bench.locations: expected an array");
    b.locations.clear();
    for (const auto& l : *locs) {
      const Section ls(l, "bench.locations[]", {"name", "tortuosity"});
      LocationGeometry g;
      g.name = "location-" + std::to_string(b.locations.size());
      ls.string("name", g.name);
      ls.number("tortuosity", g.tortuosity);
      b.locations.push_back(g);
    }
  }
  s.integer("trials_per_location", b.trials_per_location);
  s.numbers("non_contact_distances_m", b.non_contact_distances_m);
  s.numbers("heart_rate_blocks_bpm", b.heart_rate_blocks_bpm);
  s.number("reference_distance_m", b.reference_distance_m);
  s.number("extra_sample_probability", b.extra_sample_probability);
  s.integer("seed", b.seed);
  s.integer("threads", cfg.bench_threads);
}

void read_service(const json& doc, ServiceSettings& svc) {
  const Section s(doc, "service",
                  {"host", "port", "data_dir", "default_model", "seed", "roadmap_sigma_mm", "vessel_length_mm",
                   "clot_position_min_mm", "clot_position_max_mm", "start_position_mm", "heart_rate_bpm",
                   "declarations_per_trial", "max_sessions"});
  s.string("host", svc.host);
  s.integer("port", svc.port);
  std::string dir = svc.data_dir.string();
  s.string("data_dir", dir);
  svc.data_dir = dir;
  s.string("default_model", svc.default_model);
  s.integer("seed", svc.seed);
  s.number("roadmap_sigma_mm", svc.roadmap_sigma_mm);
  s.number("vessel_length_mm", svc.vessel_length_mm);
  s.number("clot_position_min_mm", svc.clot_position_min_mm);
  s.number("clot_position_max_mm", svc.clot_position_max_mm);
  s.number("start_position_mm", svc.start_position_mm);
  s.number("heart_rate_bpm", svc.heart_rate_bpm);
  s.integer("declarations_per_trial", svc.declarations_per_trial);
  s.integer("max_sessions", svc.max_sessions);
}

}  // namespace

void ServiceSettings::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (port < 0 || port > 65535) throw InvalidParameter("service.port must be in [0, 65535]");
  if (!finite(roadmap_sigma_mm) || roadmap_sigma_mm < 0.0) {
    throw InvalidParameter("service.roadmap_sigma_mm must be finite and >= 0");
  }
  if (!finite(vessel_length_mm) || vessel_length_mm <= 0.0) {
    throw InvalidParameter("service.vessel_length_mm must be positive");
  }
  if (!finite(clot_position_min_mm) || !finite(clot_position_max_mm) || clot_position_min_mm > clot_position_max_mm ||
      clot_position_min_mm <= 0.0 || clot_position_max_mm > vessel_length_mm) {
    throw InvalidParameter("service clot position range must satisfy 0 < min <= max <= vessel_length_mm");
  }
  if (!finite(start_position_mm) || start_position_mm < 0.0 || start_position_mm >= clot_position_min_mm) {
    throw InvalidParameter("service.start_position_mm must lie in [0, clot_position_min_mm)");
  }
  if (!finite(heart_rate_bpm) || heart_rate_bpm < 0.0 || heart_rate_bpm > 200.0) {
    throw InvalidParameter("service.heart_rate_bpm must be in [0, 200]");
  }
  if (declarations_per_trial == 0) throw InvalidParameter("service.declarations_per_trial must be positive");
  if (max_sessions == 0) throw InvalidParameter("service.max_sessions must be positive");
}

void Config::validate() const {
  simulator.validate();
  detector.validate();
  svm.validate();
  training.validate();
  bench.validate();
  service.validate();
}

Config config_from_json(const nlohmann::json& doc) {
  Config cfg;
  const Section root(doc, "config", {"format", "version", "simulator", "detector", "svm", "training", "bench", "service"});
  if (const auto* f = root.find("format"); f && *f != "vexsense.config") {
    throw InvalidInput("config.format: expected 'vexsense.config'");
  }
  if (const auto* v = root.find("version"); v && *v != 1) throw InvalidInput("config.version: unsupported version");
  if (const auto* s = root.find("simulator")) read_simulator(*s, cfg.simulator);
  if (const auto* d = root.find("detector")) {
    const Section ds(*d, "detector", {"reference_duration_s", "sense_duration_s"});
    ds.number("reference_duration_s", cfg.detector.reference_duration_s);
    ds.number("sense_duration_s", cfg.detector.sense_duration_s);
  }
  if (const auto* s = root.find("svm")) read_svm(*s, cfg.svm);
  if (const auto* t = root.find("training")) {
    const Section ts(*t, "training",
                     {"trials", "reference_distance_m", "non_contact_distances_m", "heart_rate_bpm", "tortuosity", "seed"});
    ts.integer("trials", cfg.training.trials);
    ts.number("reference_distance_m", cfg.training.reference_distance_m);
    ts.numbers("non_contact_distances_m", cfg.training.non_contact_distances_m);
    ts.number("heart_rate_bpm", cfg.training.heart_rate_bpm);
    ts.number("tortuosity", cfg.training.tortuosity);
    ts.integer("seed", cfg.training_seed);
  }
  if (const auto* b = root.find("bench")) read_bench(*b, cfg);
  if (const auto* s = root.find("service")) read_service(*s, cfg.service);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const Config& c) {
  json locations = json::array();
  for (const auto& l : c.bench.locations) locations.push_back({{"name", l.name}, {"tortuosity", l.tortuosity}});
  const auto& sim = c.simulator;
  return {
      {"format", "vexsense.config"},
      {"version", 1},
      {"simulator",
       {{"catheter",
         {{"length_m", sim.catheter.length_m},
          {"inner_diameter_m", sim.catheter.inner_diameter_m},
          {"viscosity_pa_s", sim.catheter.viscosity_pa_s}}},
        {"drive",
         {{"stroke_volume_m3", sim.drive.stroke_volume_m3},
          {"frequency_hz", sim.drive.frequency_hz},
          {"waveform", "sinusoidal"},
          {"sample_rate_hz", sim.drive.sample_rate_hz},
          {"vacuum_limit_pa", optional_to_json(sim.drive.vacuum_limit_pa)}}},
        {"trace_model",
         {{"baseline_pa", sim.trace_model.baseline_pa},
          {"contact_mean_ratio", sim.trace_model.contact_mean_ratio},
          {"compliance_m3_per_pa", optional_to_json(sim.trace_model.compliance_m3_per_pa)},
          {"sealing_factor", sim.trace_model.sealing_factor}}},
        {"noise_std_pa", optional_to_json(sim.noise_std_pa)},
        {"heartbeat_amplitude_pa", optional_to_json(sim.heartbeat_amplitude_pa)}}},
      {"detector",
       {{"reference_duration_s", c.detector.reference_duration_s}, {"sense_duration_s", c.detector.sense_duration_s}}},
      {"svm",
       {{"gamma", optional_to_json(c.svm.gamma)},
        {"gamma_heuristic", to_string(c.svm.heuristic)},
        {"c", c.svm.c},
        {"tolerance", c.svm.tolerance},
        {"max_iter", c.svm.max_iter}}},
      {"training",
       {{"trials", c.training.trials},
        {"reference_distance_m", c.training.reference_distance_m},
        {"non_contact_distances_m", c.training.non_contact_distances_m},
        {"heart_rate_bpm", c.training.heart_rate_bpm},
        {"tortuosity", c.training.tortuosity},
        {"seed", c.training_seed}}},
      {"bench",
       {{"locations", locations},
        {"trials_per_location", c.bench.trials_per_location},
        {"non_contact_distances_m", c.bench.non_contact_distances_m},
        {"heart_rate_blocks_bpm", c.bench.heart_rate_blocks_bpm},
        {"reference_distance_m", c.bench.reference_distance_m},
        {"extra_sample_probability", c.bench.extra_sample_probability},
        {"seed", c.bench.seed},
        {"threads", c.bench_threads}}},
      {"service",
       {{"host", c.service.host},
        {"port", c.service.port},
        {"data_dir", c.service.data_dir.string()},
        {"default_model", c.service.default_model},
        {"seed", c.service.seed},
        {"roadmap_sigma_mm", c.service.roadmap_sigma_mm},
        {"vessel_length_mm", c.service.vessel_length_mm},
        {"clot_position_min_mm", c.service.clot_position_min_mm},
        {"clot_position_max_mm", c.service.clot_position_max_mm},
        {"start_position_mm", c.service.start_position_mm},
        {"heart_rate_bpm", c.service.heart_rate_bpm},
        {"declarations_per_trial", c.service.declarations_per_trial},
        {"max_sessions", c.service.max_sessions}}},
  };
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const std::filesystem::path& path, const Config& config) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write config " + path.string());
  out << to_json(config).dump(2) << '\n';
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

Config load_config_or_default(const std::optional<std::filesystem::path>& explicit_path) {
  const auto path = resolve_config_path(explicit_path);
  return path ? load_config(*path) : Config{};
}

}  // namespace vexsense
