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
#include "vexsense/hydraulics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vexsense/error.hpp"
#include "vexsense/rng.hpp"

namespace vexsense {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxSamples = 1e9;

void require(bool condition, const char* what) {
  if (!condition) throw InvalidParameter(what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void CatheterSpec::validate() const {
  require(positive(length_m), "catheter length must be positive");
  require(positive(inner_diameter_m), "catheter inner diameter must be positive");
  require(positive(viscosity_pa_s), "fluid viscosity must be positive");
}

void SyringeDrive::validate() const {
  require(positive(stroke_volume_m3), "stroke volume must be positive");
  require(positive(frequency_hz), "drive frequency must be positive");
  require(positive(sample_rate_hz), "sample rate must be positive");
  require(sample_rate_hz >= 10.0 * frequency_hz, "sample rate must be at least 10x the drive frequency");
  if (vacuum_limit_pa) require(positive(*vacuum_limit_pa), "vacuum limit must be positive");
}

double SyringeDrive::peak_flow() const noexcept { return stroke_volume_m3 * kPi * frequency_hz; }

double SyringeDrive::flow_at(double t) const noexcept {
  return peak_flow() * std::sin(2.0 * kPi * frequency_hz * t);
}

double SyringeDrive::withdrawn_volume_at(double t) const noexcept {
  return 0.5 * stroke_volume_m3 * (1.0 - std::cos(2.0 * kPi * frequency_hz * t));
}

std::string_view to_string(ContactState state) noexcept {
  switch (state) {
    case ContactState::open_vessel: return "open_vessel";
    case ContactState::clot_contact: return "clot_contact";
    case ContactState::wall_graze: return "wall_graze";
  }
  return "open_vessel";
}

ContactState contact_state_from_string(std::string_view text) {
  if (text == "open_vessel") return ContactState::open_vessel;
  if (text == "clot_contact") return ContactState::clot_contact;
  if (text == "wall_graze") return ContactState::wall_graze;
  throw InvalidInput("unknown contact state '" + std::string(text) + "'");
}

void VesselScenario::validate() const {
  require(std::isfinite(heart_rate_bpm) && heart_rate_bpm >= 0.0 && heart_rate_bpm <= 200.0,
          "heart rate must lie in [0, 200] bpm");
  require(std::isfinite(heartbeat_amplitude_pa) && heartbeat_amplitude_pa >= 0.0,
          "heartbeat amplitude must be non-negative");
  require(std::isfinite(tortuosity) && tortuosity >= 1.0, "tortuosity factor must be >= 1");
  require(std::isfinite(noise_std_pa) && noise_std_pa >= 0.0, "noise std must be non-negative");
  require(std::isfinite(tip_to_clot_distance_m), "tip-to-clot distance must be finite");
}

void TraceModel::validate() const {
  require(std::isfinite(baseline_pa), "baseline pressure must be finite");
  require(positive(contact_mean_ratio), "contact mean ratio must be positive");
  if (compliance_m3_per_pa) require(positive(*compliance_m3_per_pa), "compliance must be positive");
  require(std::isfinite(sealing_factor) && sealing_factor >= 0.0 && sealing_factor <= 1.0,
          "sealing factor must lie in [0, 1]");
}

double TraceModel::compliance(const CatheterSpec& cath, const SyringeDrive& drive) const {
  if (compliance_m3_per_pa) return *compliance_m3_per_pa;
  // Contact mean is -V / (2C); pick C so that it equals ratio * open-vessel drop.
  return drive.stroke_volume_m3 / (2.0 * contact_mean_ratio * mean_open_vessel_drop(cath, drive));
}

PressureTrace::PressureTrace(std::vector<double> samples, double sample_rate_hz,
                             std::optional<ContactState> label, TraceMetadata metadata)
    : samples_(std::move(samples)),
      sample_rate_hz_(sample_rate_hz),
      label_(label),
      metadata_(std::move(metadata)) {
  if (!positive(sample_rate_hz_)) throw InvalidInput("trace sample rate must be positive");
  if (samples_.empty()) throw InvalidInput("trace must contain at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      std::ostringstream msg;
      msg << "trace sample " << i << " is not finite";
      throw InvalidInput(msg.str());
    }
  }
}

double PressureTrace::duration_s() const noexcept {
  return static_cast<double>(samples_.size()) / sample_rate_hz_;
}

PressureTrace PressureTrace::offset_by(double offset_pa) const {
  std::vector<double> shifted(samples_.begin(), samples_.end());
  for (double& s : shifted) s += offset_pa;
  return PressureTrace(std::move(shifted), sample_rate_hz_, label_, metadata_);
}

double flow_resistance(const CatheterSpec& cath, double tortuosity) {
  cath.validate();
  require(std::isfinite(tortuosity) && tortuosity >= 1.0, "tortuosity factor must be >= 1");
  const double d2 = cath.inner_diameter_m * cath.inner_diameter_m;
  return tortuosity * 128.0 * cath.viscosity_pa_s * cath.length_m / (kPi * d2 * d2);
}

double pressure_drop(double resistance, double flow_m3_per_s) {
  require(positive(resistance), "flow resistance must be positive");
  return resistance * flow_m3_per_s;
}

double mean_open_vessel_drop(const CatheterSpec& cath, const SyringeDrive& drive, double tortuosity) {
  drive.validate();
  return flow_resistance(cath, tortuosity) * drive.peak_flow() * (2.0 / kPi);
}

double default_noise_std(const CatheterSpec& cath, const SyringeDrive& drive) {
  drive.validate();
  return 0.05 * flow_resistance(cath) * drive.peak_flow();
}

double default_heartbeat_amplitude(const CatheterSpec& cath, const SyringeDrive& drive) {
  drive.validate();
  return 0.10 * flow_resistance(cath) * drive.peak_flow();
}

PressureTrace simulate_trace(const VesselScenario& scenario, const CatheterSpec& cath,
                             const SyringeDrive& drive, double duration_s, const TraceModel& model) {
  scenario.validate();
  cath.validate();
  drive.validate();
  model.validate();
  require(positive(duration_s), "trace duration must be positive");
  const double expected = drive.sample_rate_hz * duration_s;
  require(std::isfinite(expected) && expected <= kMaxSamples, "trace duration x sample rate is too large");
  const auto count = static_cast<std::size_t>(std::llround(expected));
  require(count > 0, "trace duration is shorter than one sample");

  Rng rng(scenario.rng_seed);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  const double heart_hz = scenario.heart_rate_bpm / 60.0;
  const bool sealed = scenario.contact_state == ContactState::clot_contact;
  const double disturbance_gain = sealed ? model.sealing_factor : 1.0;
  const double resistance = flow_resistance(cath, scenario.tortuosity);
  const double compliance = sealed ? model.compliance(cath, drive) : 0.0;

  std::vector<double> samples(count);
  std::size_t clamped = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / drive.sample_rate_hz;
    const double hydraulic = sealed ? -drive.withdrawn_volume_at(t) / compliance
                                    : -pressure_drop(resistance, drive.flow_at(t));
    double disturbance = 0.0;
    if (heart_hz > 0.0 && scenario.heartbeat_amplitude_pa > 0.0) {
      disturbance += scenario.heartbeat_amplitude_pa * std::sin(2.0 * kPi * heart_hz * t + phase);
    }
    if (scenario.noise_std_pa > 0.0) disturbance += rng.normal(0.0, scenario.noise_std_pa);
    double p = model.baseline_pa + hydraulic + disturbance_gain * disturbance;
    if (drive.vacuum_limit_pa && p < -*drive.vacuum_limit_pa) {
      p = -*drive.vacuum_limit_pa;
      ++clamped;
    }
    samples[k] = p;
  }

  TraceMetadata meta;
  meta.source = "simulator";
  meta.seed = scenario.rng_seed;
  meta.heart_rate_bpm = scenario.heart_rate_bpm;
  meta.tortuosity = scenario.tortuosity;
  meta.tip_to_clot_distance_m = scenario.tip_to_clot_distance_m;
  meta.clamped_samples = clamped;
  return PressureTrace(std::move(samples), drive.sample_rate_hz, scenario.contact_state, std::move(meta));
}

void SimulatorConfig::validate() const {
  catheter.validate();
  drive.validate();
  trace_model.validate();
  if (noise_std_pa) require(std::isfinite(*noise_std_pa) && *noise_std_pa >= 0.0, "noise std must be non-negative");
  if (heartbeat_amplitude_pa) {
    require(std::isfinite(*heartbeat_amplitude_pa) && *heartbeat_amplitude_pa >= 0.0,
            "heartbeat amplitude must be non-negative");
  }
}

double SimulatorConfig::noise_std() const {
  return noise_std_pa ? *noise_std_pa : default_noise_std(catheter, drive);
}

double SimulatorConfig::heartbeat_amplitude() const {
  return heartbeat_amplitude_pa ? *heartbeat_amplitude_pa : default_heartbeat_amplitude(catheter, drive);
}

VesselScenario SimulatorConfig::scenario(ContactState state, double heart_rate_bpm, double tortuosity,
                                         double distance_m, std::uint64_t seed) const {
  VesselScenario s;
  s.contact_state = state;
  s.heart_rate_bpm = heart_rate_bpm;
  s.heartbeat_amplitude_pa = heart_rate_bpm > 0.0 ? heartbeat_amplitude() : 0.0;
  s.tortuosity = tortuosity;
  s.noise_std_pa = noise_std();
  s.tip_to_clot_distance_m = distance_m;
  s.rng_seed = seed;
  return s;
}

PressureTrace SimulatorConfig::simulate(const VesselScenario& s, double duration_s) const {
  return simulate_trace(s, catheter, drive, duration_s, trace_model);
}

}  // namespace vexsense
