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

// Lumped-parameter model of a syringe-driven aspiration catheter.
//
// All quantities are SI: pascals, cubic metres, seconds, metres. Pressures
// are gauge pressures at the proximal (syringe) end of the catheter; negative
// values are vacuum.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vexsense {

inline constexpr double kPascalsPerMmHg = 133.322387415;

constexpr double pascals_to_mmhg(double pa) noexcept { return pa / kPascalsPerMmHg; }

struct CatheterSpec {
  double length_m = 1.32;
  double inner_diameter_m = 1.8e-3;
  double viscosity_pa_s = 3.5e-3;

  /// Throws InvalidParameter unless every field is finite and positive.
  void validate() const;
};

enum class Waveform { sinusoidal };

/// Oscillating syringe plunger. Displacement is sinusoidal, so the withdrawn
/// volume is V/2 (1 - cos 2 pi f t) and the flow is V pi f sin 2 pi f t.
struct SyringeDrive {
  double stroke_volume_m3 = 0.4e-6;
  double frequency_hz = 4.0;
  Waveform waveform = Waveform::sinusoidal;
  double sample_rate_hz = 1000.0;
  /// Ceiling on the vacuum magnitude the drive may produce; samples below
  /// -limit are clamped. Unset means no ceiling.
  std::optional<double> vacuum_limit_pa;

  void validate() const;

  double peak_flow() const noexcept;
  double flow_at(double t) const noexcept;
  double withdrawn_volume_at(double t) const noexcept;
};

enum class ContactState { open_vessel, clot_contact, wall_graze };

std::string_view to_string(ContactState state) noexcept;
ContactState contact_state_from_string(std::string_view text);

struct VesselScenario {
  ContactState contact_state = ContactState::open_vessel;
  double heart_rate_bpm = 0.0;
  double heartbeat_amplitude_pa = 0.0;
  double tortuosity = 1.0;
  double noise_std_pa = 0.0;
  /// Informational; the generative model does not depend on it.
  double tip_to_clot_distance_m = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Constants of the generative trace model that are not part of the scenario.
struct TraceModel {
  double baseline_pa = 0.0;
  /// Contact mean vacuum divided by the open-vessel mean pressure-drop
  /// magnitude R * mean|Q|; used to derive the compliance when none is set.
  double contact_mean_ratio = 5.0;
  std::optional<double> compliance_m3_per_pa;
  /// Multiplier on heartbeat and noise while the tip is sealed by a clot.
  double sealing_factor = 0.2;

  void validate() const;

  /// System compliance used for the closed-system contact response.
  double compliance(const CatheterSpec& cath, const SyringeDrive& drive) const;
};

struct TraceMetadata {
  std::string source;
  std::uint64_t seed = 0;
  double heart_rate_bpm = 0.0;
  double tortuosity = 1.0;
  double tip_to_clot_distance_m = 0.0;
  std::size_t clamped_samples = 0;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

/// Uniformly sampled pressure signal. The duration is always
/// size() / sample_rate_hz, so round(rate * duration) == size() holds by
/// construction.
class PressureTrace {
 public:
  PressureTrace(std::vector<double> samples, double sample_rate_hz,
                std::optional<ContactState> label = std::nullopt, TraceMetadata metadata = {});

  std::span<const double> samples() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  double duration_s() const noexcept;
  std::size_t size() const noexcept { return samples_.size(); }
  const std::optional<ContactState>& scenario_label() const noexcept { return label_; }
  const TraceMetadata& metadata() const noexcept { return metadata_; }

  /// Copy with every sample shifted by \p offset_pa.
  PressureTrace offset_by(double offset_pa) const;

  friend bool operator==(const PressureTrace&, const PressureTrace&) = default;

 private:
  std::vector<double> samples_;
  double sample_rate_hz_;
  std::optional<ContactState> label_;
  TraceMetadata metadata_;
};

/// Hagen-Poiseuille resistance tortuosity * 128 eta L / (pi D^4), in Pa s / m^3.
double flow_resistance(const CatheterSpec& cath, double tortuosity = 1.0);

/// Pressure drop across a resistance at volumetric flow \p flow_m3_per_s.
double pressure_drop(double resistance, double flow_m3_per_s);

/// Magnitude of the open-vessel pressure drop averaged over one plunger
/// cycle, R * V pi f * 2/pi.
double mean_open_vessel_drop(const CatheterSpec& cath, const SyringeDrive& drive,
                             double tortuosity = 1.0);

/// Noise level used when a configuration does not set one: 5% of the
/// open-vessel oscillation amplitude R * Q_peak.
double default_noise_std(const CatheterSpec& cath, const SyringeDrive& drive);

/// Heartbeat amplitude used when a configuration does not set one: 10% of
/// the open-vessel oscillation amplitude.
double default_heartbeat_amplitude(const CatheterSpec& cath, const SyringeDrive& drive);

/// Generates a pressure trace of \p duration_s seconds.
///
/// Open vessel and wall graze share one model:
///   p(t) = baseline - R_eff Q(t) + A_hb sin(2 pi f_hb t + phi) + noise
/// Clot contact seals the tip, so the syringe works against the system
/// compliance instead of the catheter resistance:
///   p(t) = baseline - V_w(t) / C + s (A_hb sin(2 pi f_hb t + phi) + noise)
/// The heartbeat phase and the noise come from the scenario seed, so the
/// result is a pure function of the arguments.
PressureTrace simulate_trace(const VesselScenario& scenario, const CatheterSpec& cath,
                             const SyringeDrive& drive, double duration_s,
                             const TraceModel& model = {});

/// Everything needed to generate traces besides the per-window scenario.
struct SimulatorConfig {
  CatheterSpec catheter;
  SyringeDrive drive;
  TraceModel trace_model;
  /// Unset: default_noise_std(catheter, drive).
  std::optional<double> noise_std_pa;
  /// Unset: default_heartbeat_amplitude(catheter, drive).
  std::optional<double> heartbeat_amplitude_pa;

  void validate() const;
  double noise_std() const;
  double heartbeat_amplitude() const;

  VesselScenario scenario(ContactState state, double heart_rate_bpm, double tortuosity, double distance_m,
                          std::uint64_t seed) const;
  PressureTrace simulate(const VesselScenario& scenario, double duration_s) const;
};

}  // namespace vexsense
