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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vexsense/error.hpp"
#include "vexsense/rng.hpp"

namespace vexsense {
namespace {

constexpr double kPi = std::numbers::pi;

double naive_mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// sum_{k=0}^{n-1} sin(k theta), closed form.
double sine_sum(std::size_t n, double theta) {
  const double nn = static_cast<double>(n);
  return std::sin(nn * theta / 2.0) * std::sin((nn - 1.0) * theta / 2.0) / std::sin(theta / 2.0);
}

double cosine_sum(std::size_t n, double theta) {
  const double nn = static_cast<double>(n);
  return std::sin(nn * theta / 2.0) * std::cos((nn - 1.0) * theta / 2.0) / std::sin(theta / 2.0);
}

TEST(FlowResistance, MatchesDirectArithmetic) {
  const CatheterSpec cath;
  const double expected = 128.0 * 3.5e-3 * 1.32 / (kPi * std::pow(1.8e-3, 4));
  EXPECT_NEAR(flow_resistance(cath), expected, expected * 1e-14);
  EXPECT_NEAR(expected, 1.7931e10, 1e7);
}

TEST(FlowResistance, ScalesWithTortuosity) {
  const CatheterSpec cath;
  EXPECT_DOUBLE_EQ(flow_resistance(cath, 2.5), 2.5 * flow_resistance(cath));
}

TEST(FlowResistance, DoublingDiameterDividesBySixteen) {
  CatheterSpec cath;
  const double base = flow_resistance(cath);
  cath.inner_diameter_m *= 2.0;
  EXPECT_NEAR(flow_resistance(cath), base / 16.0, base * 1e-15);
}

TEST(FlowResistance, RejectsDegenerateGeometry) {
  CatheterSpec cath;
  cath.length_m = 0.0;
  EXPECT_THROW(flow_resistance(cath), InvalidParameter);
  cath = {};
  cath.inner_diameter_m = -1e-3;
  EXPECT_THROW(flow_resistance(cath), InvalidParameter);
  cath = {};
  cath.viscosity_pa_s = std::nan("");
  EXPECT_THROW(flow_resistance(cath), InvalidParameter);
  EXPECT_THROW(flow_resistance(CatheterSpec{}, 0.5), InvalidParameter);
}

TEST(PressureDrop, ZeroFlowGivesZero) { EXPECT_EQ(pressure_drop(1.7e10, 0.0), 0.0); }

TEST(PressureDrop, LinearInFlow) {
  const double r = flow_resistance(CatheterSpec{});
  EXPECT_DOUBLE_EQ(pressure_drop(r, 2e-6), 2.0 * pressure_drop(r, 1e-6));
}

TEST(PressureDrop, PeakPlungerFlow) {
  const SyringeDrive drive;
  const double q_peak = 0.4e-6 * kPi * 4.0;
  EXPECT_NEAR(drive.peak_flow(), q_peak, q_peak * 1e-15);
  const double r = 128.0 * 3.5e-3 * 1.32 / (kPi * std::pow(1.8e-3, 4));
  EXPECT_NEAR(pressure_drop(flow_resistance(CatheterSpec{}), drive.peak_flow()), r * q_peak, r * q_peak * 1e-13);
}

TEST(PressureDrop, RejectsNonPositiveResistance) {
  EXPECT_THROW(pressure_drop(0.0, 1.0), InvalidParameter);
  EXPECT_THROW(pressure_drop(-1.0, 1.0), InvalidParameter);
}

TEST(PressureDrop, RandomizedLinearityAndQuarticScaling) {
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    CatheterSpec cath{rng.uniform(0.1, 3.0), rng.uniform(0.2e-3, 4e-3), rng.uniform(1e-3, 6e-3)};
    const double tort = rng.uniform(1.0, 4.0);
    const double q = rng.uniform(-1e-5, 1e-5);
    const double k = rng.uniform(-10.0, 10.0);
    const double r = flow_resistance(cath, tort);
    const double dp = pressure_drop(r, q);
    EXPECT_NEAR(pressure_drop(r, k * q), k * dp, std::abs(k * dp) * 1e-12);
    const double s = rng.uniform(0.5, 3.0);
    CatheterSpec scaled = cath;
    scaled.inner_diameter_m *= s;
    EXPECT_NEAR(flow_resistance(scaled, tort) * std::pow(s, 4), r, r * 1e-12);
  }
}

TEST(SyringeDrive, ValidatesInvariants) {
  SyringeDrive d;
  EXPECT_NO_THROW(d.validate());
  d.sample_rate_hz = 39.0;
  EXPECT_THROW(d.validate(), InvalidParameter);
  d = {};
  d.stroke_volume_m3 = 0.0;
  EXPECT_THROW(d.validate(), InvalidParameter);
  d = {};
  d.frequency_hz = -4.0;
  EXPECT_THROW(d.validate(), InvalidParameter);
}

TEST(SyringeDrive, FlowIsDerivativeOfWithdrawnVolume) {
  const SyringeDrive d;
  for (double t : {0.01, 0.05, 0.1, 0.13, 0.2}) {
    const double h = 1e-7;
    const double numeric = (d.withdrawn_volume_at(t + h) - d.withdrawn_volume_at(t - h)) / (2 * h);
    EXPECT_NEAR(d.flow_at(t), numeric, d.peak_flow() * 1e-6);
  }
  EXPECT_NEAR(d.withdrawn_volume_at(0.125), d.stroke_volume_m3, 1e-18);
}

TEST(VesselScenario, ValidatesInvariants) {
  VesselScenario s;
  s.heart_rate_bpm = 201;
  EXPECT_THROW(s.validate(), InvalidParameter);
  s = {};
  s.heart_rate_bpm = -1;
  EXPECT_THROW(s.validate(), InvalidParameter);
  s = {};
  s.tortuosity = 0.99;
  EXPECT_THROW(s.validate(), InvalidParameter);
  s = {};
  s.noise_std_pa = -0.1;
  EXPECT_THROW(s.validate(), InvalidParameter);
  s = {};
  s.heart_rate_bpm = 200;
  EXPECT_NO_THROW(s.validate());
}

TEST(PressureTrace, RejectsInvalidSamples) {
  EXPECT_THROW(PressureTrace({}, 1000.0), InvalidInput);
  EXPECT_THROW(PressureTrace({1.0, std::nan("")}, 1000.0), InvalidInput);
  EXPECT_THROW(PressureTrace({1.0, INFINITY}, 1000.0), InvalidInput);
  EXPECT_THROW(PressureTrace({1.0}, 0.0), InvalidInput);
}

TEST(PressureTrace, LengthMatchesRateTimesDuration) {
  const SimulatorConfig sim;
  for (double duration : {0.5, 2.0, 3.0, 1.2345}) {
    const auto trace = sim.simulate(sim.scenario(ContactState::open_vessel, 70, 1.0, 0.01, 1), duration);
    EXPECT_EQ(trace.size(), static_cast<std::size_t>(std::llround(1000.0 * duration)));
    EXPECT_EQ(static_cast<std::size_t>(std::llround(trace.sample_rate_hz() * trace.duration_s())), trace.size());
  }
}

TEST(SimulateTrace, NoiselessOpenVesselMatchesAnalyticMean) {
  const CatheterSpec cath;
  const SyringeDrive drive;
  VesselScenario s;
  for (double duration : {0.3, 0.77, 1.01}) {
    const auto trace = simulate_trace(s, cath, drive, duration);
    const std::size_t n = trace.size();
    const double theta = 2.0 * kPi * drive.frequency_hz / drive.sample_rate_hz;
    const double expected = -flow_resistance(cath) * drive.peak_flow() * sine_sum(n, theta) / static_cast<double>(n);
    EXPECT_NEAR(naive_mean(trace.samples()), expected, std::abs(expected) * 1e-9) << duration;
  }
}

TEST(SimulateTrace, NoiselessOpenVesselIsPureSinusoid) {
  const CatheterSpec cath;
  const SyringeDrive drive;
  const auto trace = simulate_trace(VesselScenario{}, cath, drive, 1.0);
  const double amp = flow_resistance(cath) * drive.peak_flow();
  for (std::size_t k = 0; k < trace.size(); k += 37) {
    const double t = static_cast<double>(k) / 1000.0;
    EXPECT_NEAR(trace.samples()[k], -amp * std::sin(2 * kPi * 4.0 * t), amp * 1e-12);
  }
}

TEST(SimulateTrace, NoiselessContactMatchesClosedForm) {
  const CatheterSpec cath;
  const SyringeDrive drive;
  VesselScenario s;
  s.contact_state = ContactState::clot_contact;
  const auto trace = simulate_trace(s, cath, drive, 2.0);
  const TraceModel model;
  const double c = model.compliance(cath, drive);
  const std::size_t n = trace.size();
  const double theta = 2.0 * kPi * drive.frequency_hz / drive.sample_rate_hz;
  const double expected =
      -drive.stroke_volume_m3 / (2.0 * c) * (1.0 - cosine_sum(n, theta) / static_cast<double>(n));
  EXPECT_NEAR(naive_mean(trace.samples()), expected, std::abs(expected) * 1e-9);
  // Default compliance puts the contact mean at five open-vessel mean drops.
  const double open_drop = flow_resistance(cath) * drive.peak_flow() * 2.0 / kPi;
  EXPECT_NEAR(expected, -5.0 * open_drop, 5.0 * open_drop * 1e-9);
}

TEST(SimulateTrace, DeterministicForSeed) {
  const SimulatorConfig sim;
  const auto s = sim.scenario(ContactState::clot_contact, 100, 1.7, 0.0, 99);
  EXPECT_EQ(sim.simulate(s, 2.0), sim.simulate(s, 2.0));
  const auto other = sim.scenario(ContactState::clot_contact, 100, 1.7, 0.0, 100);
  EXPECT_NE(sim.simulate(s, 2.0).samples()[10], sim.simulate(other, 2.0).samples()[10]);
}

TEST(SimulateTrace, NoiseHasConfiguredSpread) {
  const CatheterSpec cath;
  const SyringeDrive drive;
  VesselScenario s;
  s.noise_std_pa = 500.0;
  s.rng_seed = 7;
  const auto noisy = simulate_trace(s, cath, drive, 20.0);
  const auto clean = simulate_trace(VesselScenario{}, cath, drive, 20.0);
  double ss = 0.0;
  for (std::size_t k = 0; k < noisy.size(); ++k) {
    const double d = noisy.samples()[k] - clean.samples()[k];
    ss += d * d;
  }
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(noisy.size())), 500.0, 500.0 * 0.02);
}

TEST(SimulateTrace, HeartbeatAddsSinusoidAtHeartRate) {
  const CatheterSpec cath;
  const SyringeDrive drive;
  VesselScenario s;
  s.heart_rate_bpm = 60.0;
  s.heartbeat_amplitude_pa = 1000.0;
  const auto beat = simulate_trace(s, cath, drive, 2.0);
  const auto clean = simulate_trace(VesselScenario{}, cath, drive, 2.0);
  // The difference is periodic at 1 Hz with the configured amplitude.
  double peak = 0.0;
  for (std::size_t k = 0; k + 1000 < beat.size(); ++k) {
    const double d0 = beat.samples()[k] - clean.samples()[k];
    const double d1 = beat.samples()[k + 1000] - clean.samples()[k + 1000];
    EXPECT_NEAR(d0, d1, 1e-6);
    peak = std::max(peak, std::abs(d0));
  }
  EXPECT_NEAR(peak, 1000.0, 1.0);
}

TEST(SimulateTrace, WallGrazeMatchesOpenVessel) {
  const SimulatorConfig sim;
  auto open = sim.scenario(ContactState::open_vessel, 70, 1.4, 0.0, 5);
  auto graze = open;
  graze.contact_state = ContactState::wall_graze;
  EXPECT_TRUE(std::ranges::equal(sim.simulate(open, 2.0).samples(), sim.simulate(graze, 2.0).samples()));
}

TEST(SimulateTrace, ContactSeparatesFromOpenVessel) {
  const SimulatorConfig sim;
  const auto open = sim.simulate(sim.scenario(ContactState::open_vessel, 0, 1.0, 0.0, 3), 2.0);
  const auto clot = sim.simulate(sim.scenario(ContactState::clot_contact, 0, 1.0, 0.0, 3), 2.0);
  // Closed-form means are 0 (whole cycles) and -V/(2C); require half that gap.
  const double gap = sim.drive.stroke_volume_m3 / (2.0 * sim.trace_model.compliance(sim.catheter, sim.drive));
  const double separation = 0.5 * gap;
  EXPECT_LT(naive_mean(clot.samples()) - naive_mean(open.samples()), -separation);
}

TEST(SimulateTrace, MeansSeparableOverManySeeds) {
  const SimulatorConfig sim;
  double max_clot = -1e300, min_open = 1e300;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const double hr = std::array{0.0, 70.0, 100.0}[seed % 3];
    const double tort = 1.0 + static_cast<double>(seed % 10) * 0.2;
    const auto open = sim.simulate(sim.scenario(ContactState::open_vessel, hr, tort, 0.01, seed), 2.0);
    const auto clot = sim.simulate(sim.scenario(ContactState::clot_contact, hr, tort, 0.0, seed), 2.0);
    min_open = std::min(min_open, naive_mean(open.samples()));
    max_clot = std::max(max_clot, naive_mean(clot.samples()));
  }
  EXPECT_LT(max_clot, min_open);
}

TEST(SimulateTrace, VacuumLimitClampsAndCounts) {
  SimulatorConfig sim;
  sim.drive.vacuum_limit_pa = 50'000.0;
  const auto trace = sim.simulate(sim.scenario(ContactState::clot_contact, 0, 1.0, 0.0, 1), 1.0);
  EXPECT_GT(trace.metadata().clamped_samples, 0u);
  EXPECT_GE(*std::ranges::min_element(trace.samples()), -50'000.0);
  const auto open = sim.simulate(sim.scenario(ContactState::open_vessel, 0, 1.0, 0.0, 1), 1.0);
  EXPECT_GT(open.metadata().clamped_samples, 0u);
}

TEST(SimulateTrace, RejectsOversizedOrEmptyDuration) {
  const SimulatorConfig sim;
  const auto s = sim.scenario(ContactState::open_vessel, 0, 1.0, 0.0, 1);
  EXPECT_THROW(sim.simulate(s, 1e9), InvalidParameter);
  EXPECT_THROW(sim.simulate(s, 0.0), InvalidParameter);
  EXPECT_THROW(sim.simulate(s, -1.0), InvalidParameter);
}

TEST(SimulatorConfig, DefaultsDeriveFromCatheter) {
  const SimulatorConfig sim;
  const double amp = flow_resistance(sim.catheter) * sim.drive.peak_flow();
  EXPECT_DOUBLE_EQ(sim.noise_std(), 0.05 * amp);
  EXPECT_DOUBLE_EQ(sim.heartbeat_amplitude(), 0.10 * amp);
  const auto none = sim.scenario(ContactState::open_vessel, 0.0, 1.0, 0.0, 1);
  EXPECT_EQ(none.heartbeat_amplitude_pa, 0.0);
}

TEST(ContactState, StringRoundTrip) {
  for (auto s : {ContactState::open_vessel, ContactState::clot_contact, ContactState::wall_graze}) {
    EXPECT_EQ(contact_state_from_string(to_string(s)), s);
  }
  EXPECT_THROW(contact_state_from_string("touching"), InvalidInput);
}

TEST(Units, MillimetresOfMercury) { EXPECT_NEAR(pascals_to_mmhg(133.322387415), 1.0, 1e-12); }

}  // namespace
}  // namespace vexsense
