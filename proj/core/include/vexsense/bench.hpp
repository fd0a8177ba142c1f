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

// Synthetic re-enactment of the training-data collection and the benchtop
// validation protocol.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexsense/detector.hpp"
#include "vexsense/hydraulics.hpp"
#include "vexsense/metrics.hpp"
#include "vexsense/svm.hpp"

namespace vexsense {

/// Training collection: per trial one open-vessel reference far from the clot,
/// then windows at decreasing non-contact distances and one in contact.
struct TrainingCorpusSpec {
  std::size_t trials = 19;
  double reference_distance_m = 0.150;
  std::vector<double> non_contact_distances_m{0.020, 0.010, 0.005};
  /// Straight, pump-free phantom.
  double heart_rate_bpm = 0.0;
  double tortuosity = 1.0;

  void validate() const;
};

/// 19 trials x 4 windows = 76 samples (57 no_contact, 19 contact) by default.
std::vector<LabeledSample> build_training_corpus(std::uint64_t seed, const SimulatorConfig& sim = {},
                                                 const DetectorConfig& detector = {},
                                                 const TrainingCorpusSpec& spec = {});

struct LocationGeometry {
  std::string name;
  double tortuosity = 1.0;
};

/// Ten locations with tortuosity spread over [1.2, 3.0].
std::vector<LocationGeometry> default_locations();

struct BenchProtocol {
  std::vector<LocationGeometry> locations = default_locations();
  std::size_t trials_per_location = 15;
  std::vector<double> non_contact_distances_m{0.020, 0.010, 0.005};
  /// Trials of each location are split into equal consecutive blocks, one per rate.
  std::vector<double> heart_rate_blocks_bpm{0.0, 70.0, 100.0};
  double reference_distance_m = 0.150;
  /// Chance that a trial takes one extra non-contact window before contact.
  double extra_sample_probability = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  /// Windows per trial without extras times the trial count.
  std::size_t nominal_samples() const noexcept;
  double heart_rate_for_trial(std::size_t trial) const;
};

struct SampleOutcome {
  std::size_t location = 0;
  std::string location_name;
  std::size_t trial = 0;
  std::size_t window = 0;
  double heart_rate_bpm = 0.0;
  double distance_m = 0.0;
  ContactLabel actual = ContactLabel::no_contact;
  ContactLabel predicted = ContactLabel::no_contact;
  double decision_score = 0.0;
  FeatureVector features;
  std::string scenario_id;

  bool correct() const noexcept { return actual == predicted; }
};

struct BenchResult {
  ConfusionCounts total;
  std::vector<ConfusionCounts> per_location;
  std::map<int, ConfusionCounts> per_heart_rate;
  std::vector<SampleOutcome> samples;
  /// Detector sessions restarted after a premature contact verdict.
  std::size_t session_restarts = 0;
  std::size_t extra_samples = 0;
};

/// Runs every trial through a DetectionSession. A false contact verdict ends
/// that session; the trial continues in a fresh session that re-uses the
/// trial's reference window. Locations are independent and may run on
/// \p threads workers; the result does not depend on the thread count.
BenchResult run_benchtop(const BenchProtocol& protocol, const SvmModel& model, const SimulatorConfig& sim = {},
                         const DetectorConfig& detector = {}, std::size_t threads = 1);

/// Plot-ready per-window CSV (feature-space points with verdicts).
void write_outcomes_csv(std::ostream& out, const std::vector<SampleOutcome>& samples);

/// Decision score on a regular grid in raw feature units:
/// columns relative_average_pressure_pa, pressure_change_from_prior_pa, score, label.
void write_decision_grid_csv(std::ostream& out, const SvmModel& model, Point2 lower, Point2 upper, std::size_t nx,
                             std::size_t ny);

nlohmann::json to_json(const BenchResult& result, const BenchProtocol& protocol);

}  // namespace vexsense
