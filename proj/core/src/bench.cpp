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
#include "vexsense/bench.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <cstdio>
#include <thread>

#include "vexsense/error.hpp"
#include "vexsense/rng.hpp"

namespace vexsense {
namespace {

std::string distance_tag(double distance_m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%03dmm", static_cast<int>(std::lround(distance_m * 1000.0)));
  return buf;
}

struct LocationRun {
  ConfusionCounts counts;
  std::vector<SampleOutcome> samples;
  std::size_t restarts = 0;
  std::size_t extras = 0;
};

LocationRun run_location(const BenchProtocol& protocol, std::size_t loc,
                         const std::shared_ptr<const SvmModel>& model, const SimulatorConfig& sim,
                         const DetectorConfig& detector) {
  LocationRun run;
  const auto& geometry = protocol.locations[loc];
  for (std::size_t trial = 0; trial < protocol.trials_per_location; ++trial) {
    const double heart_rate = protocol.heart_rate_for_trial(trial);
    const std::uint64_t trial_seed = derive_seed(protocol.seed, 0xbe, loc, trial);
    Rng protocol_rng(derive_seed(trial_seed, 0xe7));

    std::vector<double> distances = protocol.non_contact_distances_m;
    if (protocol_rng.bernoulli(protocol.extra_sample_probability)) {
      const auto pick = protocol_rng.below(protocol.non_contact_distances_m.size());
      distances.push_back(protocol.non_contact_distances_m[pick]);
      ++run.extras;
    }
    distances.push_back(0.0);

    const PressureTrace reference = sim.simulate(
        sim.scenario(ContactState::open_vessel, heart_rate, geometry.tortuosity, protocol.reference_distance_m,
                     derive_seed(trial_seed, 0)),
        detector.reference_duration_s);
    auto session = std::make_unique<DetectionSession>(model, detector);
    session->capture_reference(reference);

    char prefix[64];
    std::snprintf(prefix, sizeof prefix, "loc%02zu-t%02zu-hr%03d", loc, trial, static_cast<int>(heart_rate));
    for (std::size_t w = 0; w < distances.size(); ++w) {
      const bool contact = distances[w] <= 0.0;
      const auto state = contact ? ContactState::clot_contact : ContactState::open_vessel;
      const std::string id = std::string(prefix) + "-w" + std::to_string(w) + "-" + distance_tag(distances[w]);
      const PressureTrace window =
          sim.simulate(sim.scenario(state, heart_rate, geometry.tortuosity, distances[w], derive_seed(trial_seed, w + 1)),
                       detector.sense_duration_s);
      if (session->state() == DetectorState::contact_confirmed) {
        session = std::make_unique<DetectionSession>(model, detector);
        session->capture_reference(reference);
        ++run.restarts;
      }
      const SenseEvent event = session->sense_cycle(window, id);

      SampleOutcome out;
      out.location = loc;
      out.location_name = geometry.name;
      out.trial = trial;
      out.window = w;
      out.heart_rate_bpm = heart_rate;
      out.distance_m = distances[w];
      out.actual = contact ? ContactLabel::contact : ContactLabel::no_contact;
      out.predicted = event.verdict;
      out.decision_score = event.decision_score;
      out.features = event.features;
      out.scenario_id = id;
      run.counts.add(contact, event.verdict == ContactLabel::contact);
      run.samples.push_back(std::move(out));
    }
  }
  return run;
}

}  // namespace

void TrainingCorpusSpec::validate() const {
  if (trials == 0) throw InvalidParameter("training corpus needs at least one trial");
  if (non_contact_distances_m.empty()) throw InvalidParameter("training corpus needs non-contact distances");
  for (double d : non_contact_distances_m) {
    if (!(d > 0.0)) throw InvalidParameter("non-contact distances must be positive");
  }
}

std::vector<LabeledSample> build_training_corpus(std::uint64_t seed, const SimulatorConfig& sim,
                                                 const DetectorConfig& detector, const TrainingCorpusSpec& spec) {
  spec.validate();
  sim.validate();
  detector.validate();
  std::vector<LabeledSample> corpus;
  corpus.reserve(spec.trials * (spec.non_contact_distances_m.size() + 1));
  for (std::size_t trial = 0; trial < spec.trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(seed, 0x7a, trial);
    const PressureTrace reference = sim.simulate(
        sim.scenario(ContactState::open_vessel, spec.heart_rate_bpm, spec.tortuosity, spec.reference_distance_m,
                     derive_seed(trial_seed, 0)),
        detector.reference_duration_s);
    PressureTrace prior = reference;
    std::vector<double> distances = spec.non_contact_distances_m;
    distances.push_back(0.0);
    for (std::size_t w = 0; w < distances.size(); ++w) {
      const bool contact = distances[w] <= 0.0;
      const PressureTrace window = sim.simulate(
          sim.scenario(contact ? ContactState::clot_contact : ContactState::open_vessel, spec.heart_rate_bpm,
                       spec.tortuosity, distances[w], derive_seed(trial_seed, w + 1)),
          detector.sense_duration_s);
      char id[48];
      std::snprintf(id, sizeof id, "train-t%02zu-", trial);
      corpus.push_back(LabeledSample{compute_features(window, reference, prior),
                                     contact ? ContactLabel::contact : ContactLabel::no_contact,
                                     std::string(id) + distance_tag(distances[w])});
      prior = window;
    }
  }
  return corpus;
}

std::vector<LocationGeometry> default_locations() {
  std::vector<LocationGeometry> out;
  for (int i = 0; i < 10; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "location-%02d", i);
    out.push_back({name, 1.2 + 0.2 * i});
  }
  return out;
}

void BenchProtocol::validate() const {
  if (locations.empty()) throw InvalidParameter("bench protocol needs at least one location");
  if (trials_per_location == 0) throw InvalidParameter("bench protocol needs at least one trial per location");
  if (non_contact_distances_m.empty()) throw InvalidParameter("bench protocol needs non-contact distances");
  for (double d : non_contact_distances_m) {
    if (!(d > 0.0)) throw InvalidParameter("non-contact distances must be positive");
  }
  if (heart_rate_blocks_bpm.empty()) throw InvalidParameter("bench protocol needs at least one heart-rate block");
  if (trials_per_location % heart_rate_blocks_bpm.size() != 0) {
    throw InvalidParameter("trials per location must split evenly into heart-rate blocks");
  }
  for (const auto& l : locations) {
    if (!(l.tortuosity >= 1.0)) throw InvalidParameter("location tortuosity must be >= 1");
  }
  if (!(extra_sample_probability >= 0.0 && extra_sample_probability <= 1.0)) {
    throw InvalidParameter("extra sample probability must lie in [0, 1]");
  }
}

std::size_t BenchProtocol::nominal_samples() const noexcept {
  return locations.size() * trials_per_location * (non_contact_distances_m.size() + 1);
}

double BenchProtocol::heart_rate_for_trial(std::size_t trial) const {
  const std::size_t block_size = trials_per_location / heart_rate_blocks_bpm.size();
  return heart_rate_blocks_bpm.at(trial / block_size);
}

BenchResult run_benchtop(const BenchProtocol& protocol, const SvmModel& model, const SimulatorConfig& sim,
                         const DetectorConfig& detector, std::size_t threads) {
  protocol.validate();
  sim.validate();
  detector.validate();
  const auto shared_model = std::make_shared<const SvmModel>(model);
  const std::size_t n = protocol.locations.size();
  std::vector<LocationRun> runs(n);
  std::vector<std::exception_ptr> failures(n);

  auto work = [&](std::size_t loc) {
    try {
      runs[loc] = run_location(protocol, loc, shared_model, sim, detector);
    } catch (...) {
      failures[loc] = std::current_exception();
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t loc = 0; loc < n; ++loc) work(loc);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t loc = t; loc < n; loc += threads) work(loc);
      });
    }
  }
  for (std::size_t loc = 0; loc < n; ++loc) {
    if (!failures[loc]) continue;
    try {
      std::rethrow_exception(failures[loc]);
    } catch (const std::exception& e) {
      throw Error("benchtop location " + protocol.locations[loc].name + ": " + e.what());
    }
  }

  BenchResult result;
  for (auto& run : runs) {
    result.total += run.counts;
    result.per_location.push_back(run.counts);
    result.session_restarts += run.restarts;
    result.extra_samples += run.extras;
    for (auto& s : run.samples) {
      result.per_heart_rate[static_cast<int>(std::lround(s.heart_rate_bpm))].add(s.actual == ContactLabel::contact,
                                                                                 s.predicted == ContactLabel::contact);
      result.samples.push_back(std::move(s));
    }
  }
  return result;
}

void write_outcomes_csv(std::ostream& out, const std::vector<SampleOutcome>& samples) {
  out << "relative_average_pressure_pa,pressure_change_from_prior_pa,actual,predicted,correct,decision_score,"
         "heart_rate_bpm,distance_mm,location,trial,window,scenario_id\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) {
    out << s.features.relative_average_pressure_pa << ',' << s.features.pressure_change_from_prior_pa << ','
        << to_string(s.actual) << ',' << to_string(s.predicted) << ',' << (s.correct() ? "true" : "false") << ','
        << s.decision_score << ',' << s.heart_rate_bpm << ',' << s.distance_m * 1000.0 << ',' << s.location_name
        << ',' << s.trial << ',' << s.window << ',' << s.scenario_id << '\n';
  }
}

void write_decision_grid_csv(std::ostream& out, const SvmModel& model, Point2 lower, Point2 upper, std::size_t nx,
                             std::size_t ny) {
  if (nx < 2 || ny < 2) throw InvalidParameter("decision grid needs at least 2 points per axis");
  out << "relative_average_pressure_pa,pressure_change_from_prior_pa,score,label\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double y = lower[1] + (upper[1] - lower[1]) * static_cast<double>(iy) / static_cast<double>(ny - 1);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double x = lower[0] + (upper[0] - lower[0]) * static_cast<double>(ix) / static_cast<double>(nx - 1);
      const auto p = predict(model, FeatureVector{x, y});
      out << x << ',' << y << ',' << p.decision_score << ',' << to_string(p.label) << '\n';
    }
  }
}

nlohmann::json to_json(const BenchResult& result, const BenchProtocol& protocol) {
  nlohmann::json per_location = nlohmann::json::array();
  for (std::size_t i = 0; i < result.per_location.size(); ++i) {
    per_location.push_back({{"location", protocol.locations[i].name},
                            {"tortuosity", protocol.locations[i].tortuosity},
                            {"counts", to_json(result.per_location[i])}});
  }
  nlohmann::json per_hr = nlohmann::json::array();
  for (const auto& [bpm, counts] : result.per_heart_rate) {
    per_hr.push_back({{"heart_rate_bpm", bpm}, {"counts", to_json(counts)}, {"metrics", to_json(metrics(counts))}});
  }
  return {{"schema", "vexsense.bench_report/v1"},
          {"seed", protocol.seed},
          {"nominal_samples", protocol.nominal_samples()},
          {"extra_samples", result.extra_samples},
          {"session_restarts", result.session_restarts},
          {"counts", to_json(result.total)},
          {"metrics", to_json(metrics(result.total))},
          {"per_location", per_location},
          {"per_heart_rate", per_hr}};
}

}  // namespace vexsense
