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

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

const SvmModel& model() {
  static const SvmModel m = train(build_training_corpus(1));
  return m;
}

TEST(TrainingCorpus, ShapeAndLabels) {
  const auto corpus = build_training_corpus(1);
  ASSERT_EQ(corpus.size(), 76u);
  std::size_t contact = 0;
  std::set<std::string> ids;
  for (const auto& s : corpus) {
    contact += s.label == ContactLabel::contact;
    ids.insert(s.scenario_id);
  }
  EXPECT_EQ(contact, 19u);
  EXPECT_EQ(ids.size(), corpus.size());
}

TEST(TrainingCorpus, DeterministicPerSeed) {
  const auto a = build_training_corpus(5);
  const auto b = build_training_corpus(5);
  const auto c = build_training_corpus(6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].features, b[i].features);
  EXPECT_NE(a[0].features, c[0].features);
}

TEST(TrainingCorpus, FirstWindowPriorIsReference) {
  for (const auto& s : build_training_corpus(2)) {
    if (s.scenario_id.ends_with("d020mm")) {
      EXPECT_EQ(s.features.relative_average_pressure_pa, s.features.pressure_change_from_prior_pa);
    }
  }
}

TEST(TrainingCorpus, RejectsBadSpec) {
  TrainingCorpusSpec spec;
  spec.trials = 0;
  EXPECT_THROW(build_training_corpus(1, {}, {}, spec), InvalidParameter);
  spec = {};
  spec.non_contact_distances_m = {0.01, -0.01};
  EXPECT_THROW(build_training_corpus(1, {}, {}, spec), InvalidParameter);
}

TEST(Protocol, NominalCountAndHeartRateBlocks) {
  const BenchProtocol p;
  EXPECT_EQ(p.nominal_samples(), 600u);
  EXPECT_EQ(p.heart_rate_for_trial(0), 0.0);
  EXPECT_EQ(p.heart_rate_for_trial(4), 0.0);
  EXPECT_EQ(p.heart_rate_for_trial(5), 70.0);
  EXPECT_EQ(p.heart_rate_for_trial(14), 100.0);
}

TEST(Protocol, Validation) {
  BenchProtocol p;
  p.trials_per_location = 14;
  EXPECT_THROW(p.validate(), InvalidParameter);
  p = {};
  p.extra_sample_probability = 1.5;
  EXPECT_THROW(p.validate(), InvalidParameter);
  p = {};
  p.locations.clear();
  EXPECT_THROW(p.validate(), InvalidParameter);
}

TEST(Benchtop, CountsAreConsistent) {
  const BenchProtocol p;
  const auto r = run_benchtop(p, model());
  EXPECT_EQ(r.total.total(), p.nominal_samples() + r.extra_samples);
  EXPECT_EQ(r.samples.size(), r.total.total());
  EXPECT_EQ(r.total.tp + r.total.fn, 150u);

  ConfusionCounts by_location, by_rate;
  for (const auto& c : r.per_location) by_location += c;
  for (const auto& [bpm, c] : r.per_heart_rate) by_rate += c;
  EXPECT_EQ(by_location, r.total);
  EXPECT_EQ(by_rate, r.total);
  EXPECT_EQ(r.per_heart_rate.size(), 3u);
  EXPECT_EQ(r.per_location.size(), 10u);

  std::set<std::string> ids;
  for (const auto& s : r.samples) ids.insert(s.scenario_id);
  EXPECT_EQ(ids.size(), r.samples.size());
  EXPECT_GE(static_cast<double>(r.total.correct()) / r.total.total(), 0.99);
}

TEST(Benchtop, ThreadCountDoesNotChangeOutcome) {
  BenchProtocol p;
  p.seed = 9;
  const auto one = run_benchtop(p, model(), {}, {}, 1);
  const auto four = run_benchtop(p, model(), {}, {}, 4);
  EXPECT_EQ(one.total, four.total);
  ASSERT_EQ(one.samples.size(), four.samples.size());
  for (std::size_t i = 0; i < one.samples.size(); ++i) {
    EXPECT_EQ(one.samples[i].scenario_id, four.samples[i].scenario_id);
    EXPECT_EQ(one.samples[i].decision_score, four.samples[i].decision_score);
  }
}

TEST(Benchtop, NoiselessPhantomIsErrorFree) {
  SimulatorConfig sim;
  sim.noise_std_pa = 0.0;
  sim.heartbeat_amplitude_pa = 0.0;
  const auto m = train(build_training_corpus(1, sim));
  const auto r = run_benchtop(BenchProtocol{}, m, sim);
  EXPECT_EQ(r.total.errors(), 0u);
  EXPECT_EQ(r.session_restarts, 0u);
}

TEST(Benchtop, ExtraSamplesAreNonContact) {
  BenchProtocol p;
  p.extra_sample_probability = 1.0;
  const auto r = run_benchtop(p, model());
  EXPECT_EQ(r.extra_samples, 150u);
  EXPECT_EQ(r.total.total(), 750u);
  EXPECT_EQ(r.total.tp + r.total.fn, 150u);
}

TEST(Benchtop, OutputFormats) {
  BenchProtocol p;
  p.locations.resize(1);
  p.trials_per_location = 3;
  const auto r = run_benchtop(p, model());
  std::ostringstream csv;
  write_outcomes_csv(csv, r.samples);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("relative_average_pressure_pa,pressure_change_from_prior_pa,actual,predicted", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, r.samples.size());

  const auto doc = to_json(r, p);
  EXPECT_EQ(doc["schema"], "vexsense.bench_report/v1");
  EXPECT_EQ(doc["counts"]["tp"].get<std::uint64_t>(), r.total.tp);
  EXPECT_EQ(doc["per_location"].size(), 1u);

  std::ostringstream grid;
  write_decision_grid_csv(grid, model(), {-6000.0, -6000.0}, {1000.0, 1000.0}, 5, 4);
  std::size_t grid_rows = 0;
  for (char c : grid.str()) grid_rows += c == '\n';
  EXPECT_EQ(grid_rows, 1u + 20u);
  EXPECT_THROW(write_decision_grid_csv(grid, model(), {0, 0}, {1, 1}, 1, 4), InvalidParameter);
}

}  // namespace
}  // namespace vexsense
