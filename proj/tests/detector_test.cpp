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

#include <gtest/gtest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "support/temp_dir.hpp"
#include "vexsense/bench.hpp"
#include "vexsense/error.hpp"
#include "vexsense/session_log.hpp"
#include "vexsense/trace_io.hpp"

namespace vexsense {
namespace {

class DetectorTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto corpus = build_training_corpus(1, sim_());
    model_ = std::make_shared<const SvmModel>(train(corpus));
  }
  static void TearDownTestSuite() { model_.reset(); }

  static const SimulatorConfig& sim_() {
    static const SimulatorConfig sim;
    return sim;
  }

  PressureTrace window(ContactState state, double duration, std::uint64_t seed, double distance = 0.02) const {
    return sim_().simulate(sim_().scenario(state, 0.0, 1.0, distance, seed), duration);
  }

  DetectionSession session(Clock clock = [] { return std::int64_t{42}; }) const { return DetectionSession(model_, {}, clock); }

  static std::shared_ptr<const SvmModel> model_;
};

std::shared_ptr<const SvmModel> DetectorTest::model_;

TEST_F(DetectorTest, StartsAwaitingReference) {
  auto s = session();
  EXPECT_EQ(s.state(), DetectorState::awaiting_reference);
  EXPECT_THROW(s.reference(), StateError);
  EXPECT_THROW(s.sense_cycle(window(ContactState::open_vessel, 2.0, 1)), StateError);
}

TEST_F(DetectorTest, CaptureSetsReferenceAndPrior) {
  auto s = session();
  const auto ref = window(ContactState::open_vessel, 3.0, 7, 0.15);
  EXPECT_TRUE(s.capture_reference(ref).empty());
  EXPECT_EQ(s.state(), DetectorState::sensing);
  EXPECT_EQ(s.reference(), ref);
  EXPECT_EQ(s.prior(), ref);
}

TEST_F(DetectorTest, SecondCaptureRejected) {
  auto s = session();
  s.capture_reference(window(ContactState::open_vessel, 3.0, 7));
  EXPECT_THROW(s.capture_reference(window(ContactState::open_vessel, 3.0, 8)), StateError);
}

TEST_F(DetectorTest, ShortReferenceAcceptedWithWarning) {
  auto s = session();
  const auto warnings = s.capture_reference(window(ContactState::open_vessel, 2.0, 7));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("reference"), std::string::npos);
  EXPECT_EQ(s.state(), DetectorState::sensing);
  EXPECT_EQ(s.warnings(), warnings);
}

TEST_F(DetectorTest, TraceIdenticalToReferenceIsNoContact) {
  auto s = session();
  const auto ref = window(ContactState::open_vessel, 3.0, 7);
  s.capture_reference(ref);
  const auto e = s.sense_cycle(ref);
  EXPECT_EQ(e.features.relative_average_pressure_pa, 0.0);
  EXPECT_EQ(e.features.pressure_change_from_prior_pa, 0.0);
  EXPECT_EQ(e.verdict, ContactLabel::no_contact);
  EXPECT_EQ(e.trace_id, "window-0");
  EXPECT_EQ(e.timestamp_ms, 42);
  EXPECT_EQ(s.state(), DetectorState::sensing);
}

TEST_F(DetectorTest, NoContactUpdatesPriorOnly) {
  auto s = session();
  const auto ref = window(ContactState::open_vessel, 3.0, 7, 0.15);
  s.capture_reference(ref);
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto w = window(ContactState::open_vessel, 2.0, 100 + k);
    const auto before = s.prior();
    const auto e = s.sense_cycle(w);
    ASSERT_EQ(e.verdict, ContactLabel::no_contact);
    EXPECT_EQ(e.sequence, k);
    EXPECT_DOUBLE_EQ(e.features.relative_average_pressure_pa, mean_pressure(w) - mean_pressure(ref));
    EXPECT_DOUBLE_EQ(e.features.pressure_change_from_prior_pa, mean_pressure(w) - mean_pressure(before));
    EXPECT_EQ(s.prior(), w);
    EXPECT_EQ(s.reference(), ref);
  }
  EXPECT_EQ(s.event_count(), 5u);
}

TEST_F(DetectorTest, RepeatedWindowHasZeroChange) {
  auto s = session();
  s.capture_reference(window(ContactState::open_vessel, 3.0, 7));
  const auto w = window(ContactState::open_vessel, 2.0, 9);
  s.sense_cycle(w);
  const auto e = s.sense_cycle(w);
  EXPECT_EQ(e.features.pressure_change_from_prior_pa, 0.0);
}

TEST_F(DetectorTest, ClotConfirmsContactAndEndsSession) {
  auto s = session();
  const auto ref = window(ContactState::open_vessel, 3.0, 7, 0.15);
  s.capture_reference(ref);
  s.sense_cycle(window(ContactState::open_vessel, 2.0, 8));
  const auto before = s.prior();
  const auto e = s.sense_cycle(window(ContactState::clot_contact, 2.0, 9, 0.0));
  EXPECT_EQ(e.verdict, ContactLabel::contact);
  EXPECT_GT(e.decision_score, 0.0);
  EXPECT_EQ(s.state(), DetectorState::contact_confirmed);
  EXPECT_EQ(s.prior(), before);
  EXPECT_EQ(s.reference(), ref);
  EXPECT_THROW(s.sense_cycle(window(ContactState::open_vessel, 2.0, 10)), StateError);
  EXPECT_EQ(s.event_count(), 2u);
}

TEST_F(DetectorTest, WallGrazeIsNotContact) {
  auto s = session();
  s.capture_reference(window(ContactState::open_vessel, 3.0, 7, 0.15));
  EXPECT_EQ(s.sense_cycle(window(ContactState::wall_graze, 2.0, 11)).verdict, ContactLabel::no_contact);
}

TEST_F(DetectorTest, SampleRateMismatchRejected) {
  auto s = session();
  s.capture_reference(window(ContactState::open_vessel, 3.0, 7));
  PressureTrace other(std::vector<double>(1000, 0.0), 500.0);
  EXPECT_THROW(s.sense_cycle(other), InvalidInput);
  EXPECT_EQ(s.state(), DetectorState::sensing);
}

TEST_F(DetectorTest, OddSenseWindowWarns) {
  auto s = session();
  s.capture_reference(window(ContactState::open_vessel, 3.0, 7));
  s.sense_cycle(window(ContactState::open_vessel, 1.0, 8));
  EXPECT_EQ(s.warnings().size(), 1u);
}

TEST_F(DetectorTest, RejectsMissingModelAndBadConfig) {
  EXPECT_THROW(DetectionSession(nullptr), InvalidParameter);
  DetectorConfig bad;
  bad.sense_duration_s = 0.0;
  EXPECT_THROW(DetectionSession(model_, bad), InvalidParameter);
}

TEST_F(DetectorTest, RecorderMustPrecedeReference) {
  testing::TempDir dir;
  auto s = session();
  s.capture_reference(window(ContactState::open_vessel, 3.0, 7));
  auto rec = std::make_shared<SessionRecorder>(dir.path(), model_digest(*model_), DetectorConfig{});
  EXPECT_THROW(s.attach_recorder(rec), StateError);
}

class ReplayTest : public DetectorTest {
 protected:
  std::filesystem::path record(const std::filesystem::path& dir) {
    std::int64_t tick = 1000;
    DetectionSession s(model_, {}, [&tick] { return tick += 250; });
    s.attach_recorder(std::make_shared<SessionRecorder>(dir, model_digest(*model_), DetectorConfig{}));
    s.capture_reference(window(ContactState::open_vessel, 3.0, 1, 0.15), "ref");
    for (std::uint64_t k = 0; k < 3; ++k) s.sense_cycle(window(ContactState::open_vessel, 2.0, 10 + k));
    s.sense_cycle(window(ContactState::clot_contact, 2.0, 20, 0.0), "clot");
    recorded_ = s.events();
    return dir / "session.ndjson";
  }
  std::vector<SenseEvent> recorded_;
};

TEST_F(ReplayTest, UntouchedLogReplaysBitIdentically) {
  testing::TempDir dir;
  const auto log = record(dir.path());
  const auto result = replay(log, *model_);
  EXPECT_TRUE(result.identical());
  ASSERT_EQ(result.events.size(), recorded_.size());
  for (std::size_t i = 0; i < recorded_.size(); ++i) {
    EXPECT_EQ(result.events[i].features, recorded_[i].features);
    EXPECT_EQ(result.events[i].decision_score, recorded_[i].decision_score);
    EXPECT_EQ(result.events[i].verdict, recorded_[i].verdict);
    EXPECT_EQ(result.events[i].timestamp_ms, recorded_[i].timestamp_ms);
    EXPECT_EQ(result.events[i].trace_id, recorded_[i].trace_id);
  }
  EXPECT_EQ(recorded_.back().verdict, ContactLabel::contact);
}

TEST_F(ReplayTest, LogContentsRoundTrip) {
  testing::TempDir dir;
  const auto parsed = read_session_log(record(dir.path()));
  EXPECT_EQ(parsed.model_digest, model_digest(*model_));
  ASSERT_TRUE(parsed.reference.has_value());
  EXPECT_EQ(parsed.reference->trace_id, "ref");
  ASSERT_EQ(parsed.events.size(), 4u);
  EXPECT_EQ(parsed.events.back().event.trace_id, "clot");
}

TEST_F(ReplayTest, TamperedTraceIsReported) {
  testing::TempDir dir;
  const auto log = record(dir.path());
  const auto file = dir.path() / "traces" / "window-1.json";
  ASSERT_TRUE(std::filesystem::exists(file));
  save_trace_json(file, load_trace_json(file).offset_by(400.0));
  const auto result = replay(log, *model_);
  ASSERT_FALSE(result.identical());
  EXPECT_EQ(result.mismatches.front().sequence, 1u);
}

TEST_F(ReplayTest, DifferentModelRejected) {
  testing::TempDir dir;
  const auto log = record(dir.path());
  const auto other = train(build_training_corpus(99, sim_()));
  EXPECT_THROW(replay(log, other), ReplayError);
}

TEST_F(ReplayTest, EmptyLogReplaysToNothing) {
  testing::TempDir dir;
  { SessionRecorder rec(dir.path(), model_digest(*model_), DetectorConfig{}); }
  const auto result = replay(dir.path() / "session.ndjson", *model_);
  EXPECT_TRUE(result.identical());
  EXPECT_TRUE(result.events.empty());
}

TEST_F(ReplayTest, MalformedLogRejected) {
  testing::TempDir dir;
  std::ofstream(dir.path() / "bad.ndjson") << "{not json\n";
  EXPECT_THROW(read_session_log(dir.path() / "bad.ndjson"), InvalidInput);
}

TEST(SenseEventJson, RoundTrip) {
  SenseEvent e;
  e.sequence = 3;
  e.timestamp_ms = 123456;
  e.features = {-1234.5, 0.125};
  e.verdict = ContactLabel::contact;
  e.decision_score = 0.1 + 0.2;
  e.trace_id = "w3";
  const auto back = sense_event_from_json(nlohmann::json::parse(to_json(e).dump()));
  EXPECT_EQ(back.sequence, e.sequence);
  EXPECT_EQ(back.timestamp_ms, e.timestamp_ms);
  EXPECT_EQ(back.features, e.features);
  EXPECT_EQ(back.verdict, e.verdict);
  EXPECT_EQ(back.decision_score, e.decision_score);
  EXPECT_EQ(back.trace_id, e.trace_id);
}

}  // namespace
}  // namespace vexsense
