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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support/temp_dir.hpp"
#include "vexsense/error.hpp"
#include "vexsense/trace_io.hpp"

namespace vexsense {
namespace {

using nlohmann::json;

TEST(Config, DefaultsRoundTrip) {
  const Config c;
  const json doc = to_json(c);
  EXPECT_EQ(doc["format"], "vexsense.config");
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(to_json(config_from_json(doc)), doc);
}

TEST(Config, ModifiedValuesSurvive) {
  Config c;
  c.detector.sense_duration_s = 1.0;
  c.simulator.noise_std_pa = 12.5;
  c.simulator.drive.vacuum_limit_pa = 80000.0;
  c.svm.gamma = 0.25;
  c.bench.seed = 77;
  c.bench_threads = 3;
  c.service.port = 9001;
  c.service.data_dir = "/tmp/somewhere";
  c.training.trials = 7;
  const Config back = config_from_json(json::parse(to_json(c).dump()));
  EXPECT_EQ(back.detector.sense_duration_s, 1.0);
  EXPECT_EQ(back.simulator.noise_std_pa, 12.5);
  EXPECT_EQ(back.simulator.drive.vacuum_limit_pa, 80000.0);
  EXPECT_EQ(back.svm.gamma, 0.25);
  EXPECT_EQ(back.bench.seed, 77u);
  EXPECT_EQ(back.bench_threads, 3u);
  EXPECT_EQ(back.service.port, 9001);
  EXPECT_EQ(back.service.data_dir, "/tmp/somewhere");
  EXPECT_EQ(back.training.trials, 7u);
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const Config c = config_from_json(json{{"detector", {{"sense_duration_s", 1.0}}}});
  EXPECT_EQ(c.detector.sense_duration_s, 1.0);
  EXPECT_EQ(c.detector.reference_duration_s, DetectorConfig{}.reference_duration_s);
  EXPECT_EQ(c.service.port, ServiceSettings{}.port);
}

TEST(Config, RejectsUnknownKeysAndTypes) {
  EXPECT_THROW(config_from_json(json{{"detectr", json::object()}}), InvalidInput);
  EXPECT_THROW(config_from_json(json{{"detector", {{"sense_duration", 1.0}}}}), InvalidInput);
  EXPECT_THROW(config_from_json(json{{"detector", {{"sense_duration_s", "2"}}}}), InvalidInput);
  EXPECT_THROW(config_from_json(json{{"service", {{"max_sessions", -1}}}}), InvalidInput);
  EXPECT_THROW(config_from_json(json{{"format", "other"}}), InvalidInput);
  EXPECT_THROW(config_from_json(json::array()), InvalidInput);
}

TEST(Config, RejectsOutOfRangeValues) {
  EXPECT_THROW(config_from_json(json{{"detector", {{"sense_duration_s", 0.0}}}}), InvalidParameter);
  EXPECT_THROW(config_from_json(json{{"service", {{"port", 70000}}}}), InvalidParameter);
  EXPECT_THROW(config_from_json(json{{"service", {{"clot_position_min_mm", 200.0}}}}), InvalidParameter);
}

TEST(Config, FileRoundTripAndEnvironment) {
  testing::TempDir dir;
  Config c;
  c.service.seed = 1234;
  const auto path = dir / "cfg.json";
  save_config(path, c);
  EXPECT_EQ(load_config(path).service.seed, 1234u);

  ::setenv(kConfigEnvVar, path.c_str(), 1);
  EXPECT_EQ(resolve_config_path(std::nullopt), path);
  EXPECT_EQ(load_config_or_default(std::nullopt).service.seed, 1234u);
  EXPECT_EQ(resolve_config_path(dir / "explicit.json"), dir / "explicit.json");
  ::unsetenv(kConfigEnvVar);
  EXPECT_FALSE(resolve_config_path(std::nullopt).has_value());
  EXPECT_EQ(load_config_or_default(std::nullopt).service.seed, 0u);
  EXPECT_THROW(load_config(dir / "missing.json"), InvalidInput);

  std::ofstream(dir / "broken.json") << "{";
  EXPECT_THROW(load_config(dir / "broken.json"), InvalidInput);
}

PressureTrace sample_trace() {
  const SimulatorConfig sim;
  return sim.simulate(sim.scenario(ContactState::wall_graze, 70.0, 1.4, 0.005, 3), 0.25);
}

TEST(TraceIo, JsonRoundTripIsExact) {
  const auto t = sample_trace();
  EXPECT_EQ(trace_from_json(json::parse(trace_to_json(t).dump())), t);
  testing::TempDir dir;
  save_trace_json(dir / "t.json", t);
  EXPECT_EQ(load_trace_json(dir / "t.json"), t);
}

TEST(TraceIo, CsvRoundTripKeepsSamples) {
  const auto t = sample_trace();
  std::stringstream io;
  write_trace_csv(io, t);
  const auto back = read_trace_csv(io);
  ASSERT_EQ(back.size(), t.size());
  EXPECT_DOUBLE_EQ(back.sample_rate_hz(), t.sample_rate_hz());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back.samples()[i], t.samples()[i]);
}

TEST(TraceIo, RejectsMalformedInput) {
  std::istringstream no_header("0,1\n");
  EXPECT_THROW(read_trace_csv(no_header), InvalidInput);
  std::istringstream bad_value("time_s,pressure_pa\n0,abc\n");
  EXPECT_THROW(read_trace_csv(bad_value), InvalidInput);
  EXPECT_THROW(trace_from_json(json{{"format", "vexsense.trace"}}), InvalidInput);
}

}  // namespace
}  // namespace vexsense
