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

// Declarative JSON configuration. Every section and key is optional; missing
// keys keep their defaults and unknown keys are rejected so typos surface
// early. See docs/config.md for the schema.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vexsense/bench.hpp"
#include "vexsense/detector.hpp"
#include "vexsense/hydraulics.hpp"
#include "vexsense/svm.hpp"

namespace vexsense {

inline constexpr const char* kConfigEnvVar = "VEXSENSE_CONFIG";

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  /// Model used when a create request names none.
  std::string default_model = "default";
  std::uint64_t seed = 0;
  /// Standard deviation of the roadmap error added to the distance shown to clients.
  double roadmap_sigma_mm = 3.0;
  double vessel_length_mm = 250.0;
  double clot_position_min_mm = 130.0;
  double clot_position_max_mm = 170.0;
  /// Catheter insertion depth at the start of every trial.
  double start_position_mm = 90.0;
  double heart_rate_bpm = 70.0;
  std::size_t declarations_per_trial = 3;
  std::size_t max_sessions = 256;

  void validate() const;
};

struct Config {
  SimulatorConfig simulator;
  DetectorConfig detector;
  SvmParams svm;
  TrainingCorpusSpec training;
  std::uint64_t training_seed = 1;
  BenchProtocol bench;
  /// Worker threads for run_benchtop; 0 picks the hardware concurrency.
  std::size_t bench_threads = 0;
  ServiceSettings service;

  void validate() const;
};

/// Throws InvalidInput on unknown keys or wrongly typed values and
/// InvalidParameter when a value is out of range.
Config config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Config& config);

Config load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const Config& config);

/// explicit_path if set, otherwise $VEXSENSE_CONFIG if set, otherwise none.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path);

/// Loads the resolved config file, or returns defaults when there is none.
Config load_config_or_default(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace vexsense
