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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vexsense/hydraulics.hpp"

namespace vexsense {

/// Classifier inputs derived from one sensing window.
struct FeatureVector {
  /// mean(current) - mean(reference)
  double relative_average_pressure_pa = 0.0;
  /// mean(current) - mean(prior)
  double pressure_change_from_prior_pa = 0.0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Binary contact label; the numeric values are the SVM targets.
enum class ContactLabel : int { no_contact = -1, contact = +1 };

constexpr int sign_of(ContactLabel label) noexcept { return static_cast<int>(label); }
std::string_view to_string(ContactLabel label) noexcept;
ContactLabel contact_label_from_string(std::string_view text);

struct LabeledSample {
  FeatureVector features;
  ContactLabel label = ContactLabel::no_contact;
  std::string scenario_id;
};

/// Arithmetic mean of the samples (compensated summation). Throws
/// InvalidInput on an empty span.
double mean_pressure(std::span<const double> samples);
double mean_pressure(const PressureTrace& trace);

/// Both traces must share a sample rate; durations may differ.
FeatureVector compute_features(const PressureTrace& current, const PressureTrace& reference,
                               const PressureTrace& prior);

/// CSV columns: relative_average_pressure_pa, pressure_change_from_prior_pa,
/// label (contact | no_contact), scenario_id.
void write_feature_csv(std::ostream& out, std::span<const LabeledSample> rows);
std::vector<LabeledSample> read_feature_csv(std::istream& in);
void save_feature_csv(const std::filesystem::path& path, std::span<const LabeledSample> rows);
std::vector<LabeledSample> load_feature_csv(const std::filesystem::path& path);

}  // namespace vexsense
