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

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace vexsense {

/// Binary confusion counts with "contact" as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  std::uint64_t errors() const noexcept { return fp + fn; }
  std::uint64_t correct() const noexcept { return tp + tn; }

  void add(bool actual_contact, bool predicted_contact) noexcept;
  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A ratio that may be undefined; when it is, \c reason says why.
struct MetricValue {
  std::optional<double> value;
  std::string reason;

  bool defined() const noexcept { return value.has_value(); }
};

struct MetricsReport {
  double accuracy = 0.0;
  MetricValue precision;
  MetricValue recall;
  MetricValue specificity;
  MetricValue f1;
  MetricValue f2;
};

/// F-beta in the count form (1+b^2) tp / ((1+b^2) tp + b^2 fn + fp), which
/// equals (1+b^2) P R / (b^2 P + R) whenever P and R are defined.
MetricValue f_beta(const ConfusionCounts& counts, double beta);

/// Throws InvalidInput when every count is zero.
MetricsReport metrics(const ConfusionCounts& counts);

nlohmann::json to_json(const ConfusionCounts& counts);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace vexsense
