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
#include "vexsense/metrics.hpp"

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

MetricValue ratio(std::uint64_t numerator, std::uint64_t denominator, const char* undefined_reason) {
  if (denominator == 0) return MetricValue{std::nullopt, undefined_reason};
  return MetricValue{static_cast<double>(numerator) / static_cast<double>(denominator), {}};
}

nlohmann::json to_json(const MetricValue& m) {
  if (m.value) return *m.value;
  return nlohmann::json{{"value", nullptr}, {"undefined", m.reason}};
}

}  // namespace

void ConfusionCounts::add(bool actual_contact, bool predicted_contact) noexcept {
  if (actual_contact) {
    ++(predicted_contact ? tp : fn);
  } else {
    ++(predicted_contact ? fp : tn);
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) noexcept {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

MetricValue f_beta(const ConfusionCounts& counts, double beta) {
  const double b2 = beta * beta;
  const double numerator = (1.0 + b2) * static_cast<double>(counts.tp);
  const double denominator = numerator + b2 * static_cast<double>(counts.fn) + static_cast<double>(counts.fp);
  if (denominator == 0.0) return MetricValue{std::nullopt, "no actual or predicted positives (tp + fp + fn = 0)"};
  return MetricValue{numerator / denominator, {}};
}

MetricsReport metrics(const ConfusionCounts& counts) {
  if (counts.total() == 0) throw InvalidInput("metrics: confusion counts are all zero");
  MetricsReport r;
  r.accuracy = static_cast<double>(counts.correct()) / static_cast<double>(counts.total());
  r.precision = ratio(counts.tp, counts.tp + counts.fp, "no predicted positives (tp + fp = 0)");
  r.recall = ratio(counts.tp, counts.tp + counts.fn, "no actual positives (tp + fn = 0)");
  r.specificity = ratio(counts.tn, counts.tn + counts.fp, "no actual negatives (tn + fp = 0)");
  r.f1 = f_beta(counts, 1.0);
  r.f2 = f_beta(counts, 2.0);
  return r;
}

nlohmann::json to_json(const ConfusionCounts& counts) {
  return {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}, {"total", counts.total()}};
}

nlohmann::json to_json(const MetricsReport& report) {
  return {{"accuracy", report.accuracy},       {"precision", to_json(report.precision)},
          {"recall", to_json(report.recall)},  {"specificity", to_json(report.specificity)},
          {"f1", to_json(report.f1)},          {"f2", to_json(report.f2)}};
}

}  // namespace vexsense
