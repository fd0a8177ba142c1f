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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexsense/features.hpp"
#include "vexsense/metrics.hpp"

namespace vexsense {

enum class StudyCondition { control, declarative, sensing };

std::string_view to_string(StudyCondition condition) noexcept;
StudyCondition study_condition_from_string(std::string_view text);

struct StudyRecord {
  std::string user_id;
  StudyCondition condition = StudyCondition::control;
  ContactLabel actual = ContactLabel::no_contact;
  ContactLabel estimated = ContactLabel::no_contact;
  std::string trial_id;

  bool correct() const noexcept { return actual == estimated; }
  friend bool operator==(const StudyRecord&, const StudyRecord&) = default;
};

/// CSV columns: user_id, condition, actual, estimated, trial_id.
void write_study_csv(std::ostream& out, std::span<const StudyRecord> records);
std::vector<StudyRecord> read_study_csv(std::istream& in);
std::vector<StudyRecord> load_study_csv(const std::filesystem::path& path);

/// Expands confusion counts into one record per cell entry.
std::vector<StudyRecord> records_from_counts(StudyCondition condition, const ConfusionCounts& counts,
                                             const std::string& user_id = "u0",
                                             const std::string& trial_prefix = "");

struct ConditionSummary {
  StudyCondition condition = StudyCondition::control;
  ConfusionCounts counts;
  double error_rate = 0.0;

  /// e.g. "15/90 (16.7%)"
  std::string formatted_error_rate() const;
};

/// Throws InvalidInput when no record has \p condition.
ConditionSummary condition_confusion(std::span<const StudyRecord> records, StudyCondition condition);

/// Percentage with one decimal, e.g. 12.2.
std::string format_percent(std::uint64_t part, std::uint64_t whole);

struct GroupOutcome {
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
};

GroupOutcome outcome_of(const ConditionSummary& summary) noexcept;

enum class OddsRatioMethod { woolf_2x2, logistic_wald };

std::string_view to_string(OddsRatioMethod method) noexcept;

struct OddsRatioResult {
  double odds_ratio = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double p_value = 1.0;
  double log_standard_error = 0.0;
  OddsRatioMethod method = OddsRatioMethod::woolf_2x2;
  /// True when the Haldane-Anscombe 0.5 correction was applied.
  bool corrected = false;
};

enum class ZeroCellPolicy { haldane_anscombe, reject };

/// Odds of a correct outcome in \p a divided by the odds in \p b, with the
/// Woolf log-scale interval exp(ln OR +/- z sqrt(sum 1/cell)) and a two-sided
/// normal-approximation p-value.
OddsRatioResult odds_ratio_2x2(GroupOutcome a, GroupOutcome b,
                               ZeroCellPolicy policy = ZeroCellPolicy::haldane_anscombe, double z_critical = 1.96);

struct LogisticCoefficient {
  std::string term;
  double estimate = 0.0;
  double standard_error = 0.0;
  double wald_z = 0.0;
  double p_value = 1.0;
};

struct ConditionEffect {
  StudyCondition condition = StudyCondition::control;
  OddsRatioResult odds_ratio;
};

struct LogisticWaldResult {
  StudyCondition reference = StudyCondition::control;
  /// Intercept first, then one indicator per non-reference condition.
  std::vector<LogisticCoefficient> coefficients;
  std::vector<ConditionEffect> effects;
  /// Joint Wald test that every condition coefficient is zero.
  double wald_chi2 = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool separation = false;
  std::string diagnostics;
};

/// Fixed-effects logistic regression of correct ~ condition by iteratively
/// reweighted least squares. Non-convergence and separation are reported in
/// the result rather than thrown.
LogisticWaldResult logistic_wald(std::span<const StudyRecord> records,
                                 StudyCondition reference = StudyCondition::control, std::size_t max_iter = 100,
                                 double tolerance = 1e-10, double z_critical = 1.96);

/// Table-shaped summary: per-condition cells and error rates, odds ratios
/// against \p reference by both methods, and the joint Wald test.
nlohmann::json study_report_json(std::span<const StudyRecord> records,
                                 StudyCondition reference = StudyCondition::control);
std::string study_report_markdown(std::span<const StudyRecord> records,
                                  StudyCondition reference = StudyCondition::control);

}  // namespace vexsense
