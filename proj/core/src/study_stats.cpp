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
#include "vexsense/study_stats.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

constexpr StudyCondition kAllConditions[] = {StudyCondition::control, StudyCondition::declarative,
                                             StudyCondition::sensing};

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double chi_squared_survival(double x, std::size_t df) {
  if (!(x > 0.0)) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, x));
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cols;
  for (;;) {
    const auto comma = line.find(',');
    cols.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cols;
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace

std::string_view to_string(StudyCondition condition) noexcept {
  switch (condition) {
    case StudyCondition::control: return "control";
    case StudyCondition::declarative: return "declarative";
    case StudyCondition::sensing: return "sensing";
  }
  return "control";
}

StudyCondition study_condition_from_string(std::string_view text) {
  for (auto c : kAllConditions) {
    if (text == to_string(c)) return c;
  }
  throw InvalidInput("unknown study condition '" + std::string(text) + "'");
}

std::string_view to_string(OddsRatioMethod method) noexcept {
  return method == OddsRatioMethod::woolf_2x2 ? "woolf_2x2" : "logistic_wald";
}

void write_study_csv(std::ostream& out, std::span<const StudyRecord> records) {
  out << "user_id,condition,actual,estimated,trial_id\n";
  for (const auto& r : records) {
    if ((r.user_id + r.trial_id).find_first_of(",\n\r") != std::string::npos) {
      throw InvalidInput("study record ids must not contain CSV delimiters");
    }
    out << r.user_id << ',' << to_string(r.condition) << ',' << to_string(r.actual) << ',' << to_string(r.estimated)
        << ',' << r.trial_id << '\n';
  }
}

std::vector<StudyRecord> read_study_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("study csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user_id,condition,actual,estimated,trial_id") {
    throw InvalidInput("unexpected study csv header '" + line + "'");
  }
  std::vector<StudyRecord> records;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 5) throw InvalidInput("study csv line " + std::to_string(number) + ": expected 5 columns");
    if (cols[0].empty()) throw InvalidInput("study csv line " + std::to_string(number) + ": empty user_id");
    records.push_back(StudyRecord{std::string(cols[0]), study_condition_from_string(cols[1]),
                                  contact_label_from_string(cols[2]), contact_label_from_string(cols[3]),
                                  std::string(cols[4])});
  }
  return records;
}

std::vector<StudyRecord> load_study_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_study_csv(in);
}

std::vector<StudyRecord> records_from_counts(StudyCondition condition, const ConfusionCounts& counts,
                                             const std::string& user_id, const std::string& trial_prefix) {
  std::vector<StudyRecord> out;
  const std::string prefix = trial_prefix.empty() ? std::string(to_string(condition)) : trial_prefix;
  auto emit = [&](std::uint64_t n, ContactLabel actual, ContactLabel estimated) {
    for (std::uint64_t i = 0; i < n; ++i) {
      out.push_back({user_id, condition, actual, estimated, prefix + "-" + std::to_string(out.size())});
    }
  };
  emit(counts.tp, ContactLabel::contact, ContactLabel::contact);
  emit(counts.fn, ContactLabel::contact, ContactLabel::no_contact);
  emit(counts.fp, ContactLabel::no_contact, ContactLabel::contact);
  emit(counts.tn, ContactLabel::no_contact, ContactLabel::no_contact);
  return out;
}

std::string format_percent(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return "n/a";
  return fixed(100.0 * static_cast<double>(part) / static_cast<double>(whole), 1);
}

std::string ConditionSummary::formatted_error_rate() const {
  return std::to_string(counts.errors()) + "/" + std::to_string(counts.total()) + " (" +
         format_percent(counts.errors(), counts.total()) + "%)";
}

ConditionSummary condition_confusion(std::span<const StudyRecord> records, StudyCondition condition) {
  ConditionSummary summary;
  summary.condition = condition;
  for (const auto& r : records) {
    if (r.condition != condition) continue;
    summary.counts.add(r.actual == ContactLabel::contact, r.estimated == ContactLabel::contact);
  }
  if (summary.counts.total() == 0) {
    throw InvalidInput("no study records for condition '" + std::string(to_string(condition)) + "'");
  }
  summary.error_rate = static_cast<double>(summary.counts.errors()) / static_cast<double>(summary.counts.total());
  return summary;
}

GroupOutcome outcome_of(const ConditionSummary& summary) noexcept {
  return GroupOutcome{summary.counts.correct(), summary.counts.errors()};
}

OddsRatioResult odds_ratio_2x2(GroupOutcome a, GroupOutcome b, ZeroCellPolicy policy, double z_critical) {
  if (a.correct + a.incorrect == 0 || b.correct + b.incorrect == 0) {
    throw InvalidInput("odds ratio: both groups need at least one observation");
  }
  double cells[4] = {static_cast<double>(a.correct), static_cast<double>(a.incorrect),
                     static_cast<double>(b.correct), static_cast<double>(b.incorrect)};
  OddsRatioResult r;
  r.method = OddsRatioMethod::woolf_2x2;
  if (std::any_of(std::begin(cells), std::end(cells), [](double c) { return c == 0.0; })) {
    if (policy == ZeroCellPolicy::reject) {
      throw InvalidInput("odds ratio: zero cell and the Haldane-Anscombe correction is disabled");
    }
    for (double& c : cells) c += 0.5;
    r.corrected = true;
  }
  const double log_or = std::log(cells[0] / cells[1]) - std::log(cells[2] / cells[3]);
  const double se = std::sqrt(1.0 / cells[0] + 1.0 / cells[1] + 1.0 / cells[2] + 1.0 / cells[3]);
  r.odds_ratio = (cells[0] / cells[1]) / (cells[2] / cells[3]);
  r.log_standard_error = se;
  r.ci_low = std::exp(log_or - z_critical * se);
  r.ci_high = std::exp(log_or + z_critical * se);
  r.p_value = two_sided_normal_p(log_or / se);
  return r;
}

LogisticWaldResult logistic_wald(std::span<const StudyRecord> records, StudyCondition reference,
                                 std::size_t max_iter, double tolerance, double z_critical) {
  LogisticWaldResult result;
  result.reference = reference;

  std::vector<StudyCondition> present;
  for (auto c : kAllConditions) {
    if (std::any_of(records.begin(), records.end(), [c](const StudyRecord& r) { return r.condition == c; })) {
      present.push_back(c);
    }
  }
  if (std::find(present.begin(), present.end(), reference) == present.end()) {
    throw InvalidInput("logistic regression: no records for the reference condition");
  }
  if (present.size() < 2) throw InvalidInput("logistic regression needs at least two conditions");
  std::vector<StudyCondition> levels;
  for (auto c : present) {
    if (c != reference) levels.push_back(c);
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  const auto p = static_cast<Eigen::Index>(levels.size() + 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (r.condition == levels[k]) x(i, static_cast<Eigen::Index>(k + 1)) = 1.0;
    }
    y(i) = r.correct() ? 1.0 : 0.0;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd information(p, p);
  std::ostringstream diag;
  for (result.iterations = 0; result.iterations < max_iter;) {
    const Eigen::VectorXd eta = x * beta;
    const Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const Eigen::VectorXd w = mu.unaryExpr([](double m) { return std::max(m * (1.0 - m), 1e-300); });
    information = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    const Eigen::LDLT<Eigen::MatrixXd> solver(information);
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
      diag << "information matrix is singular at iteration " << result.iterations << "; ";
      break;
    }
    const Eigen::VectorXd step = solver.solve(score);
    beta += step;
    ++result.iterations;
    if (step.lpNorm<Eigen::Infinity>() < tolerance) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged && result.iterations >= max_iter) {
    diag << "IRLS did not converge in " << max_iter << " iterations; ";
  }
  if (beta.lpNorm<Eigen::Infinity>() > 20.0) {
    result.separation = true;
    diag << "coefficients diverge (|beta| > 20): a condition has (quasi-)complete separation; ";
  }

  const Eigen::VectorXd eta = x * beta;
  const Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
  information = x.transpose() * mu.cwiseProduct(Eigen::VectorXd::Ones(n) - mu).asDiagonal() * x;
  const Eigen::MatrixXd covariance = information.inverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::clamp(mu(i), 1e-300, 1.0 - 1e-16);
    result.log_likelihood += y(i) > 0.5 ? std::log(m) : std::log1p(-m);
  }

  for (Eigen::Index k = 0; k < p; ++k) {
    LogisticCoefficient c;
    c.term = k == 0 ? "intercept" : "condition[" + std::string(to_string(levels[static_cast<std::size_t>(k - 1)])) + "]";
    c.estimate = beta(k);
    c.standard_error = std::sqrt(covariance(k, k));
    c.wald_z = c.estimate / c.standard_error;
    c.p_value = two_sided_normal_p(c.wald_z);
    result.coefficients.push_back(c);
    if (k == 0) continue;
    OddsRatioResult or_result;
    or_result.method = OddsRatioMethod::logistic_wald;
    or_result.odds_ratio = std::exp(c.estimate);
    or_result.ci_low = std::exp(c.estimate - z_critical * c.standard_error);
    or_result.ci_high = std::exp(c.estimate + z_critical * c.standard_error);
    or_result.p_value = c.p_value;
    or_result.log_standard_error = c.standard_error;
    result.effects.push_back({levels[static_cast<std::size_t>(k - 1)], or_result});
  }

  const Eigen::Index q = p - 1;
  const Eigen::VectorXd b = beta.tail(q);
  const Eigen::MatrixXd v = covariance.bottomRightCorner(q, q);
  result.wald_chi2 = b.dot(v.ldlt().solve(b));
  result.degrees_of_freedom = static_cast<std::size_t>(q);
  result.p_value = chi_squared_survival(result.wald_chi2, result.degrees_of_freedom);
  if (result.converged && !result.separation) diag << "converged in " << result.iterations << " iterations";
  result.diagnostics = diag.str();
  return result;
}

nlohmann::json study_report_json(std::span<const StudyRecord> records, StudyCondition reference) {
  nlohmann::json conditions = nlohmann::json::array();
  std::vector<ConditionSummary> summaries;
  for (auto c : kAllConditions) {
    if (std::none_of(records.begin(), records.end(), [c](const StudyRecord& r) { return r.condition == c; })) continue;
    const auto s = condition_confusion(records, c);
    summaries.push_back(s);
    const auto total = s.counts.total();
    auto cell = [total](std::uint64_t n) { return nlohmann::json{{"count", n}, {"percent", format_percent(n, total)}}; };
    conditions.push_back({{"condition", to_string(c)},
                          {"cells",
                           {{"actual_contact_estimated_contact", cell(s.counts.tp)},
                            {"actual_contact_estimated_no_contact", cell(s.counts.fn)},
                            {"actual_no_contact_estimated_contact", cell(s.counts.fp)},
                            {"actual_no_contact_estimated_no_contact", cell(s.counts.tn)}}},
                          {"combined_error_rate",
                           {{"errors", s.counts.errors()},
                            {"total", total},
                            {"rate", s.error_rate},
                            {"formatted", s.formatted_error_rate()}}}});
  }

  nlohmann::json odds = nlohmann::json::array();
  const auto ref_it = std::find_if(summaries.begin(), summaries.end(),
                                   [reference](const ConditionSummary& s) { return s.condition == reference; });
  nlohmann::json logistic_json = nullptr;
  if (ref_it != summaries.end() && summaries.size() >= 2) {
    const auto logistic = logistic_wald(records, reference);
    for (const auto& s : summaries) {
      if (s.condition == reference) continue;
      const auto woolf = odds_ratio_2x2(outcome_of(s), outcome_of(*ref_it));
      nlohmann::json entry = {{"condition", to_string(s.condition)},
                              {"reference", to_string(reference)},
                              {"woolf_2x2",
                               {{"odds_ratio", woolf.odds_ratio},
                                {"ci_low", woolf.ci_low},
                                {"ci_high", woolf.ci_high},
                                {"p_value", woolf.p_value},
                                {"corrected", woolf.corrected},
                                {"formatted", fixed(woolf.odds_ratio, 2) + " [" + fixed(woolf.ci_low, 2) + ", " +
                                                  fixed(woolf.ci_high, 2) + "]"}}}};
      for (const auto& e : logistic.effects) {
        if (e.condition != s.condition) continue;
        entry["logistic_wald"] = {{"odds_ratio", e.odds_ratio.odds_ratio},
                                  {"ci_low", e.odds_ratio.ci_low},
                                  {"ci_high", e.odds_ratio.ci_high},
                                  {"p_value", e.odds_ratio.p_value}};
      }
      odds.push_back(entry);
    }
    logistic_json = {{"model", "fixed-effects logistic regression, correct ~ condition"},
                     {"wald_chi2", logistic.wald_chi2},
                     {"df", logistic.degrees_of_freedom},
                     {"p_value", logistic.p_value},
                     {"log_likelihood", logistic.log_likelihood},
                     {"iterations", logistic.iterations},
                     {"converged", logistic.converged},
                     {"separation", logistic.separation},
                     {"diagnostics", logistic.diagnostics}};
  }
  return {{"schema", "vexsense.study_report/v1"},
          {"records", records.size()},
          {"conditions", conditions},
          {"odds_ratios", odds},
          {"logistic", logistic_json},
          {"notes",
           {"Odds ratios compare the odds of a correct declaration with the reference condition.",
            "Intervals and p-values come from a fixed-effects model with no per-user random effect; point estimates "
            "match a mixed-effects fit with a null user effect, but its adjusted intervals will differ."}}};
}

std::string study_report_markdown(std::span<const StudyRecord> records, StudyCondition reference) {
  const auto doc = study_report_json(records, reference);
  std::ostringstream out;
  out << "| Condition | Actual | Est. contact | Est. no contact | Combined error rate | Odds ratio [95% CI], p |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& c : doc["conditions"]) {
    const auto& cells = c["cells"];
    std::string odds_text = "reference";
    for (const auto& o : doc["odds_ratios"]) {
      if (o["condition"] == c["condition"]) {
        odds_text = o["woolf_2x2"]["formatted"].get<std::string>() + ", p=" +
                    fixed(o["woolf_2x2"]["p_value"].get<double>(), 3);
      }
    }
    auto cell = [](const nlohmann::json& j) {
      return std::to_string(j["count"].get<std::uint64_t>()) + " (" + j["percent"].get<std::string>() + "%)";
    };
    out << "| " << c["condition"].get<std::string>() << " | contact | " << cell(cells["actual_contact_estimated_contact"])
        << " | " << cell(cells["actual_contact_estimated_no_contact"]) << " | "
        << c["combined_error_rate"]["formatted"].get<std::string>() << " | " << odds_text << " |\n";
    out << "| | no contact | " << cell(cells["actual_no_contact_estimated_contact"]) << " | "
        << cell(cells["actual_no_contact_estimated_no_contact"]) << " | | |\n";
  }
  if (!doc["logistic"].is_null()) {
    out << "\nJoint Wald test of condition: chi2 = " << fixed(doc["logistic"]["wald_chi2"].get<double>(), 2)
        << " (df " << doc["logistic"]["df"].get<std::size_t>() << "), p = "
        << fixed(doc["logistic"]["p_value"].get<double>(), 4) << "\n";
  }
  for (const auto& note : doc["notes"]) out << "\n_" << note.get<std::string>() << "_\n";
  return out.str();
}

}  // namespace vexsense
