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

// Soft-margin support vector machine with a Gaussian kernel, trained in the
// dual by sequential minimal optimization.
//
// Decision function on standardized inputs z = (x - mean) / scale:
//   f(z) = sum_i coef_i exp(-gamma |s_i - z|^2) + bias,  coef_i = alpha_i y_i
// and the predicted label is contact iff f(z) > 0.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexsense/features.hpp"
#include "vexsense/metrics.hpp"

namespace vexsense {

using Point2 = std::array<double, 2>;

inline Point2 to_point(const FeatureVector& f) noexcept {
  return {f.relative_average_pressure_pa, f.pressure_change_from_prior_pa};
}

/// exp(-gamma |a - b|^2)
double gaussian_kernel(const Point2& a, const Point2& b, double gamma) noexcept;

/// Per-feature standardization fitted on a training set.
struct FeatureScaler {
  Point2 mean{0.0, 0.0};
  Point2 scale{1.0, 1.0};

  /// Population mean and standard deviation; a zero deviation maps to scale 1.
  static FeatureScaler fit(std::span<const LabeledSample> data);
  Point2 apply(const FeatureVector& f) const noexcept;

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;
};

enum class GammaHeuristic {
  /// gamma = 1 / (2 m^2), m = median distance over all sample pairs.
  median_pairwise,
  /// gamma = 1 / (2 m^2), m = median over samples of the distance to the
  /// nearest sample of the other class.
  median_opposite_class,
};

std::string_view to_string(GammaHeuristic h) noexcept;
GammaHeuristic gamma_heuristic_from_string(std::string_view text);

struct SvmParams {
  /// Unset: chosen by \c heuristic on the standardized training data.
  std::optional<double> gamma;
  GammaHeuristic heuristic = GammaHeuristic::median_opposite_class;
  double c = 1.0;
  /// Stopping threshold on the maximal KKT violation m(alpha) - M(alpha).
  double tolerance = 1e-8;
  std::size_t max_iter = 10'000'000;

  void validate() const;
};

/// Gamma chosen by \p heuristic for already standardized points.
double select_gamma(std::span<const Point2> points, std::span<const int> labels, GammaHeuristic heuristic);

struct TrainingDiagnostics {
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  std::size_t free_support_vectors = 0;
  std::size_t bounded_support_vectors = 0;
};

class SvmModel {
 public:
  SvmModel(std::vector<Point2> support_vectors, std::vector<double> dual_coefficients, double bias, double gamma,
           double c, FeatureScaler scaler, std::string corpus_digest, TrainingDiagnostics diagnostics = {});

  /// Raw (unscaled) feature input.
  double decision_score(const FeatureVector& x) const noexcept;
  double decision_score_scaled(const Point2& z) const noexcept;

  const std::vector<Point2>& support_vectors() const noexcept { return support_vectors_; }
  const std::vector<double>& dual_coefficients() const noexcept { return dual_coefficients_; }
  double bias() const noexcept { return bias_; }
  double gamma() const noexcept { return gamma_; }
  double c() const noexcept { return c_; }
  const FeatureScaler& scaler() const noexcept { return scaler_; }
  const std::string& corpus_digest() const noexcept { return corpus_digest_; }
  const TrainingDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Point2> support_vectors_;
  std::vector<double> dual_coefficients_;
  double bias_;
  double gamma_;
  double c_;
  FeatureScaler scaler_;
  std::string corpus_digest_;
  TrainingDiagnostics diagnostics_;
};

struct Prediction {
  ContactLabel label = ContactLabel::no_contact;
  double decision_score = 0.0;
};

/// A score of exactly zero is classified no_contact.
Prediction predict(const SvmModel& model, const FeatureVector& x);

/// Trained model plus the optimal dual variables for every training sample
/// (in input order) and the standardized inputs they refer to.
struct TrainingResult {
  SvmModel model;
  std::vector<double> alpha;
  std::vector<Point2> scaled_inputs;
};

/// Throws TrainingError for empty or single-class data and ConvergenceError
/// when max_iter is exhausted.
TrainingResult train_detailed(std::span<const LabeledSample> data, const SvmParams& params = {});
SvmModel train(std::span<const LabeledSample> data, const SvmParams& params = {});

/// SHA-256 over the exact bit patterns and labels of a corpus.
std::string corpus_digest(std::span<const LabeledSample> data);

struct EvaluationScore {
  ConfusionCounts counts;
  double accuracy = 0.0;
  MetricValue f1;
};

EvaluationScore evaluate(const SvmModel& model, std::span<const LabeledSample> data);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  bool skipped = false;
  EvaluationScore score;
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  ConfusionCounts pooled;
  double accuracy = 0.0;
  MetricValue f1;
  /// Misclassified fraction over every tested sample.
  double classification_loss = 0.0;
  std::vector<std::string> warnings;
};

/// Stratified k-fold cross-validation. Folds whose training part holds a
/// single class are skipped and reported in \c warnings.
CrossValidationResult cross_validate(std::span<const LabeledSample> data, std::size_t k_folds,
                                     const SvmParams& params, std::uint64_t seed);

struct SplitRepeat {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  EvaluationScore score;
};

struct SplitEvaluation {
  std::vector<SplitRepeat> repeats;
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;
  std::vector<std::string> warnings;
};

/// Repeated stratified random train/test splits.
SplitEvaluation split_evaluate(std::span<const LabeledSample> data, const SvmParams& params,
                               double train_fraction = 0.303, std::size_t repeats = 10, std::uint64_t seed = 0);

// Serialization (svm_io.cpp).

inline constexpr const char* kModelFormat = "vexsense.svm_model";
inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& doc);
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);
/// SHA-256 of the canonical JSON serialization.
std::string model_digest(const SvmModel& model);

}  // namespace vexsense
