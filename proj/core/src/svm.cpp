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
#include "vexsense/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "vexsense/digest.hpp"
#include "vexsense/error.hpp"
#include "vexsense/rng.hpp"

namespace vexsense {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTau = 1e-12;

double squared_distance(const Point2& a, const Point2& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

// Dual solver state. Follows the second-order working set selection of
// Fan, Chen and Lin; Q_ij = y_i y_j K_ij, G = Q alpha - e.
class SmoSolver {
 public:
  SmoSolver(std::span<const Point2> x, std::span<const int> y, double gamma, double c)
      : n_(x.size()), y_(y.begin(), y.end()), c_(c), kernel_(n_ * n_), alpha_(n_, 0.0), grad_(n_, -1.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      kernel_[i * n_ + i] = 1.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double k = gaussian_kernel(x[i], x[j], gamma);
        kernel_[i * n_ + j] = k;
        kernel_[j * n_ + i] = k;
      }
    }
  }

  TrainingDiagnostics solve(double tolerance, std::size_t max_iter) {
    TrainingDiagnostics diag;
    std::size_t iter = 0;
    for (;;) {
      std::size_t i = 0;
      std::size_t j = 0;
      double gap = 0.0;
      if (!select_working_set(tolerance, i, j, gap)) {
        // Re-derive the gradient from scratch so accumulated rounding cannot
        // mask a remaining violation.
        recompute_gradient();
        if (!select_working_set(tolerance, i, j, gap)) {
          diag.kkt_gap = gap;
          break;
        }
      }
      if (iter >= max_iter) {
        std::ostringstream msg;
        msg << "SMO did not converge within " << max_iter << " iterations (KKT gap " << gap << ", tolerance "
            << tolerance << ")";
        throw ConvergenceError(msg.str(), iter, gap);
      }
      update_pair(i, j);
      ++iter;
    }
    diag.iterations = iter;
    for (std::size_t t = 0; t < n_; ++t) {
      if (alpha_[t] <= 0.0) continue;
      if (alpha_[t] >= c_) {
        ++diag.bounded_support_vectors;
      } else {
        ++diag.free_support_vectors;
      }
    }
    return diag;
  }

  /// Offset rho of the decision function sum alpha_i y_i K - rho.
  double rho() const {
    double upper = kInf;
    double lower = -kInf;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (at_upper(t)) {
        if (y_[t] < 0) {
          upper = std::min(upper, yg);
        } else {
          lower = std::max(lower, yg);
        }
      } else if (at_lower(t)) {
        if (y_[t] > 0) {
          upper = std::min(upper, yg);
        } else {
          lower = std::max(lower, yg);
        }
      } else {
        ++free_count;
        free_sum += yg;
      }
    }
    return free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);
  }

  const std::vector<double>& alpha() const noexcept { return alpha_; }

 private:
  bool at_upper(std::size_t t) const noexcept { return alpha_[t] >= c_; }
  bool at_lower(std::size_t t) const noexcept { return alpha_[t] <= 0.0; }
  double q(std::size_t i, std::size_t j) const noexcept { return y_[i] * y_[j] * kernel_[i * n_ + j]; }

  void recompute_gradient() {
    for (std::size_t i = 0; i < n_; ++i) {
      double g = -1.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (alpha_[j] != 0.0) g += q(i, j) * alpha_[j];
      }
      grad_[i] = g;
    }
  }

  // Returns false when the current point is optimal within tolerance.
  bool select_working_set(double tolerance, std::size_t& out_i, std::size_t& out_j, double& gap) const {
    double gmax = -kInf;
    std::size_t gmax_idx = n_;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] > 0) {
        if (!at_upper(t) && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          gmax_idx = t;
        }
      } else if (!at_lower(t) && grad_[t] >= gmax) {
        gmax = grad_[t];
        gmax_idx = t;
      }
    }
    double gmax2 = -kInf;
    std::size_t gmin_idx = n_;
    double best = kInf;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] > 0) {
        if (at_lower(t)) continue;
        gmax2 = std::max(gmax2, grad_[t]);
        const double diff = gmax + grad_[t];
        if (gmax_idx < n_ && diff > 0.0) {
          double quad = 2.0 - 2.0 * y_[gmax_idx] * q(gmax_idx, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            gmin_idx = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        gmax2 = std::max(gmax2, -grad_[t]);
        const double diff = gmax - grad_[t];
        if (gmax_idx < n_ && diff > 0.0) {
          double quad = 2.0 + 2.0 * y_[gmax_idx] * q(gmax_idx, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            gmin_idx = t;
          }
        }
      }
    }
    gap = gmax + gmax2;
    if (gap < tolerance || gmax_idx == n_ || gmin_idx == n_) return false;
    out_i = gmax_idx;
    out_j = gmin_idx;
    return true;
  }

  void update_pair(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    const double qij = q(i, j);
    if (y_[i] != y_[j]) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > c_) {
          ai = c_;
          aj = c_ - diff;
        }
      } else if (aj > c_) {
        aj = c_;
        ai = c_ + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) {
          ai = c_;
          aj = sum - c_;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > c_) {
        if (aj > c_) {
          aj = c_;
          ai = sum - c_;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double di = ai - old_i;
    const double dj = aj - old_j;
    for (std::size_t k = 0; k < n_; ++k) grad_[k] += q(i, k) * di + q(j, k) * dj;
  }

  std::size_t n_;
  std::vector<int> y_;
  double c_;
  std::vector<double> kernel_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
};

std::vector<std::vector<std::size_t>> indices_by_class(std::span<const LabeledSample> data) {
  std::vector<std::vector<std::size_t>> classes(2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    classes[data[i].label == ContactLabel::contact ? 0 : 1].push_back(i);
  }
  return classes;
}

std::vector<LabeledSample> gather(std::span<const LabeledSample> data, std::span<const std::size_t> idx) {
  std::vector<LabeledSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data[i]);
  return out;
}

bool has_both_classes(std::span<const LabeledSample> data) {
  bool pos = false;
  bool neg = false;
  for (const auto& s : data) (s.label == ContactLabel::contact ? pos : neg) = true;
  return pos && neg;
}

}  // namespace

double gaussian_kernel(const Point2& a, const Point2& b, double gamma) noexcept {
  return std::exp(-gamma * squared_distance(a, b));
}

FeatureScaler FeatureScaler::fit(std::span<const LabeledSample> data) {
  FeatureScaler s;
  if (data.empty()) return s;
  const double n = static_cast<double>(data.size());
  for (const auto& d : data) {
    const Point2 p = to_point(d.features);
    s.mean[0] += p[0];
    s.mean[1] += p[1];
  }
  s.mean[0] /= n;
  s.mean[1] /= n;
  Point2 var{0.0, 0.0};
  for (const auto& d : data) {
    const Point2 p = to_point(d.features);
    var[0] += (p[0] - s.mean[0]) * (p[0] - s.mean[0]);
    var[1] += (p[1] - s.mean[1]) * (p[1] - s.mean[1]);
  }
  for (int k = 0; k < 2; ++k) {
    const double sd = std::sqrt(var[k] / n);
    s.scale[k] = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
  }
  return s;
}

Point2 FeatureScaler::apply(const FeatureVector& f) const noexcept {
  const Point2 p = to_point(f);
  return {(p[0] - mean[0]) / scale[0], (p[1] - mean[1]) / scale[1]};
}

std::string_view to_string(GammaHeuristic h) noexcept {
  return h == GammaHeuristic::median_pairwise ? "median_pairwise" : "median_opposite_class";
}

GammaHeuristic gamma_heuristic_from_string(std::string_view text) {
  if (text == "median_pairwise") return GammaHeuristic::median_pairwise;
  if (text == "median_opposite_class") return GammaHeuristic::median_opposite_class;
  throw InvalidParameter("unknown gamma heuristic '" + std::string(text) + "'");
}

void SvmParams::validate() const {
  if (gamma && !(std::isfinite(*gamma) && *gamma > 0.0)) throw InvalidParameter("svm gamma must be positive");
  if (!(std::isfinite(c) && c > 0.0)) throw InvalidParameter("svm C must be positive");
  if (!(std::isfinite(tolerance) && tolerance > 0.0)) throw InvalidParameter("svm tolerance must be positive");
  if (max_iter == 0) throw InvalidParameter("svm max_iter must be positive");
}

double select_gamma(std::span<const Point2> points, std::span<const int> labels, GammaHeuristic heuristic) {
  std::vector<double> distances;
  if (heuristic == GammaHeuristic::median_pairwise) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) distances.push_back(std::sqrt(squared_distance(points[i], points[j])));
    }
  } else {
    for (std::size_t i = 0; i < points.size(); ++i) {
      double nearest = kInf;
      for (std::size_t j = 0; j < points.size(); ++j) {
        if (labels[i] != labels[j]) nearest = std::min(nearest, squared_distance(points[i], points[j]));
      }
      if (std::isfinite(nearest)) distances.push_back(std::sqrt(nearest));
    }
  }
  const double m = median(std::move(distances));
  // Degenerate spread (all points coincide): fall back to 1 / (2 * dims).
  if (!(m > 0.0) || !std::isfinite(m)) return 0.25;
  return 1.0 / (2.0 * m * m);
}

SvmModel::SvmModel(std::vector<Point2> support_vectors, std::vector<double> dual_coefficients, double bias,
                   double gamma, double c, FeatureScaler scaler, std::string corpus_digest,
                   TrainingDiagnostics diagnostics)
    : support_vectors_(std::move(support_vectors)),
      dual_coefficients_(std::move(dual_coefficients)),
      bias_(bias),
      gamma_(gamma),
      c_(c),
      scaler_(scaler),
      corpus_digest_(std::move(corpus_digest)),
      diagnostics_(diagnostics) {
  if (support_vectors_.size() != dual_coefficients_.size()) {
    throw InvalidInput("svm model: support vector and coefficient counts differ");
  }
  if (!(gamma_ > 0.0) || !(c_ > 0.0)) throw InvalidInput("svm model: gamma and C must be positive");
  for (double coef : dual_coefficients_) {
    const double a = std::abs(coef);
    if (!(a > 0.0) || a > c_) throw InvalidInput("svm model: |dual coefficient| must lie in (0, C]");
  }
}

double SvmModel::decision_score_scaled(const Point2& z) const noexcept {
  double score = bias_;
  for (std::size_t i = 0; i < support_vectors_.size(); ++i) {
    score += dual_coefficients_[i] * gaussian_kernel(support_vectors_[i], z, gamma_);
  }
  return score;
}

double SvmModel::decision_score(const FeatureVector& x) const noexcept {
  return decision_score_scaled(scaler_.apply(x));
}

Prediction predict(const SvmModel& model, const FeatureVector& x) {
  const double score = model.decision_score(x);
  return Prediction{score > 0.0 ? ContactLabel::contact : ContactLabel::no_contact, score};
}

TrainingResult train_detailed(std::span<const LabeledSample> data, const SvmParams& params) {
  params.validate();
  if (data.empty()) throw TrainingError("cannot train on an empty dataset");
  if (!has_both_classes(data)) throw TrainingError("training data must contain both contact and no_contact samples");
  for (const auto& s : data) {
    if (!std::isfinite(s.features.relative_average_pressure_pa) ||
        !std::isfinite(s.features.pressure_change_from_prior_pa)) {
      throw TrainingError("training sample '" + s.scenario_id + "' has non-finite features");
    }
  }

  const FeatureScaler scaler = FeatureScaler::fit(data);
  std::vector<Point2> z;
  std::vector<int> y;
  z.reserve(data.size());
  y.reserve(data.size());
  for (const auto& s : data) {
    z.push_back(scaler.apply(s.features));
    y.push_back(sign_of(s.label));
  }
  const double gamma = params.gamma ? *params.gamma : select_gamma(z, y, params.heuristic);

  SmoSolver solver(z, y, gamma, params.c);
  const TrainingDiagnostics diag = solver.solve(params.tolerance, params.max_iter);
  const double bias = -solver.rho();

  std::vector<Point2> sv;
  std::vector<double> coef;
  const auto& alpha = solver.alpha();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 0.0) {
      sv.push_back(z[i]);
      coef.push_back(alpha[i] * y[i]);
    }
  }
  SvmModel model(std::move(sv), std::move(coef), bias, gamma, params.c, scaler, corpus_digest(data), diag);
  return TrainingResult{std::move(model), alpha, std::move(z)};
}

SvmModel train(std::span<const LabeledSample> data, const SvmParams& params) {
  return train_detailed(data, params).model;
}

std::string corpus_digest(std::span<const LabeledSample> data) {
  std::string buffer;
  char line[96];
  for (const auto& s : data) {
    std::snprintf(line, sizeof line, "%a %a %d\n", s.features.relative_average_pressure_pa,
                  s.features.pressure_change_from_prior_pa, sign_of(s.label));
    buffer += line;
  }
  return sha256_hex(buffer);
}

EvaluationScore evaluate(const SvmModel& model, std::span<const LabeledSample> data) {
  EvaluationScore score;
  for (const auto& s : data) {
    score.counts.add(s.label == ContactLabel::contact, predict(model, s.features).label == ContactLabel::contact);
  }
  if (score.counts.total() > 0) {
    score.accuracy = static_cast<double>(score.counts.correct()) / static_cast<double>(score.counts.total());
  }
  score.f1 = f_beta(score.counts, 1.0);
  return score;
}

CrossValidationResult cross_validate(std::span<const LabeledSample> data, std::size_t k_folds,
                                     const SvmParams& params, std::uint64_t seed) {
  if (k_folds < 2) throw InvalidParameter("cross-validation needs at least 2 folds");
  if (data.size() < k_folds) throw InvalidParameter("cross-validation needs at least as many samples as folds");

  // Stratified assignment: shuffle each class, then deal samples round-robin,
  // continuing the deal across classes so fold sizes differ by at most one.
  Rng rng(derive_seed(seed, 0xcf));
  std::vector<std::size_t> fold_of(data.size());
  std::size_t dealt = 0;
  for (auto& members : indices_by_class(data)) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) fold_of[idx] = dealt++ % k_folds;
  }

  CrossValidationResult result;
  for (std::size_t fold = 0; fold < k_folds; ++fold) {
    std::vector<LabeledSample> train_set;
    std::vector<LabeledSample> test_set;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == fold ? test_set : train_set).push_back(data[i]);
    FoldResult fr;
    fr.fold = fold;
    fr.train_size = train_set.size();
    fr.test_size = test_set.size();
    if (!has_both_classes(train_set) || test_set.empty()) {
      fr.skipped = true;
      result.warnings.push_back("fold " + std::to_string(fold) +
                                " skipped: training part holds a single class or the test part is empty");
      result.folds.push_back(fr);
      continue;
    }
    const SvmModel model = train(train_set, params);
    fr.score = evaluate(model, test_set);
    result.pooled += fr.score.counts;
    result.folds.push_back(fr);
  }
  if (result.pooled.total() == 0) throw TrainingError("cross-validation: every fold was skipped");
  result.classification_loss =
      static_cast<double>(result.pooled.errors()) / static_cast<double>(result.pooled.total());
  result.accuracy = 1.0 - result.classification_loss;
  result.f1 = f_beta(result.pooled, 1.0);
  return result;
}

SplitEvaluation split_evaluate(std::span<const LabeledSample> data, const SvmParams& params, double train_fraction,
                               std::size_t repeats, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidParameter("train fraction must lie in (0, 1)");
  if (repeats == 0) throw InvalidParameter("split evaluation needs at least one repeat");
  const auto classes = indices_by_class(data);
  if (classes[0].size() < 2 || classes[1].size() < 2) {
    throw TrainingError("split evaluation needs at least two samples of each class");
  }

  SplitEvaluation result;
  double accuracy_sum = 0.0;
  double f1_sum = 0.0;
  std::size_t f1_count = 0;
  for (std::size_t r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(seed, 0x5b, r));
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (auto members : classes) {
      rng.shuffle(std::span<std::size_t>(members));
      const auto n = members.size();
      auto take = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
      take = std::clamp<std::size_t>(take, 1, n - 1);
      train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
      test_idx.insert(test_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    const auto train_set = gather(data, train_idx);
    const auto test_set = gather(data, test_idx);
    SplitRepeat rep;
    rep.train_size = train_set.size();
    rep.test_size = test_set.size();
    rep.score = evaluate(train(train_set, params), test_set);
    accuracy_sum += rep.score.accuracy;
    if (rep.score.f1.value) {
      f1_sum += *rep.score.f1.value;
      ++f1_count;
    } else {
      result.warnings.push_back("repeat " + std::to_string(r) + ": F1 undefined (" + rep.score.f1.reason + ")");
    }
    result.repeats.push_back(rep);
  }
  result.mean_accuracy = accuracy_sum / static_cast<double>(repeats);
  result.mean_f1 = f1_count > 0 ? f1_sum / static_cast<double>(f1_count) : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace vexsense
