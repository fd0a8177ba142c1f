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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support/qp_oracle.hpp"
#include "vexsense/bench.hpp"
#include "vexsense/error.hpp"
#include "vexsense/rng.hpp"

namespace vexsense {
namespace {

LabeledSample sample(double a, double b, ContactLabel l, std::string id = {}) { return {{a, b}, l, std::move(id)}; }

std::vector<LabeledSample> random_set(Rng& rng, std::size_t n) {
  std::vector<LabeledSample> data;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    data.push_back(sample(rng.normal(pos ? 1.0 : -1.0, 1.2), rng.normal(pos ? 0.5 : -0.5, 1.0),
                          pos ? ContactLabel::contact : ContactLabel::no_contact));
  }
  return data;
}

std::vector<int> signs(std::span<const LabeledSample> data) {
  std::vector<int> y;
  for (const auto& s : data) y.push_back(sign_of(s.label));
  return y;
}

TEST(GaussianKernel, ClosedForms) {
  EXPECT_EQ(gaussian_kernel({0.3, -2.0}, {0.3, -2.0}, 7.0), 1.0);
  EXPECT_NEAR(gaussian_kernel({0, 0}, {1, 0}, 1.0), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(gaussian_kernel({0, 0}, {1, 0}, 1.0), 0.367879, 1e-6);
  EXPECT_EQ(gaussian_kernel({1, 2}, {-3, 0.5}, 0.4), gaussian_kernel({-3, 0.5}, {1, 2}, 0.4));
}

TEST(GramMatrix, PositiveSemiDefinite) {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Point2> x(20);
    for (auto& p : x) p = {rng.normal(), rng.normal()};
    EXPECT_GE(testing::min_gram_eigenvalue(x, rng.uniform(0.05, 5.0)), -1e-8);
  }
}

TEST(FeatureScaler, PopulationStatistics) {
  const std::vector<LabeledSample> d{sample(1, 10, ContactLabel::contact), sample(3, 10, ContactLabel::no_contact)};
  const auto s = FeatureScaler::fit(d);
  EXPECT_EQ(s.mean, (Point2{2.0, 10.0}));
  EXPECT_EQ(s.scale, (Point2{1.0, 1.0}));  // second column has zero spread
  EXPECT_EQ(s.apply({3, 12}), (Point2{1.0, 2.0}));
}

TEST(Train, SeparableFourPoints) {
  const std::vector<LabeledSample> d{sample(0, 0, ContactLabel::no_contact), sample(0, 1, ContactLabel::no_contact),
                                     sample(5, 0, ContactLabel::contact), sample(5, 1, ContactLabel::contact)};
  const auto m = train(d);
  for (const auto& s : d) EXPECT_EQ(predict(m, s.features).label, s.label);
}

TEST(Train, XorFourPoints) {
  const std::vector<LabeledSample> d{sample(0, 0, ContactLabel::no_contact), sample(1, 1, ContactLabel::no_contact),
                                     sample(0, 1, ContactLabel::contact), sample(1, 0, ContactLabel::contact)};
  SvmParams p;
  p.gamma = 1.0;
  p.c = 10.0;
  const auto m = train(d, p);
  for (const auto& s : d) EXPECT_EQ(predict(m, s.features).label, s.label);
}

TEST(Train, SingleClassRejected) {
  const std::vector<LabeledSample> d{sample(0, 0, ContactLabel::contact), sample(1, 1, ContactLabel::contact)};
  EXPECT_THROW(train(d), TrainingError);
  EXPECT_THROW(train(std::vector<LabeledSample>{}), TrainingError);
}

TEST(Train, IterationLimitReported) {
  Rng rng(5);
  const auto d = random_set(rng, 40);
  SvmParams p;
  p.max_iter = 1;
  p.c = 100;
  try {
    train(d, p);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 1u);
    EXPECT_GT(e.gap(), p.tolerance);
  }
}

TEST(Train, InvalidParamsRejected) {
  Rng rng(5);
  const auto d = random_set(rng, 10);
  SvmParams p;
  p.c = 0;
  EXPECT_THROW(train(d, p), InvalidParameter);
  p = {};
  p.gamma = -1;
  EXPECT_THROW(train(d, p), InvalidParameter);
}

TEST(Train, MatchesIndependentQpOracle) {
  Rng rng(2024);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_set(rng, 20);
    SvmParams p;
    p.gamma = rng.uniform(0.2, 2.0);
    p.c = rng.uniform(0.5, 10.0);
    const auto r = train_detailed(d, p);
    const auto y = signs(d);
    const auto oracle = testing::solve_dual_qp(r.scaled_inputs, y, r.model.gamma(), r.model.c());
    for (int q = 0; q < 30; ++q) {
      const Point2 z{rng.normal(0, 1.5), rng.normal(0, 1.5)};
      EXPECT_NEAR(r.model.decision_score_scaled(z),
                  testing::oracle_decision(oracle, r.scaled_inputs, y, r.model.gamma(), z), 1e-4);
    }
  }
}

TEST(Train, KktConditionsHold) {
  Rng rng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_set(rng, 30);
    SvmParams p;
    p.c = rng.uniform(0.5, 5.0);
    const auto r = train_detailed(d, p);
    double balance = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_GE(r.alpha[i], 0.0);
      EXPECT_LE(r.alpha[i], p.c);
      balance += r.alpha[i] * sign_of(d[i].label);
      const double margin = sign_of(d[i].label) * r.model.decision_score_scaled(r.scaled_inputs[i]);
      if (r.alpha[i] > 1e-9 && r.alpha[i] < p.c - 1e-9) {
        EXPECT_NEAR(margin, 1.0, 1e-6);
      }
      if (r.alpha[i] == 0.0) {
        EXPECT_GE(margin, 1.0 - 1e-6);
      }
      if (r.alpha[i] == p.c) {
        EXPECT_LE(margin, 1.0 + 1e-6);
      }
    }
    EXPECT_NEAR(balance, 0.0, 1e-6);
    for (double coef : r.model.dual_coefficients()) {
      EXPECT_GT(std::abs(coef), 0.0);
      EXPECT_LE(std::abs(coef), p.c);
    }
  }
}

TEST(Train, DeterministicAndOrderSensitiveDigest) {
  Rng rng(9);
  const auto d = random_set(rng, 20);
  const auto a = train(d), b = train(d);
  EXPECT_EQ(a.bias(), b.bias());
  EXPECT_EQ(a.dual_coefficients(), b.dual_coefficients());
  EXPECT_EQ(a.corpus_digest(), corpus_digest(d));
  auto swapped = d;
  std::swap(swapped[0], swapped[1]);
  EXPECT_NE(corpus_digest(swapped), corpus_digest(d));
}

TEST(Predict, ZeroScoreIsNoContact) {
  const SvmModel m({{0.0, 0.0}}, {1.0}, -1.0, 1.0, 1.0, FeatureScaler{}, "");
  const auto p = predict(m, {0.0, 0.0});
  EXPECT_EQ(p.decision_score, 0.0);
  EXPECT_EQ(p.label, ContactLabel::no_contact);
}

TEST(SvmModel, RejectsInconsistentCoefficients) {
  EXPECT_THROW(SvmModel({{0, 0}}, {}, 0, 1, 1, FeatureScaler{}, ""), InvalidInput);
  EXPECT_THROW(SvmModel({{0, 0}}, {2.0}, 0, 1, 1, FeatureScaler{}, ""), InvalidInput);
  EXPECT_THROW(SvmModel({{0, 0}}, {0.0}, 0, 1, 1, FeatureScaler{}, ""), InvalidInput);
  EXPECT_THROW(SvmModel({{0, 0}}, {1.0}, 0, 0, 1, FeatureScaler{}, ""), InvalidInput);
}

TEST(Predict, OffsetRetrainingGivesSameLabels) {
  Rng rng(31);
  const auto d = random_set(rng, 30);
  auto shifted = d;
  for (auto& s : shifted) {
    s.features.relative_average_pressure_pa += 1000.0;
    s.features.pressure_change_from_prior_pa -= 250.0;
  }
  const auto a = train(d), b = train(shifted);
  for (int q = 0; q < 100; ++q) {
    const FeatureVector x{rng.normal(0, 2), rng.normal(0, 2)};
    const FeatureVector xs{x.relative_average_pressure_pa + 1000.0, x.pressure_change_from_prior_pa - 250.0};
    EXPECT_EQ(predict(a, x).label, predict(b, xs).label);
  }
}

TEST(SelectGamma, MedianHeuristics) {
  const std::vector<Point2> x{{0, 0}, {1, 0}, {3, 0}};
  const std::vector<int> y{-1, -1, 1};
  // Pairwise distances 1, 2, 3: median 2.
  EXPECT_DOUBLE_EQ(select_gamma(x, y, GammaHeuristic::median_pairwise), 1.0 / 8.0);
  // Nearest opposite-class distances 3, 2, 2: median 2.
  EXPECT_DOUBLE_EQ(select_gamma(x, y, GammaHeuristic::median_opposite_class), 1.0 / 8.0);
  EXPECT_EQ(gamma_heuristic_from_string("median_pairwise"), GammaHeuristic::median_pairwise);
  EXPECT_THROW(gamma_heuristic_from_string("silverman"), InvalidParameter);
}

class SyntheticCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { corpus_ = new std::vector<LabeledSample>(build_training_corpus(1)); }
  static void TearDownTestSuite() { delete corpus_; }
  static std::vector<LabeledSample>* corpus_;
};
std::vector<LabeledSample>* SyntheticCorpus::corpus_ = nullptr;

TEST_F(SyntheticCorpus, DeepContactPointIsContact) {
  const auto m = train(*corpus_);
  const FeatureVector deep{-400'000.0, -400'000.0};
  EXPECT_EQ(predict(m, deep).label, ContactLabel::contact);
  EXPECT_EQ(predict(m, {0.0, 0.0}).label, ContactLabel::no_contact);
}

TEST_F(SyntheticCorpus, FreeSupportVectorsSitOnTheMargin) {
  const auto r = train_detailed(*corpus_);
  for (std::size_t i = 0; i < corpus_->size(); ++i) {
    if (r.alpha[i] > 1e-9 && r.alpha[i] < r.model.c() - 1e-9) {
      const double score = r.model.decision_score((*corpus_)[i].features);
      EXPECT_NEAR(std::abs(score), 1.0, 1e-6);
      EXPECT_EQ(score > 0, (*corpus_)[i].label == ContactLabel::contact);
    }
  }
}

TEST_F(SyntheticCorpus, CrossValidationIsDeterministicAndAccurate) {
  const auto a = cross_validate(*corpus_, 10, {}, 3);
  const auto b = cross_validate(*corpus_, 10, {}, 3);
  EXPECT_EQ(a.pooled, b.pooled);
  EXPECT_EQ(a.folds.size(), 10u);
  EXPECT_LE(a.classification_loss, 0.05);
  std::size_t tested = 0;
  for (const auto& f : a.folds) tested += f.test_size;
  EXPECT_EQ(tested, corpus_->size());
}

TEST_F(SyntheticCorpus, SplitEvaluationIsDeterministicAndAccurate) {
  const auto a = split_evaluate(*corpus_, {}, 0.303, 10, 4);
  const auto b = split_evaluate(*corpus_, {}, 0.303, 10, 4);
  EXPECT_EQ(a.mean_accuracy, b.mean_accuracy);
  ASSERT_EQ(a.repeats.size(), 10u);
  EXPECT_EQ(a.repeats[0].train_size, 23u);
  EXPECT_GE(a.mean_accuracy, 0.95);
}

TEST(CrossValidate, PreconditionsAndSkippedFolds) {
  Rng rng(1);
  auto d = random_set(rng, 6);
  EXPECT_THROW(cross_validate(d, 1, {}, 0), InvalidParameter);
  EXPECT_THROW(cross_validate(d, 7, {}, 0), InvalidParameter);
  // One positive sample: the fold holding it trains on a single class.
  std::vector<LabeledSample> lopsided{sample(5, 5, ContactLabel::contact)};
  for (int i = 0; i < 5; ++i) lopsided.push_back(sample(i, 0, ContactLabel::no_contact));
  const auto cv = cross_validate(lopsided, 3, {}, 0);
  EXPECT_FALSE(cv.warnings.empty());
  EXPECT_TRUE(std::any_of(cv.folds.begin(), cv.folds.end(), [](const FoldResult& f) { return f.skipped; }));
}

TEST(ModelJson, RoundTripIsBitFaithful) {
  Rng rng(12);
  const auto d = random_set(rng, 25);
  const auto m = train(d);
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
  EXPECT_EQ(model_digest(back), model_digest(m));
  for (int q = 0; q < 200; ++q) {
    const FeatureVector x{rng.normal(0, 3), rng.normal(0, 3)};
    EXPECT_EQ(m.decision_score(x), back.decision_score(x));
  }
}

TEST(ModelJson, RejectsWrongFormat) {
  auto doc = model_to_json(SvmModel({{0, 0}}, {1.0}, 0.1, 1.0, 1.0, FeatureScaler{}, "x"));
  doc["format"] = "other";
  EXPECT_THROW(model_from_json(doc), InvalidInput);
  doc = model_to_json(SvmModel({{0, 0}}, {1.0}, 0.1, 1.0, 1.0, FeatureScaler{}, "x"));
  doc["version"] = 99;
  EXPECT_THROW(model_from_json(doc), InvalidInput);
}

}  // namespace
}  // namespace vexsense
