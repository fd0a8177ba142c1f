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

#include <gtest/gtest.h>

#include "vexsense/error.hpp"

namespace vexsense {
namespace {

TEST(Metrics, BenchtopTable) {
  const ConfusionCounts c{149, 1, 1, 455};
  const auto m = metrics(c);
  // Published values, four decimals.
  EXPECT_NEAR(m.accuracy, 0.9967, 0.00005);
  EXPECT_NEAR(*m.precision.value, 0.9933, 0.00005);
  EXPECT_NEAR(*m.recall.value, 0.9933, 0.00005);
  EXPECT_NEAR(*m.specificity.value, 0.9978, 0.00005);
  EXPECT_NEAR(*m.f1.value, 0.9933, 0.00005);
  EXPECT_NEAR(*m.f2.value, 0.9933, 0.00005);
}

TEST(Metrics, DirectRatios) {
  const ConfusionCounts c{149, 1, 1, 455};
  const auto m = metrics(c);
  EXPECT_DOUBLE_EQ(m.accuracy, 604.0 / 606.0);
  EXPECT_DOUBLE_EQ(*m.precision.value, 149.0 / 150.0);
  EXPECT_DOUBLE_EQ(*m.specificity.value, 455.0 / 456.0);
}

TEST(Metrics, FBetaHarmonicForm) {
  const ConfusionCounts c{30, 7, 12, 51};
  const double p = 30.0 / 37.0, r = 30.0 / 42.0;
  for (double beta : {0.5, 1.0, 2.0, 3.0}) {
    const double b2 = beta * beta;
    EXPECT_NEAR(*f_beta(c, beta).value, (1 + b2) * p * r / (b2 * p + r), 1e-15);
  }
}

TEST(Metrics, PerfectPredictions) {
  const auto m = metrics({10, 0, 0, 10});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(*m.f1.value, 1.0);
  EXPECT_EQ(*m.f2.value, 1.0);
}

TEST(Metrics, NoPositivePredictionsLeavesPrecisionUndefined) {
  const auto m = metrics({0, 0, 5, 20});
  EXPECT_FALSE(m.precision.defined());
  EXPECT_FALSE(m.precision.reason.empty());
  EXPECT_EQ(*m.recall.value, 0.0);
  EXPECT_EQ(*m.f1.value, 0.0);
}

TEST(Metrics, AllNegativeCorrectLeavesPositiveMetricsUndefined) {
  const auto m = metrics({0, 0, 0, 20});
  EXPECT_FALSE(m.precision.defined());
  EXPECT_FALSE(m.recall.defined());
  EXPECT_FALSE(m.f1.defined());
  EXPECT_EQ(*m.specificity.value, 1.0);
}

TEST(Metrics, EmptyCountsRejected) { EXPECT_THROW(metrics({}), InvalidInput); }

TEST(ConfusionCounts, AddAndAccumulate) {
  ConfusionCounts c;
  c.add(true, true);
  c.add(true, false);
  c.add(false, true);
  c.add(false, false);
  c.add(false, false);
  EXPECT_EQ(c, (ConfusionCounts{1, 1, 1, 2}));
  c += ConfusionCounts{1, 0, 0, 0};
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.total(), 6u);
  EXPECT_EQ(c.errors(), 2u);
}

TEST(Metrics, JsonMarksUndefinedValues) {
  const auto j = to_json(metrics({0, 0, 0, 3}));
  EXPECT_TRUE(j.at("precision").is_object());
  EXPECT_TRUE(j.at("precision").at("value").is_null());
  EXPECT_DOUBLE_EQ(j.at("accuracy").get<double>(), 1.0);
}

}  // namespace
}  // namespace vexsense
