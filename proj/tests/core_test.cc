/*
 * Copyright 2026 The Uplift-ROI Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "uplift_roi/core.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace uplift_roi {
namespace {

using ::uplift_roi::testing::Visit;

TEST(Roi, HandValues) {
  EXPECT_DOUBLE_EQ(*Roi(2.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(*Roi(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(*Roi(0.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(*Roi(20.0, 4.0), 4.0);
}

TEST(Roi, NoInvestmentIsAnError) {
  EXPECT_EQ(Roi(5.0, 0.0).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(Roi(5.0, -1.0).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(Roi(5.0, std::nan("")).ok());
}

TEST(Roi, StrictlyIncreasingInRevenue) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> x(-100, 100), y(0.01, 50);
  for (int i = 0; i < 200; ++i) {
    const double a = x(rng), b = y(rng);
    EXPECT_GT(*Roi(a + b, b), *Roi(a, b));
  }
}

TEST(ValidateRecord, RejectsBrokenInvariants) {
  EXPECT_TRUE(ValidateRecord(Visit({1, 2}, true, true, 10, 4), 2).ok());
  EXPECT_EQ(ValidateRecord(Visit({1}, true, true, 10, 4), 2).code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(ValidateRecord(Visit({1, 2}, false, true, 10, 4), 2).code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ValidateRecord(Visit({1, 2}, true, false, 10, 0), 2).code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ValidateRecord(Visit({1, INFINITY}, true, false), 2).code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(ValidateRecord(Visit({1, 2}, true, true, -1, 0), 2).code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(Dataset, CreateIndexesPurchases) {
  auto dataset = Dataset::Create({Visit({0}, true, true, 10, 4),
                                  Visit({1}, false, false),
                                  Visit({2}, false, true, 10, 0)},
                                 1, 0.5);
  ASSERT_TRUE(dataset.ok());
  ASSERT_EQ(dataset->purchase_rows().size(), 2u);
  EXPECT_EQ(dataset->purchase_rows()[0], 0u);
  EXPECT_EQ(dataset->purchase_rows()[1], 2u);
  EXPECT_EQ(dataset->Arm(true).size(), 1u);
  EXPECT_EQ(dataset->Arm(false).size(), 2u);
}

TEST(Dataset, CreateRejectsBadPropensityAndRows) {
  EXPECT_EQ(Dataset::Create({}, 1, 0.0).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(Dataset::Create({}, 1, 1.0).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(Dataset::Create({Visit({0, 0}, true, false)}, 1, 0.5).ok());
}

TEST(Dataset, PropensityCheckFlagsImbalance) {
  std::vector<VisitRecord> records;
  for (int i = 0; i < 1000; ++i) records.push_back(Visit({0}, i < 700, false));
  auto dataset = Dataset::Create(records, 1, 0.5);
  ASSERT_TRUE(dataset.ok());
  const PropensityCheck check = dataset->CheckPropensity();
  EXPECT_DOUBLE_EQ(check.empirical, 0.7);
  EXPECT_FALSE(check.within_bounds);

  auto balanced = Dataset::Create(records, 1, 0.7);
  EXPECT_TRUE(balanced->CheckPropensity().within_bounds);
}

TEST(GroupDeltas, HandAggregation) {
  // Treated: 2 of 4 buy, revenue 20, cost 4. Control: 1 of 4, revenue 10.
  std::vector<VisitRecord> treated = {
      Visit({0}, true, true, 12, 2), Visit({0}, true, true, 8, 2),
      Visit({0}, true, false), Visit({0}, true, false)};
  std::vector<VisitRecord> control = {Visit({0}, false, true, 10, 0),
                                      Visit({0}, false, false),
                                      Visit({0}, false, false),
                                      Visit({0}, false, false)};
  auto deltas = ComputeGroupDeltas(treated, control);
  ASSERT_TRUE(deltas.ok());
  EXPECT_DOUBLE_EQ(deltas->purchases, 1.0);
  EXPECT_DOUBLE_EQ(deltas->revenue, 10.0);
  EXPECT_DOUBLE_EQ(deltas->cost, 4.0);
}

TEST(GroupDeltas, IdenticalGroupsLeaveOnlyCost) {
  ArmTotals t{.visitors = 10, .treated = 10, .purchases = 3, .revenue = 30,
              .cost = 12};
  ArmTotals c{.visitors = 10, .treated = 0, .purchases = 3, .revenue = 30,
              .cost = 0};
  auto deltas = ComputeGroupDeltas(t, c);
  EXPECT_DOUBLE_EQ(deltas->purchases, 0.0);
  EXPECT_DOUBLE_EQ(deltas->revenue, 0.0);
  EXPECT_DOUBLE_EQ(deltas->cost, 12.0);
}

TEST(GroupDeltas, ControlScaledToTreatedSize) {
  std::vector<VisitRecord> treated = {Visit({0}, true, true, 10, 4),
                                      Visit({0}, true, false)};
  std::vector<VisitRecord> control = {
      Visit({0}, false, true, 10, 0), Visit({0}, false, true, 6, 0),
      Visit({0}, false, false), Visit({0}, false, false)};
  auto deltas = ComputeGroupDeltas(treated, control);
  EXPECT_DOUBLE_EQ(deltas->purchases, 1.0 - 0.5 * 2.0);
  EXPECT_DOUBLE_EQ(deltas->revenue, 10.0 - 0.5 * 16.0);
  EXPECT_DOUBLE_EQ(deltas->cost, 4.0);
}

TEST(GroupDeltas, EmptyGroupIsInsufficientData) {
  std::vector<VisitRecord> one = {Visit({0}, true, false)};
  EXPECT_EQ(ComputeGroupDeltas(one, {}).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(ComputeGroupDeltas({}, one).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(GroupDeltas, CostDeltaNonnegativeOnValidData) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VisitRecord> treated, control;
    const int nt = 1 + trial % 7, nc = 1 + trial % 5;
    for (int i = 0; i < nt; ++i) {
      const bool y = coin(rng);
      treated.push_back(Visit({0}, true, y, y ? 10 : 0, y ? 4 : 0));
    }
    for (int i = 0; i < nc; ++i) {
      const bool y = coin(rng);
      control.push_back(Visit({0}, false, y, y ? 10 : 0, 0));
    }
    EXPECT_GE(ComputeGroupDeltas(treated, control)->cost, 0.0);
  }
}

TEST(GreedySortKey, QuadrantSentinels) {
  EXPECT_EQ(GreedySortKey(false, true, 3.0), -kInf);
  EXPECT_EQ(GreedySortKey(false, false, 3.0), -kInf);
  EXPECT_EQ(GreedySortKey(true, false, 3.0), kInf);
  EXPECT_EQ(GreedySortKey(true, true, 3.0), 3.0);
}

TEST(ScoreFromMagnitudes, SignsAndRatio) {
  const RecordScore free_lunch = ScoreFromMagnitudes(0.2, -0.8);
  EXPECT_TRUE(free_lunch.y_positive);
  EXPECT_FALSE(free_lunch.loss_positive);
  EXPECT_EQ(free_lunch.sort_key, kInf);

  const RecordScore candidate = ScoreFromMagnitudes(0.2, 1.6);
  EXPECT_TRUE(candidate.loss_positive);
  EXPECT_DOUBLE_EQ(candidate.sort_key, 0.125);

  const RecordScore never = ScoreFromMagnitudes(0.0, 0.4);
  EXPECT_FALSE(never.y_positive);
  EXPECT_EQ(never.sort_key, -kInf);
}

}  // namespace
}  // namespace uplift_roi
