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

#include "uplift_roi/learners.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace uplift_roi::learners {
namespace {

LearnerConfig Linear(double l2 = 0.0, int iterations = 2000) {
  LearnerConfig config;
  config.kind = LearnerKind::kLinear;
  config.l2 = l2;
  config.iterations = iterations;
  return config;
}

LearnerConfig Trees(int rounds, int depth, double min_leaf = 5) {
  LearnerConfig config;
  config.kind = LearnerKind::kBoostedTrees;
  config.rounds = rounds;
  config.max_depth = depth;
  config.min_leaf_weight = min_leaf;
  config.learning_rate = 0.3;
  return config;
}

TrainingData XorData(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  TrainingData data(2);
  for (int i = 0; i < n; ++i) {
    const double x[2] = {u(rng), u(rng)};
    data.Add(x, (x[0] > 0) != (x[1] > 0) ? 1.0 : 0.0);
  }
  return data;
}

double Accuracy(const FittedModel& model, const TrainingData& data) {
  int correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double p = *PredictProba(model, data.row(i));
    correct += (p > 0.5) == (data.label(i) == 1.0);
  }
  return static_cast<double>(correct) / data.size();
}

TEST(FitClassifier, SingleClassGivesFlaggedConstant) {
  TrainingData data(1);
  for (int i = 0; i < 10; ++i) data.Add(std::vector<double>{double(i)}, 1.0);
  for (const LearnerConfig& config : {Linear(), Trees(5, 2)}) {
    auto model = FitClassifier(data, config);
    ASSERT_TRUE(model.ok());
    EXPECT_TRUE(model->constant);
    EXPECT_DOUBLE_EQ(*PredictProba(*model, std::vector<double>{-50.0}),
                     1.0 - kProbabilityEpsilon);
  }
}

TEST(FitClassifier, ConstantBaseRate) {
  TrainingData data(1);
  for (int i = 0; i < 10; ++i) data.Add(std::vector<double>{0.0}, i < 3 ? 1 : 0);
  auto model = FitClassifier(data, Linear());
  EXPECT_NEAR(*PredictProba(*model, std::vector<double>{0.0}), 0.3, 1e-9);
}

TEST(FitClassifier, SeparableLogistic) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  TrainingData train(1), test(1);
  for (int i = 0; i < 400; ++i) {
    const double x = u(rng);
    (i < 300 ? train : test).Add(std::vector<double>{x}, x > 0 ? 1 : 0);
  }
  auto model = FitClassifier(train, Linear(1e-4, 500));
  ASSERT_TRUE(model.ok());
  EXPECT_GE(Accuracy(*model, test), 0.95);
}

TEST(FitClassifier, TreesSolveXorLinearCannot) {
  const TrainingData data = XorData(1000, 5);
  LearnerConfig trees = Trees(50, 2);
  auto tree_model = FitClassifier(data, trees);
  auto linear_model = FitClassifier(data, Linear(1e-4, 500));
  ASSERT_TRUE(tree_model.ok() && linear_model.ok());
  EXPECT_GE(Accuracy(*tree_model, data), 0.95);
  EXPECT_LE(Accuracy(*linear_model, data), 0.6);
}

TEST(PredictProba, ZeroModelIsHalfAndChecksShape) {
  FittedModel model;
  model.kind = LearnerKind::kLinear;
  model.task = Task::kClassification;
  model.feature_dim = 2;
  model.weights = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(*PredictProba(model, std::vector<double>{3.0, -1.0}), 0.5);
  EXPECT_EQ(PredictProba(model, std::vector<double>{1.0}).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(PredictProba, MonotoneInPositiveWeightFeature) {
  FittedModel model;
  model.kind = LearnerKind::kLinear;
  model.task = Task::kClassification;
  model.feature_dim = 2;
  model.weights = {0.7, -0.2};
  model.bias = 0.1;
  double last = 0.0;
  for (double x = -5; x <= 5; x += 0.5) {
    const double p = *PredictProba(model, std::vector<double>{x, 1.0});
    EXPECT_GT(p, last);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    last = p;
  }
}

TEST(FitRegressor, ConstantTarget) {
  TrainingData data(2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) data.Add(std::vector<double>{g(rng), g(rng)}, 7.0);
  for (const LearnerConfig& config : {Linear(1e-4, 500), Trees(10, 3)}) {
    auto model = FitRegressor(data, config);
    ASSERT_TRUE(model.ok());
    for (double x : {-3.0, 0.0, 4.0}) {
      EXPECT_NEAR(*Predict(*model, std::vector<double>{x, -x}), 7.0, 1e-9);
    }
  }
}

// Solves the normal equations of an unregularized least squares fit with an
// intercept by Gaussian elimination.
std::vector<double> OrdinaryLeastSquares(const TrainingData& data) {
  const int p = data.feature_dim() + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (size_t i = 0; i < data.size(); ++i) {
    std::vector<double> x = {1.0};
    for (double v : data.row(i)) x.push_back(v);
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < p; ++c) a[r][c] += x[r] * x[c];
      a[r][p] += x[r] * data.label(i);
    }
  }
  for (int k = 0; k < p; ++k) {
    for (int r = k + 1; r < p; ++r) {
      const double f = a[r][k] / a[k][k];
      for (int c = k; c <= p; ++c) a[r][c] -= f * a[k][c];
    }
  }
  std::vector<double> beta(p);
  for (int k = p - 1; k >= 0; --k) {
    double s = a[k][p];
    for (int c = k + 1; c < p; ++c) s -= a[k][c] * beta[c];
    beta[k] = s / a[k][k];
  }
  return beta;
}

TEST(FitRegressor, LinearMatchesClosedForm) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  TrainingData data(2);
  for (int i = 0; i < 500; ++i) {
    const double x0 = g(rng), x1 = 2 + 0.5 * g(rng);
    data.Add(std::vector<double>{x0, x1}, 3 * x0 - 2 * x1 + 1 + 0.3 * g(rng));
  }
  auto model = FitRegressor(data, Linear(0.0, 3000));
  ASSERT_TRUE(model.ok());
  const std::vector<double> beta = OrdinaryLeastSquares(data);
  EXPECT_NEAR(model->bias, beta[0], 1e-6);
  EXPECT_NEAR(model->weights[0], beta[1], 1e-6);
  EXPECT_NEAR(model->weights[1], beta[2], 1e-6);
}

TEST(FitRegressor, RecoversSlopeThree) {
  TrainingData data(1);
  for (int i = -50; i <= 50; ++i) data.Add(std::vector<double>{i / 10.0}, 0.3 * i);
  auto model = FitRegressor(data, Linear(0.0, 500));
  EXPECT_NEAR(model->weights[0], 3.0, 1e-3);
}

TEST(FitRegressor, TreesFitPiecewiseConstant) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 3);
  TrainingData data(1);
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < 600; ++i) {
    const double x = u(rng);
    const double y = x < 1 ? -2.0 : (x < 2 ? 5.0 : 1.0);
    data.Add(std::vector<double>{x}, y);
    sum += y;
    sum_sq += y * y;
  }
  const double sd = std::sqrt(sum_sq / 600 - (sum / 600) * (sum / 600));
  auto model = FitRegressor(data, Trees(60, 2));
  ASSERT_TRUE(model.ok());
  double mse = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double r = *Predict(*model, data.row(i)) - data.label(i);
    mse += r * r;
  }
  EXPECT_LT(std::sqrt(mse / data.size()), sd / 10);
}

TEST(LinearObjective, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  TrainingData data(3);
  for (int i = 0; i < 60; ++i) {
    data.Add(std::vector<double>{g(rng), g(rng), g(rng)}, g(rng) > 0 ? 1 : 0,
             0.5 + (i % 3));
  }
  for (int point = 0; point < 10; ++point) {
    std::vector<double> params = {g(rng), g(rng), g(rng), g(rng)};
    for (Task task : {Task::kClassification, Task::kRegression}) {
      std::vector<double> gradient;
      internal::LinearObjective(data, task, params, 0.01, &gradient);
      for (size_t k = 0; k < params.size(); ++k) {
        const double h = 1e-6;
        std::vector<double> up = params, down = params;
        up[k] += h;
        down[k] -= h;
        const double fd = (internal::LinearObjective(data, task, up, 0.01,
                                                     nullptr) -
                           internal::LinearObjective(data, task, down, 0.01,
                                                     nullptr)) /
                          (2 * h);
        EXPECT_NEAR(gradient[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(Fit, WeightedEqualsReplicated) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  TrainingData weighted(2), replicated(2);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = {g(rng), g(rng)};
    const double y = x[0] + 0.5 * g(rng) > 0 ? 1 : 0;
    const int w = 1 + i % 3;
    weighted.Add(x, y, w);
    for (int k = 0; k < w; ++k) replicated.Add(x, y);
  }
  for (const LearnerConfig& config : {Linear(1e-3, 500), Trees(20, 3)}) {
    auto a = FitClassifier(weighted, config);
    auto b = FitClassifier(replicated, config);
    ASSERT_TRUE(a.ok() && b.ok());
    for (size_t i = 0; i < weighted.size(); ++i) {
      EXPECT_NEAR(*PredictProba(*a, weighted.row(i)),
                  *PredictProba(*b, weighted.row(i)), 1e-6);
    }
  }
}

TEST(Fit, DeterministicGivenSeed) {
  const TrainingData data = XorData(500, 9);
  LearnerConfig config = Trees(20, 3);
  config.subsample = 0.7;
  auto a = FitClassifier(data, config);
  auto b = FitClassifier(data, config);
  EXPECT_EQ(ModelToJson(*a), ModelToJson(*b));
  config.seed = 2;
  auto c = FitClassifier(data, config);
  EXPECT_NE(ModelToJson(*a), ModelToJson(*c));
}

TEST(Fit, MoreRoundsNeverIncreaseTrainingLoss) {
  const TrainingData data = XorData(800, 10);
  double last = INFINITY;
  for (int rounds : {1, 2, 5, 10, 20, 40, 80}) {
    auto model = FitClassifier(data, Trees(rounds, 3));
    const double loss = TrainingLoss(*model, data);
    EXPECT_LE(loss, last + 1e-12) << rounds;
    last = loss;
  }
}

TEST(ModelJson, RoundTripPredictsIdentically) {
  const TrainingData data = XorData(300, 3);
  for (const LearnerConfig& config : {Linear(1e-3, 300), Trees(15, 3)}) {
    auto model = FitClassifier(data, config);
    auto copy = ModelFromJson(ModelToJson(*model));
    ASSERT_TRUE(copy.ok()) << copy.status();
    for (size_t i = 0; i < data.size(); ++i) {
      EXPECT_EQ(*PredictProba(*model, data.row(i)),
                *PredictProba(*copy, data.row(i)));
    }
  }
}

TEST(ModelJson, UnknownVersionFails) {
  const TrainingData data = XorData(50, 3);
  auto model = FitClassifier(data, Linear(1e-3, 10));
  std::string text = ModelToJson(*model);
  const std::string key = "\"format_version\":1";
  ASSERT_NE(text.find(key), std::string::npos);
  text.replace(text.find(key), key.size(), "\"format_version\":99");
  EXPECT_EQ(ModelFromJson(text).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(LearnerConfig, ValidationAndAlias) {
  LearnerConfig config;
  config.rounds = 0;
  EXPECT_FALSE(ValidateLearnerConfig(config).ok());
  config = LearnerConfig();
  config.learning_rate = 1.5;
  EXPECT_FALSE(ValidateLearnerConfig(config).ok());
  EXPECT_EQ(*ParseLearnerKind("logistic"), LearnerKind::kLinear);
  EXPECT_EQ(*ParseLearnerKind("boosted-trees"), LearnerKind::kBoostedTrees);
  EXPECT_FALSE(ParseLearnerKind("forest").ok());
  auto copy = LearnerConfigFromJson(LearnerConfigToJson(Trees(7, 4)));
  ASSERT_TRUE(copy.ok());
  EXPECT_EQ(copy->rounds, 7);
  EXPECT_EQ(copy->max_depth, 4);
}

}  // namespace
}  // namespace uplift_roi::learners
