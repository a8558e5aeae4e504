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

// Base learners used by every uplift method: a linear model (logistic for
// classification, identity link for regression) trained by batch gradient
// descent, and gradient boosted regression trees.
//
// Both learners are deterministic given their input and seed, and accept row
// weights. A weighted fit with integer weights matches the fit on the
// row-replicated data.

#ifndef UPLIFT_ROI_LEARNERS_H_
#define UPLIFT_ROI_LEARNERS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace uplift_roi::learners {

// Probabilities are clamped to [kProbabilityEpsilon, 1 - kProbabilityEpsilon].
inline constexpr double kProbabilityEpsilon = 1e-6;

enum class LearnerKind { kLinear, kBoostedTrees };
enum class Task { kClassification, kRegression };

std::string_view LearnerKindName(LearnerKind kind);
std::string_view TaskName(Task task);

struct LearnerConfig {
  LearnerKind kind = LearnerKind::kBoostedTrees;

  // Linear model.
  double l2 = 1e-4;
  int iterations = 500;

  // Boosted trees.
  int rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  double min_leaf_weight = 20.0;
  double subsample = 1.0;

  uint64_t seed = 1;
};

absl::Status ValidateLearnerConfig(const LearnerConfig& config);

// Accepts "linear" (alias "logistic") and "boosted-trees".
absl::StatusOr<LearnerKind> ParseLearnerKind(std::string_view name);
absl::StatusOr<LearnerConfig> LearnerConfigFromJson(std::string_view text);
std::string LearnerConfigToJson(const LearnerConfig& config);

// Row-major training rows with one label and one weight per row.
class TrainingData {
 public:
  explicit TrainingData(int feature_dim) : feature_dim_(feature_dim) {}

  void Add(std::span<const double> features, double label, double weight = 1.0);

  int feature_dim() const { return feature_dim_; }
  size_t size() const { return labels_.size(); }
  std::span<const double> row(size_t i) const {
    return {features_.data() + i * feature_dim_,
            static_cast<size_t>(feature_dim_)};
  }
  double feature(size_t i, int j) const { return features_[i * feature_dim_ + j]; }
  double label(size_t i) const { return labels_[i]; }
  double weight(size_t i) const { return weights_[i]; }
  std::span<const double> labels() const { return labels_; }
  std::span<const double> weights() const { return weights_; }

 private:
  int feature_dim_;
  std::vector<double> features_;
  std::vector<double> labels_;
  std::vector<double> weights_;
};

// Internal node when `feature >= 0`: rows with x[feature] < threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double Predict(std::span<const double> features) const;
};

struct FittedModel {
  LearnerKind kind = LearnerKind::kLinear;
  Task task = Task::kClassification;
  int feature_dim = 0;
  LearnerConfig config;
  // Set when the training labels had a single class (or a single value); the
  // model then predicts the clamped base rate.
  bool constant = false;

  // Linear: raw output = bias + weights . x.
  double bias = 0.0;
  std::vector<double> weights;

  // Trees: raw output = base_score + sum of tree outputs.
  double base_score = 0.0;
  std::vector<Tree> trees;

  // Link-scale output without dimension checks (log-odds for classifiers).
  double RawOutput(std::span<const double> features) const;
  // Probability for classifiers, prediction for regressors; unchecked.
  double Evaluate(std::span<const double> features) const;
};

absl::StatusOr<FittedModel> FitClassifier(const TrainingData& data,
                                          const LearnerConfig& config);
absl::StatusOr<FittedModel> FitRegressor(const TrainingData& data,
                                         const LearnerConfig& config);

// Probability clamped to [epsilon, 1 - epsilon]. Fails on a dimension
// mismatch or when called on a regressor.
absl::StatusOr<double> PredictProba(const FittedModel& model,
                                    std::span<const double> features);
absl::StatusOr<double> Predict(const FittedModel& model,
                               std::span<const double> features);

// Mean weighted training loss: log-loss for classifiers, half squared error
// for regressors.
double TrainingLoss(const FittedModel& model, const TrainingData& data);

// Versioned JSON model document.
inline constexpr int kModelFormatVersion = 1;
std::string ModelToJson(const FittedModel& model);
absl::StatusOr<FittedModel> ModelFromJson(std::string_view text);

namespace internal {

// Regularized objective of the linear learner on raw features, with
// params = {bias, w_0, ..., w_{d-1}} and the L2 penalty on w only. Writes the
// analytic gradient when `gradient` is not null.
double LinearObjective(const TrainingData& data, Task task,
                       std::span<const double> params, double l2,
                       std::vector<double>* gradient);

FittedModel FitTrees(const TrainingData& data, Task task,
                     const LearnerConfig& config);

}  // namespace internal

}  // namespace uplift_roi::learners

#endif  // UPLIFT_ROI_LEARNERS_H_
