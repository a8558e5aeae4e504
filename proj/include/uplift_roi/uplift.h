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

// The four uplift scoring methods.
//
//   two-models                 CATE_Y = Pr(Y|x,T=1) - Pr(Y|x,T=0) from two
//                              classifiers. Unconstrained benchmark.
//   transformed-outcome        CATE_Y regressed directly on the transformed
//                              target Y (T - e) / (e (1 - e)). Unconstrained
//                              benchmark.
//   fractional-approximation   the two-models probabilities plugged into the
//                              full greedy ratio CATE_Y / CATE_Loss.
//   retrospective              S(x) = Pr(T=1 | x, Y=1) learned on purchasers
//                              only; its odds equal the ratio of the treated
//                              and control purchase probabilities, which gives
//                              both signs and the greedy ratio.

#ifndef UPLIFT_ROI_UPLIFT_H_
#define UPLIFT_ROI_UPLIFT_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "uplift_roi/core.h"
#include "uplift_roi/learners.h"

namespace uplift_roi::uplift {

enum class MethodId {
  kTwoModels,
  kTransformedOutcome,
  kFractionalApproximation,
  kRetrospective,
};

inline constexpr MethodId kAllMethods[] = {
    MethodId::kTwoModels, MethodId::kTransformedOutcome,
    MethodId::kFractionalApproximation, MethodId::kRetrospective};

std::string_view MethodName(MethodId method);
absl::StatusOr<MethodId> ParseMethodId(std::string_view name);

struct UpliftConfig {
  learners::LearnerConfig learner;
  // Retrospective only: model R1(x), R0(x) and C(x) with regressors on the
  // purchase rows instead of using constant per-purchase values.
  bool per_record_values = false;
  learners::LearnerConfig value_learner;
};

absl::StatusOr<UpliftConfig> UpliftConfigFromJson(std::string_view text);
std::string UpliftConfigToJson(const UpliftConfig& config);

// Two-models.
struct TwoModels {
  learners::FittedModel treated;
  learners::FittedModel control;
};

absl::StatusOr<TwoModels> FitTwoModels(const Dataset& train,
                                       const learners::LearnerConfig& config);
RecordScore TwoModelsScore(double p1, double p0);

// Transformed outcome.
struct TransformedOutcomeModel {
  learners::FittedModel regressor;
  double propensity = 0.5;
};

absl::StatusOr<double> TransformedOutcome(bool outcome, bool treatment,
                                          double propensity);
absl::StatusOr<TransformedOutcomeModel> FitTransformedOutcome(
    const Dataset& train, const learners::LearnerConfig& config);
RecordScore TransformedOutcomeScore(double cate_y);

// Constant per-purchase values. Reads purchase rows only.
absl::StatusOr<ValueEstimates> FitValueEstimates(const RecordSource& train);

// Fractional approximation from the two probabilities and the values.
RecordScore FractionalScore(double p1, double p0, const ValueEstimates& values);

// Retrospective estimation.
struct RetrospectiveModel {
  learners::FittedModel s_model;
  ValueEstimates values;
  // Revenue per purchase pooled over both arms; the constant-value form
  // assumes revenue does not depend on treatment.
  double revenue = 0.0;
  double propensity = 0.5;
  bool per_record_values = false;
  std::optional<learners::FittedModel> r1_model;
  std::optional<learners::FittedModel> r0_model;
  std::optional<learners::FittedModel> c_model;
};

// Trains S(x) on the purchase rows only; no other row is read.
absl::StatusOr<RetrospectiveModel> FitRetrospective(const RecordSource& train,
                                                    const UpliftConfig& config);

// Maps S(x) observed under treatment propensity e to the balanced-design
// value p1 / (p0 + p1): the odds are multiplied by (1 - e) / e.
double CorrectForPropensity(double s, double propensity);

// Constant-value scoring of a propensity-corrected S. Fails when
// 2 * revenue <= cost (no break-even point on S in the unit interval).
absl::StatusOr<RecordScore> RetrospectiveScore(double s, double revenue,
                                               double cost);
// General form with per-record values; the loss sign is the sign of the
// ratio's denominator.
RecordScore RetrospectiveScoreGeneral(double s, double r1, double r0, double c);

// A fitted method of any kind.
class UpliftModel {
 public:
  static absl::StatusOr<UpliftModel> Fit(MethodId method, const Dataset& train,
                                         const UpliftConfig& config);

  MethodId method() const { return method_; }
  int feature_dim() const { return feature_dim_; }
  double propensity() const { return propensity_; }
  const std::optional<TwoModels>& two_models() const { return two_models_; }
  const std::optional<TransformedOutcomeModel>& transformed_outcome() const {
    return transformed_outcome_;
  }
  const std::optional<RetrospectiveModel>& retrospective() const {
    return retrospective_;
  }
  const std::optional<ValueEstimates>& values() const { return values_; }

  // Whether scores carry cate_y and cate_loss magnitudes.
  bool HasLossMagnitudes() const {
    return method_ == MethodId::kFractionalApproximation;
  }

  absl::StatusOr<RecordScore> ScoreOne(std::span<const double> features) const;
  absl::StatusOr<UpliftScores> Score(std::span<const VisitRecord> records) const;

  std::string ToJson() const;
  static absl::StatusOr<UpliftModel> FromJson(std::string_view text);

 private:
  MethodId method_ = MethodId::kTwoModels;
  int feature_dim_ = 0;
  double propensity_ = 0.5;
  std::optional<TwoModels> two_models_;
  std::optional<TransformedOutcomeModel> transformed_outcome_;
  std::optional<RetrospectiveModel> retrospective_;
  std::optional<ValueEstimates> values_;
};

}  // namespace uplift_roi::uplift

#endif  // UPLIFT_ROI_UPLIFT_H_
