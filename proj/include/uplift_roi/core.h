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

// Domain types shared by every module: visit records, the dataset container,
// per-record uplift scores, and the elementary ROI arithmetic.

#ifndef UPLIFT_ROI_CORE_H_
#define UPLIFT_ROI_CORE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace uplift_roi {

// One customer interaction. Revenue and cost only exist on a purchase, and the
// promotion cost only exists when the promotion was offered.
struct VisitRecord {
  std::vector<double> features;
  bool treatment = false;
  bool outcome = false;
  double revenue = 0.0;
  double cost = 0.0;
};

absl::Status ValidateRecord(const VisitRecord& record, int feature_dim);

// Read access to a collection of visit records. Methods that only need the
// purchasing customers go through `purchase_rows()`; reading other rows is a
// contract violation that tests detect with an instrumented implementation.
class RecordSource {
 public:
  virtual ~RecordSource() = default;

  virtual int feature_dim() const = 0;
  virtual double propensity() const = 0;
  virtual size_t size() const = 0;
  virtual const VisitRecord& record(size_t row) const = 0;
  // Indices of the rows with outcome = 1, ascending.
  virtual std::span<const size_t> purchase_rows() const = 0;
};

struct PropensityCheck {
  double empirical = 0.0;
  double standard_error = 0.0;
  bool within_bounds = true;  // |empirical - propensity| <= 3 SE.
};

// Immutable, validated collection of visit records from a randomized trial
// with a constant treatment propensity.
class Dataset final : public RecordSource {
 public:
  Dataset() = default;

  static absl::StatusOr<Dataset> Create(std::vector<VisitRecord> records,
                                        int feature_dim, double propensity,
                                        uint64_t seed = 0);

  int feature_dim() const override { return feature_dim_; }
  double propensity() const override { return propensity_; }
  uint64_t seed() const { return seed_; }
  size_t size() const override { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const VisitRecord& record(size_t row) const override { return records_[row]; }
  std::span<const VisitRecord> records() const { return records_; }
  std::span<const size_t> purchase_rows() const override {
    return purchase_rows_;
  }

  PropensityCheck CheckPropensity() const;

  // Records with the given treatment flag, in input order.
  std::vector<VisitRecord> Arm(bool treated) const;

 private:
  std::vector<VisitRecord> records_;
  std::vector<size_t> purchase_rows_;
  int feature_dim_ = 0;
  double propensity_ = 0.5;
  uint64_t seed_ = 0;
};

// Per-record output of an uplift method. The magnitudes are optional: some
// methods only identify the signs and the greedy ratio.
struct RecordScore {
  std::optional<double> cate_y;     // Estimated change in purchase probability.
  std::optional<double> cate_loss;  // Estimated incremental loss, currency.
  bool y_positive = false;
  bool loss_positive = false;
  // Greedy ordering key: +inf for free-lunch records, the utility/weight ratio
  // for knapsack candidates, -inf for records that must never be treated.
  // Unconstrained benchmarks use the raw cate_y estimate instead.
  double sort_key = 0.0;
};

using UpliftScores = std::vector<RecordScore>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sort key of the single-threshold greedy policy given the two signs and the
// utility/weight ratio (only read for knapsack candidates).
double GreedySortKey(bool y_positive, bool loss_positive, double ratio);

// Builds a fully populated score from the two magnitudes.
RecordScore ScoreFromMagnitudes(double cate_y, double cate_loss);

struct AssignmentPolicy {
  std::string scorer_id;
  double threshold = kInf;
  double exposed_fraction = 0.0;
};

// Constant per-purchase values: E[R | purchase, treated], E[R | purchase,
// control] and E[C | purchase, treated].
struct ValueEstimates {
  double r1 = 0.0;
  double r0 = 0.0;
  double c = 0.0;
};

// (revenue - investment) / investment. Fails when no investment was made.
absl::StatusOr<double> Roi(double delta_revenue, double delta_investment);

// Aggregate counts of one experiment arm.
struct ArmTotals {
  int64_t visitors = 0;
  int64_t treated = 0;
  int64_t purchases = 0;
  double revenue = 0.0;
  double cost = 0.0;

  void Add(const VisitRecord& record);
  ArmTotals& operator+=(const ArmTotals& other);
};

ArmTotals Tally(std::span<const VisitRecord> records);

// Treated-minus-control differences with the control sums rescaled to the
// treated group size.
struct GroupDeltas {
  double purchases = 0.0;
  double revenue = 0.0;
  double cost = 0.0;
};

absl::StatusOr<GroupDeltas> ComputeGroupDeltas(const ArmTotals& treated,
                                               const ArmTotals& control);
absl::StatusOr<GroupDeltas> ComputeGroupDeltas(
    std::span<const VisitRecord> treated, std::span<const VisitRecord> control);

}  // namespace uplift_roi

#endif  // UPLIFT_ROI_CORE_H_
