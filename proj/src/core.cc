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
#include <utility>

#include "absl/strings/str_cat.h"
#include "uplift_roi/status.h"

namespace uplift_roi {

absl::Status ValidateRecord(const VisitRecord& record, int feature_dim) {
  if (static_cast<int>(record.features.size()) != feature_dim) {
    return ShapeError(absl::StrCat("record has ", record.features.size(),
                                   " features, expected ", feature_dim));
  }
  for (const double value : record.features) {
    if (!std::isfinite(value)) {
      return SchemaError("non-finite feature value");
    }
  }
  if (!std::isfinite(record.revenue) || !std::isfinite(record.cost) ||
      record.revenue < 0 || record.cost < 0) {
    return SchemaError("revenue and cost must be finite and nonnegative");
  }
  if (!record.outcome && (record.revenue != 0 || record.cost != 0)) {
    return SchemaError("revenue or cost recorded without a purchase");
  }
  if (!record.treatment && record.cost != 0) {
    return SchemaError("promotion cost recorded on a control record");
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> Dataset::Create(std::vector<VisitRecord> records,
                                        int feature_dim, double propensity,
                                        uint64_t seed) {
  if (feature_dim < 0) return ConfigError("negative feature dimension");
  if (!(propensity > 0 && propensity < 1)) {
    return ConfigError(
        absl::StrCat("propensity must lie in (0,1), got ", propensity));
  }
  Dataset dataset;
  dataset.feature_dim_ = feature_dim;
  dataset.propensity_ = propensity;
  dataset.seed_ = seed;
  for (size_t row = 0; row < records.size(); ++row) {
    const absl::Status status = ValidateRecord(records[row], feature_dim);
    if (!status.ok()) {
      return absl::Status(status.code(),
                          absl::StrCat("row ", row, ": ", status.message()));
    }
    if (records[row].outcome) dataset.purchase_rows_.push_back(row);
  }
  dataset.records_ = std::move(records);
  return dataset;
}

PropensityCheck Dataset::CheckPropensity() const {
  PropensityCheck check;
  if (records_.empty()) return check;
  size_t treated = 0;
  for (const auto& record : records_) treated += record.treatment;
  const double n = static_cast<double>(records_.size());
  check.empirical = treated / n;
  check.standard_error = std::sqrt(propensity_ * (1 - propensity_) / n);
  check.within_bounds =
      std::abs(check.empirical - propensity_) <= 3 * check.standard_error;
  return check;
}

std::vector<VisitRecord> Dataset::Arm(bool treated) const {
  std::vector<VisitRecord> arm;
  for (const auto& record : records_) {
    if (record.treatment == treated) arm.push_back(record);
  }
  return arm;
}

double GreedySortKey(bool y_positive, bool loss_positive, double ratio) {
  if (!y_positive) return -kInf;
  if (!loss_positive) return kInf;
  return ratio;
}

RecordScore ScoreFromMagnitudes(double cate_y, double cate_loss) {
  RecordScore score;
  score.cate_y = cate_y;
  score.cate_loss = cate_loss;
  score.y_positive = cate_y > 0;
  score.loss_positive = cate_loss > 0;
  score.sort_key = GreedySortKey(
      score.y_positive, score.loss_positive,
      score.loss_positive ? cate_y / cate_loss : 0.0);
  return score;
}

absl::StatusOr<double> Roi(double delta_revenue, double delta_investment) {
  if (!(delta_investment > 0)) {
    return UndefinedRoiError(absl::StrCat(
        "ROI undefined for incremental investment ", delta_investment));
  }
  return (delta_revenue - delta_investment) / delta_investment;
}

void ArmTotals::Add(const VisitRecord& record) {
  ++visitors;
  treated += record.treatment;
  purchases += record.outcome;
  revenue += record.revenue;
  cost += record.cost;
}

ArmTotals& ArmTotals::operator+=(const ArmTotals& other) {
  visitors += other.visitors;
  treated += other.treated;
  purchases += other.purchases;
  revenue += other.revenue;
  cost += other.cost;
  return *this;
}

ArmTotals Tally(std::span<const VisitRecord> records) {
  ArmTotals totals;
  for (const auto& record : records) totals.Add(record);
  return totals;
}

absl::StatusOr<GroupDeltas> ComputeGroupDeltas(const ArmTotals& treated,
                                               const ArmTotals& control) {
  if (treated.visitors == 0 || control.visitors == 0) {
    return InsufficientDataError("group deltas need two nonempty groups");
  }
  const double scale = static_cast<double>(treated.visitors) /
                       static_cast<double>(control.visitors);
  GroupDeltas deltas;
  deltas.purchases = treated.purchases - scale * control.purchases;
  deltas.revenue = treated.revenue - scale * control.revenue;
  deltas.cost = treated.cost - scale * control.cost;
  return deltas;
}

absl::StatusOr<GroupDeltas> ComputeGroupDeltas(
    std::span<const VisitRecord> treated,
    std::span<const VisitRecord> control) {
  return ComputeGroupDeltas(Tally(treated), Tally(control));
}

}  // namespace uplift_roi
