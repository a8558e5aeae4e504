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

// Treatment assignment under the ROI >= 0 constraint.
//
// Maximize sum_i z_i CATE_Y(x_i) subject to sum_i z_i CATE_L(x_i) <= 0. The
// records split into three quadrants by the signs of the two effects:
//
//   always      CATE_Y > 0, CATE_L <= 0   treated unconditionally; their
//                                         negative loss is the budget
//   candidates  CATE_Y > 0, CATE_L > 0    a 0/1 knapsack on that budget
//   never       CATE_Y <= 0               never treated
//
// The knapsack is solved greedily by utility/weight ratio. Items that do not
// fit are skipped and the scan continues, so the admitted set is not always a
// prefix of the ratio order: every treated candidate has sort_key >= theta,
// but a skipped candidate can also sit above theta.

#ifndef UPLIFT_ROI_ASSIGN_H_
#define UPLIFT_ROI_ASSIGN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "uplift_roi/core.h"

namespace uplift_roi::assign {

inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr size_t kMaxBruteForceSize = 22;

struct Quadrants {
  std::vector<size_t> always;
  std::vector<size_t> candidates;
  std::vector<size_t> never;
};

Quadrants PartitionQuadrants(const UpliftScores& scores);

struct Assignment {
  std::vector<uint8_t> z;
  // Smallest sort_key among admitted candidates; +inf when none was admitted.
  double threshold = kInf;
  double total_cate_y = 0.0;
  std::optional<double> total_cate_loss;
  // Negated loss of the always quadrant.
  std::optional<double> budget;
  size_t num_always = 0;
  size_t num_candidates = 0;
  size_t num_never = 0;

  size_t num_treated() const;
};

// Greedy knapsack. Needs cate_y and cate_loss on every record outside the
// never quadrant; fails with a precondition error otherwise.
absl::StatusOr<Assignment> GreedyAssign(const UpliftScores& scores);

// Exhaustive search over all 2^n subsets. Ties go to the lexicographically
// smallest z. Fails when n > kMaxBruteForceSize or magnitudes are missing.
absl::StatusOr<Assignment> BruteForceAssign(const UpliftScores& scores);

// Treat iff the record is outside the never quadrant and sort_key >= theta.
bool ShouldTreat(const RecordScore& score, double threshold);
std::vector<uint8_t> ApplyPolicy(const AssignmentPolicy& policy,
                                 const UpliftScores& scores);
// Policy for `threshold` with exposed_fraction measured on `reference`.
AssignmentPolicy ThresholdPolicy(const UpliftScores& reference,
                                 double threshold, std::string scorer_id = "");

// `row_index,z,sort_key` CSV.
std::string AssignmentToCsv(const Assignment& assignment,
                            const UpliftScores& scores);
// Threshold, totals and quadrant counts. Infinite thresholds are written as
// the strings "inf" and "-inf".
std::string AssignmentSummaryJson(const Assignment& assignment);

}  // namespace uplift_roi::assign

#endif  // UPLIFT_ROI_ASSIGN_H_
