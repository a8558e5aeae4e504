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

#include "uplift_roi/assign.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/dataset_io.h"
#include "uplift_roi/status.h"

namespace uplift_roi::assign {
namespace {

absl::Status RequireMagnitudes(const UpliftScores& scores) {
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].y_positive) continue;
    if (!scores[i].cate_y || !scores[i].cate_loss) {
      return InsufficientDataError(absl::StrCat(
          "record ", i,
          " has no effect magnitudes; the knapsack needs cate_y and cate_loss"));
    }
  }
  return absl::OkStatus();
}

void CountQuadrants(const UpliftScores& scores, Assignment& assignment) {
  const Quadrants quadrants = PartitionQuadrants(scores);
  assignment.num_always = quadrants.always.size();
  assignment.num_candidates = quadrants.candidates.size();
  assignment.num_never = quadrants.never.size();
}

void FillTotals(const UpliftScores& scores, Assignment& assignment) {
  double utility = 0, loss = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!assignment.z[i]) continue;
    utility += *scores[i].cate_y;
    loss += *scores[i].cate_loss;
  }
  assignment.total_cate_y = utility;
  assignment.total_cate_loss = loss;
}

nlohmann::ordered_json JsonNumber(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

}  // namespace

size_t Assignment::num_treated() const {
  return static_cast<size_t>(std::count(z.begin(), z.end(), 1));
}

Quadrants PartitionQuadrants(const UpliftScores& scores) {
  Quadrants quadrants;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].y_positive) {
      quadrants.never.push_back(i);
    } else if (!scores[i].loss_positive) {
      quadrants.always.push_back(i);
    } else {
      quadrants.candidates.push_back(i);
    }
  }
  return quadrants;
}

absl::StatusOr<Assignment> GreedyAssign(const UpliftScores& scores) {
  UPLIFT_RETURN_IF_ERROR(RequireMagnitudes(scores));
  Assignment assignment;
  assignment.z.assign(scores.size(), 0);
  CountQuadrants(scores, assignment);
  const Quadrants quadrants = PartitionQuadrants(scores);

  double budget = 0;
  for (const size_t i : quadrants.always) {
    assignment.z[i] = 1;
    budget -= *scores[i].cate_loss;
  }
  assignment.budget = budget;

  std::vector<size_t> order = quadrants.candidates;
  auto ratio = [&](size_t i) { return *scores[i].cate_y / *scores[i].cate_loss; };
  // Stable sort keeps input order as the last tie-break.
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double ra = ratio(a), rb = ratio(b);
    if (ra != rb) return ra > rb;
    return *scores[a].cate_y > *scores[b].cate_y;
  });
  double spent = 0;
  for (const size_t i : order) {
    const double weight = *scores[i].cate_loss;
    if (spent + weight > budget + kFeasibilityTolerance) continue;
    spent += weight;
    assignment.z[i] = 1;
    assignment.threshold = scores[i].sort_key;
  }
  FillTotals(scores, assignment);
  return assignment;
}

absl::StatusOr<Assignment> BruteForceAssign(const UpliftScores& scores) {
  const size_t n = scores.size();
  if (n > kMaxBruteForceSize) {
    return ShapeError(absl::StrCat("brute force supports at most ",
                                   kMaxBruteForceSize, " records, got ", n));
  }
  for (size_t i = 0; i < n; ++i) {
    if (!scores[i].cate_y || !scores[i].cate_loss) {
      return InsufficientDataError(
          absl::StrCat("record ", i, " has no effect magnitudes"));
    }
  }
  // Record i is bit n-1-i, so increasing masks enumerate z in lexicographic
  // order. Subset sums come from two half tables.
  const size_t low_bits = n / 2, high_bits = n - low_bits;
  auto half_sums = [&](size_t bits, size_t shift, bool utility) {
    std::vector<double> sums(size_t{1} << bits, 0.0);
    for (size_t m = 1; m < sums.size(); ++m) {
      const int bit = std::countr_zero(m);
      const size_t record = n - 1 - (shift + bit);
      sums[m] = sums[m & (m - 1)] +
                (utility ? *scores[record].cate_y : *scores[record].cate_loss);
    }
    return sums;
  };
  const std::vector<double> low_y = half_sums(low_bits, 0, true);
  const std::vector<double> low_l = half_sums(low_bits, 0, false);
  const std::vector<double> high_y = half_sums(high_bits, low_bits, true);
  const std::vector<double> high_l = half_sums(high_bits, low_bits, false);

  const size_t low_mask = (size_t{1} << low_bits) - 1;
  size_t best_mask = 0;
  double best = 0;
  for (size_t m = 1; m < (size_t{1} << n); ++m) {
    const size_t hi = m >> low_bits, lo = m & low_mask;
    if (high_l[hi] + low_l[lo] > kFeasibilityTolerance) continue;
    const double value = high_y[hi] + low_y[lo];
    if (value > best + 1e-12) {
      best = value;
      best_mask = m;
    }
  }

  Assignment assignment;
  assignment.z.assign(n, 0);
  CountQuadrants(scores, assignment);
  double budget = 0;
  for (size_t i = 0; i < n; ++i) {
    if (scores[i].y_positive && !scores[i].loss_positive) {
      budget -= *scores[i].cate_loss;
    }
    if ((best_mask >> (n - 1 - i)) & 1) {
      assignment.z[i] = 1;
      if (scores[i].y_positive && scores[i].loss_positive) {
        assignment.threshold = std::min(assignment.threshold, scores[i].sort_key);
      }
    }
  }
  assignment.budget = budget;
  FillTotals(scores, assignment);
  return assignment;
}

bool ShouldTreat(const RecordScore& score, double threshold) {
  return score.y_positive && score.sort_key >= threshold;
}

std::vector<uint8_t> ApplyPolicy(const AssignmentPolicy& policy,
                                 const UpliftScores& scores) {
  std::vector<uint8_t> treat(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    treat[i] = ShouldTreat(scores[i], policy.threshold) ? 1 : 0;
  }
  return treat;
}

AssignmentPolicy ThresholdPolicy(const UpliftScores& reference,
                                 double threshold, std::string scorer_id) {
  AssignmentPolicy policy;
  policy.scorer_id = std::move(scorer_id);
  policy.threshold = threshold;
  size_t treated = 0;
  for (const auto& score : reference) treated += ShouldTreat(score, threshold);
  policy.exposed_fraction =
      reference.empty() ? 0.0
                        : static_cast<double>(treated) / reference.size();
  return policy;
}

std::string AssignmentToCsv(const Assignment& assignment,
                            const UpliftScores& scores) {
  std::string out = "row_index,z,sort_key\n";
  for (size_t i = 0; i < assignment.z.size(); ++i) {
    absl::StrAppend(&out, i, ",", assignment.z[i] ? 1 : 0, ",",
                    FormatDouble(scores[i].sort_key), "\n");
  }
  return out;
}

std::string AssignmentSummaryJson(const Assignment& assignment) {
  nlohmann::ordered_json root;
  root["threshold"] = JsonNumber(assignment.threshold);
  root["treated"] = assignment.num_treated();
  root["total_cate_y"] = assignment.total_cate_y;
  root["total_cate_loss"] = assignment.total_cate_loss
                                ? nlohmann::ordered_json(*assignment.total_cate_loss)
                                : nlohmann::ordered_json(nullptr);
  root["budget"] = assignment.budget
                       ? nlohmann::ordered_json(*assignment.budget)
                       : nlohmann::ordered_json(nullptr);
  root["quadrants"] = {{"always", assignment.num_always},
                       {"candidates", assignment.num_candidates},
                       {"never", assignment.num_never}};
  return root.dump(2) + "\n";
}

}  // namespace uplift_roi::assign
