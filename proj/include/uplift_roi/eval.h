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

// Offline evaluation on a randomized validation set.
//
// Records are ranked by sort_key, highest first, ties in input order. For the
// top k records the treated and control sums are compared with the control
// side rescaled by the prefix-local N_t(k) / N_c(k):
//
//   Qini      Delta(k) = Y_t(k) - Y_c(k) N_t(k) / N_c(k), divided by Delta(n)
//   Qini-ROI  ROI of Delta revenue against the treated promotion cost C_t(k)
//
// A prefix with no control records has a zero control term. The grid has
// `bins + 1` points at q = j / bins with k = round(q n).

#ifndef UPLIFT_ROI_EVAL_H_
#define UPLIFT_ROI_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "uplift_roi/core.h"

namespace uplift_roi::eval {

inline constexpr int kDefaultBins = 200;

struct CurvePoint {
  double q = 0.0;
  double value = 0.0;
  int64_t n_t = 0;
  int64_t n_c = 0;
  // False where the value does not exist (Qini-ROI prefix with no investment).
  bool defined = true;
};

struct Curve {
  std::vector<CurvePoint> points;
  // Qini only: false when the overall effect Delta(n) <= 0, in which case
  // the values are raw incremental purchases.
  bool normalized = true;
};

absl::StatusOr<Curve> QiniCurve(const Dataset& validation,
                                const UpliftScores& scores,
                                int bins = kDefaultBins);
absl::StatusOr<Curve> QiniRoiCurve(const Dataset& validation,
                                   const UpliftScores& scores,
                                   int bins = kDefaultBins);

// Trapezoidal area under a normalized curve.
absl::StatusOr<double> Auuc(const Curve& qini);

struct MetricReport {
  double auuc = 0.0;
  // Largest q with ROI(q) >= 0. Undefined ROI points count as feasible.
  double max_population_at_roi0 = 0.0;
  // Largest normalized Qini value over the feasible points.
  double max_ate_at_roi0 = 0.0;
};

absl::StatusOr<MetricReport> TableMetrics(const Curve& qini,
                                          const Curve& qini_roi);

struct Evaluation {
  Curve qini;
  Curve qini_roi;
  MetricReport report;
};

absl::StatusOr<Evaluation> Evaluate(const Dataset& validation,
                                    const UpliftScores& scores,
                                    int bins = kDefaultBins);

// `q,value,n_t,n_c,defined`; undefined values are left empty.
std::string CurveToCsv(const Curve& curve);
std::string MetricReportToJson(const MetricReport& report);

struct CompareRow {
  std::string method;
  MetricReport report;
};

// One row per method: `method,auuc,max_population_at_roi0,max_ate_at_roi0`.
std::string CompareToCsv(const std::vector<CompareRow>& rows);
std::string CompareToJson(const std::vector<CompareRow>& rows);

}  // namespace uplift_roi::eval

#endif  // UPLIFT_ROI_EVAL_H_
