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

// Threshold calibration: fit ROI(Q) = a exp(b Q) + c to observed (exposed
// fraction, ROI) pairs with Levenberg-Marquardt, find the exposure where the
// fitted ROI crosses zero, and map it back to a sort_key threshold.

#ifndef UPLIFT_ROI_CALIBRATE_H_
#define UPLIFT_ROI_CALIBRATE_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "uplift_roi/core.h"
#include "uplift_roi/eval.h"

namespace uplift_roi::calibrate {

struct CalibrationPoint {
  double q = 0.0;
  double roi = 0.0;
  double weight = 1.0;
};

struct CalibrationCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  // Euclidean norm of the weighted residuals at the solution.
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;

  double Evaluate(double q) const;
};

struct FitOptions {
  double initial_damping = 1e-3;
  int max_iterations = 200;
  double step_tolerance = 1e-10;
  // Converged when the gradient of the half residual sum of squares is
  // below this.
  double gradient_tolerance = 1e-8;
};

// Weighted residuals r_i = w_i (a exp(b q_i) + c - roi_i).
std::vector<double> Residuals(std::span<const CalibrationPoint> points,
                              const std::array<double, 3>& params);
// Rows of d r_i / d(a, b, c).
std::vector<std::array<double, 3>> Jacobian(
    std::span<const CalibrationPoint> points,
    const std::array<double, 3>& params);

absl::StatusOr<CalibrationCurve> FitRoiCurve(
    std::span<const CalibrationPoint> points, const FitOptions& options = {});

inline constexpr double kDefaultQMin = 0.05;
inline constexpr double kDefaultQMax = 1.0;

// Largest Q in [q_min, q_max] with fitted ROI >= 0. The curve is monotone, so
// this is q_max when ROI(q_max) >= 0, q_min when ROI(q_min) <= 0 and the
// closed-form root ln(-c / a) / b otherwise.
absl::StatusOr<double> SolveQStar(const CalibrationCurve& curve,
                                  double q_min = kDefaultQMin,
                                  double q_max = kDefaultQMax);

// Threshold exposing the top round(q n) records of the reference sort keys:
// the k-th largest key, or just above the largest key when k = 0.
absl::StatusOr<double> QToThreshold(std::span<const double> sort_keys, double q);
absl::StatusOr<double> QToThreshold(const UpliftScores& reference, double q);

// Weights of the refit points. An online period whose age (periods since it
// completed, 0 for the latest) is at most `recent_age` gets `recent`.
struct PointWeights {
  double offline = 1.0;
  double recent = 4.0;
  double older = 2.0;
  int recent_age = 3;

  double Online(int age) const { return age <= recent_age ? recent : older; }
};

// Up to `count` evenly spaced defined points of an offline Qini-ROI curve,
// skipping q = 0, with weight `weight`.
std::vector<CalibrationPoint> OfflinePoints(const eval::Curve& qini_roi,
                                            int count, double weight);

// One JSON line describing a refit.
std::string CalibrationLogLine(int period,
                               std::span<const CalibrationPoint> points,
                               const CalibrationCurve& curve, double q_star,
                               double threshold);

}  // namespace uplift_roi::calibrate

#endif  // UPLIFT_ROI_CALIBRATE_H_
