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

#include "uplift_roi/calibrate.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "Eigen/Dense"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/status.h"

namespace uplift_roi::calibrate {
namespace {

using Params = std::array<double, 3>;

double SumOfSquares(const std::vector<double>& residuals) {
  double total = 0;
  for (const double r : residuals) total += r * r;
  return total;
}

bool Finite(const Params& p) {
  return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
}

absl::Status ValidatePoints(std::span<const CalibrationPoint> points) {
  std::set<double> distinct;
  for (const CalibrationPoint& point : points) {
    if (!(point.q >= 0 && point.q <= 1)) {
      return ConfigError(absl::StrCat("calibration q outside [0,1]: ", point.q));
    }
    if (!(point.weight > 0) || !std::isfinite(point.weight)) {
      return ConfigError(
          absl::StrCat("calibration weight must be positive: ", point.weight));
    }
    if (!std::isfinite(point.roi)) {
      return ConfigError("calibration ROI must be finite");
    }
    distinct.insert(point.q);
  }
  if (distinct.size() < 3) {
    return InsufficientDataError(absl::StrCat(
        "curve fit needs at least 3 distinct q values, got ", distinct.size()));
  }
  return absl::OkStatus();
}

// For fixed b the model is linear in (a, c); weighted least squares on a
// small grid of rates gives the starting point. A single fixed start cannot
// reach curves whose rate has the other sign.
Params StartingPoint(std::span<const CalibrationPoint> points) {
  Params best = {0, 0, 0};
  double best_cost = std::numeric_limits<double>::infinity();
  for (double b : {-8.0, -4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (const auto& point : points) {
      const double w2 = point.weight * point.weight;
      const Eigen::Vector2d row(std::exp(b * point.q), 1.0);
      normal.noalias() += w2 * row * row.transpose();
      rhs += w2 * point.roi * row;
    }
    const Eigen::Vector2d ac = normal.ldlt().solve(rhs);
    if (!ac.allFinite()) continue;
    const Params candidate = {ac[0], b, ac[1]};
    double cost = 0;
    for (const auto& point : points) {
      const double r = point.weight * (candidate[0] * std::exp(b * point.q) +
                                       candidate[2] - point.roi);
      cost += r * r;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = candidate;
    }
  }
  return best;
}

}  // namespace

double CalibrationCurve::Evaluate(double q) const {
  return a * std::exp(b * q) + c;
}

std::vector<double> Residuals(std::span<const CalibrationPoint> points,
                              const Params& params) {
  std::vector<double> residuals(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& point = points[i];
    residuals[i] = point.weight * (params[0] * std::exp(params[1] * point.q) +
                                   params[2] - point.roi);
  }
  return residuals;
}

std::vector<Params> Jacobian(std::span<const CalibrationPoint> points,
                             const Params& params) {
  std::vector<Params> rows(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const double w = points[i].weight, q = points[i].q;
    const double e = std::exp(params[1] * q);
    rows[i] = {w * e, w * params[0] * q * e, w};
  }
  return rows;
}

absl::StatusOr<CalibrationCurve> FitRoiCurve(
    std::span<const CalibrationPoint> points, const FitOptions& options) {
  UPLIFT_RETURN_IF_ERROR(ValidatePoints(points));

  Params params = StartingPoint(points);
  std::vector<double> residuals = Residuals(points, params);
  double cost = SumOfSquares(residuals);
  double damping = options.initial_damping;

  auto normal_equations = [&](Eigen::Matrix3d& jtj, Eigen::Vector3d& jtr) {
    jtj.setZero();
    jtr.setZero();
    const std::vector<Params> rows = Jacobian(points, params);
    for (size_t i = 0; i < rows.size(); ++i) {
      const Eigen::Vector3d row(rows[i][0], rows[i][1], rows[i][2]);
      jtj.noalias() += row * row.transpose();
      jtr += row * residuals[i];
    }
  };

  CalibrationCurve curve;
  Eigen::Matrix3d jtj;
  Eigen::Vector3d jtr;
  normal_equations(jtj, jtr);
  int iteration = 0;
  while (iteration < options.max_iterations) {
    ++iteration;
    if (jtr.norm() < options.gradient_tolerance * 1e-6) break;
    // Marquardt scaling by the diagonal, floored so a flat direction still
    // gets damped.
    Eigen::Matrix3d system = jtj;
    const double floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());
    for (int k = 0; k < 3; ++k) {
      system(k, k) += damping * std::max(jtj(k, k), floor);
    }
    const Eigen::Vector3d step = system.ldlt().solve(-jtr);
    const Params trial = {params[0] + step[0], params[1] + step[1],
                          params[2] + step[2]};
    std::vector<double> trial_residuals;
    double trial_cost = std::numeric_limits<double>::infinity();
    if (step.allFinite() && Finite(trial)) {
      trial_residuals = Residuals(points, trial);
      trial_cost = SumOfSquares(trial_residuals);
    }
    if (std::isfinite(trial_cost) && trial_cost <= cost) {
      params = trial;
      residuals = std::move(trial_residuals);
      cost = trial_cost;
      damping = std::max(damping / 10, 1e-15);
      normal_equations(jtj, jtr);
      if (step.norm() < options.step_tolerance) break;
    } else {
      damping *= 10;
      if (damping > 1e20) break;
    }
  }

  if (!Finite(params)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "curve fit diverged after ", iteration, " iterations: a=", params[0],
        " b=", params[1], " c=", params[2]));
  }
  curve.a = params[0];
  curve.b = params[1];
  curve.c = params[2];
  curve.residual_norm = std::sqrt(cost);
  curve.iterations = iteration;
  curve.converged = jtr.norm() < options.gradient_tolerance;
  return curve;
}

absl::StatusOr<double> SolveQStar(const CalibrationCurve& curve, double q_min,
                                  double q_max) {
  if (!std::isfinite(curve.a) || !std::isfinite(curve.b) ||
      !std::isfinite(curve.c)) {
    return absl::FailedPreconditionError("calibration curve is not finite");
  }
  if (!(q_min <= q_max)) {
    return ConfigError(absl::StrCat("bad Q bounds [", q_min, ", ", q_max, "]"));
  }
  if (curve.Evaluate(q_max) >= 0) return q_max;
  if (curve.Evaluate(q_min) <= 0) return q_min;
  // Strict sign change on a monotone curve: a != 0, b != 0 and -c / a > 0.
  const double root = std::log(-curve.c / curve.a) / curve.b;
  return std::clamp(root, q_min, q_max);
}

absl::StatusOr<double> QToThreshold(std::span<const double> sort_keys,
                                    double q) {
  if (sort_keys.empty()) {
    return InsufficientDataError("no reference scores for the threshold");
  }
  if (!(q >= 0 && q <= 1)) {
    return ConfigError(absl::StrCat("exposure fraction outside [0,1]: ", q));
  }
  const size_t n = sort_keys.size();
  const size_t k = static_cast<size_t>(std::llround(q * n));
  std::vector<double> keys(sort_keys.begin(), sort_keys.end());
  if (k == 0) {
    const double top = *std::max_element(keys.begin(), keys.end());
    return std::nextafter(top, kInf);
  }
  std::nth_element(keys.begin(), keys.begin() + (k - 1), keys.end(),
                   std::greater<double>());
  return keys[k - 1];
}

absl::StatusOr<double> QToThreshold(const UpliftScores& reference, double q) {
  std::vector<double> keys;
  keys.reserve(reference.size());
  for (const auto& score : reference) keys.push_back(score.sort_key);
  return QToThreshold(keys, q);
}

std::vector<CalibrationPoint> OfflinePoints(const eval::Curve& qini_roi,
                                            int count, double weight) {
  std::vector<const eval::CurvePoint*> usable;
  for (const auto& point : qini_roi.points) {
    if (point.q > 0 && point.defined) usable.push_back(&point);
  }
  std::vector<CalibrationPoint> points;
  if (usable.empty() || count <= 0) return points;
  const size_t take = std::min<size_t>(count, usable.size());
  for (size_t j = 0; j < take; ++j) {
    // Spread over the usable range and always keep the last point.
    const size_t index = take == 1 ? usable.size() - 1
                                   : j * (usable.size() - 1) / (take - 1);
    points.push_back({usable[index]->q, usable[index]->value, weight});
  }
  return points;
}

std::string CalibrationLogLine(int period,
                               std::span<const CalibrationPoint> points,
                               const CalibrationCurve& curve, double q_star,
                               double threshold) {
  nlohmann::ordered_json line;
  line["period"] = period;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& point : points) {
    inputs.push_back({{"q", point.q}, {"roi", point.roi}, {"weight", point.weight}});
  }
  line["points"] = std::move(inputs);
  line["a"] = curve.a;
  line["b"] = curve.b;
  line["c"] = curve.c;
  line["iterations"] = curve.iterations;
  line["converged"] = curve.converged;
  line["q_star"] = q_star;
  if (std::isinf(threshold)) {
    line["theta"] = threshold > 0 ? "inf" : "-inf";
  } else {
    line["theta"] = threshold;
  }
  return line.dump() + "\n";
}

}  // namespace uplift_roi::calibrate
