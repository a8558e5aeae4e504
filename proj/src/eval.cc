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

#include "uplift_roi/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/dataset_io.h"
#include "uplift_roi/status.h"

namespace uplift_roi::eval {
namespace {

using Json = nlohmann::ordered_json;

// Arm sums of each grid prefix.
struct Prefix {
  double q = 0;
  ArmTotals treated;
  ArmTotals control;
};

absl::StatusOr<std::vector<Prefix>> Prefixes(const Dataset& validation,
                                             const UpliftScores& scores,
                                             int bins) {
  const size_t n = validation.size();
  if (scores.size() != n) {
    return ShapeError(absl::StrCat("got ", scores.size(), " scores for ", n,
                                   " validation records"));
  }
  if (bins < 1) return ConfigError("grid needs at least one bin");
  if (n == 0) return InsufficientDataError("empty validation set");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a].sort_key > scores[b].sort_key;
  });

  std::vector<Prefix> prefixes(bins + 1);
  ArmTotals treated, control;
  size_t consumed = 0;
  for (int j = 0; j <= bins; ++j) {
    const double q = static_cast<double>(j) / bins;
    const size_t k = j == bins ? n : static_cast<size_t>(std::llround(q * n));
    for (; consumed < k; ++consumed) {
      const VisitRecord& record = validation.record(order[consumed]);
      (record.treatment ? treated : control).Add(record);
    }
    prefixes[j] = {q, treated, control};
  }
  if (treated.visitors == 0 || control.visitors == 0) {
    return InsufficientDataError(
        "validation set needs both treated and control records");
  }
  return prefixes;
}

double ControlScale(const Prefix& prefix) {
  return prefix.control.visitors == 0
             ? 0.0
             : static_cast<double>(prefix.treated.visitors) /
                   prefix.control.visitors;
}

Json JsonReport(const MetricReport& report) {
  Json root;
  root["auuc"] = report.auuc;
  root["max_population_at_roi0"] = report.max_population_at_roi0;
  root["max_ate_at_roi0"] = report.max_ate_at_roi0;
  return root;
}

}  // namespace

absl::StatusOr<Curve> QiniCurve(const Dataset& validation,
                                const UpliftScores& scores, int bins) {
  UPLIFT_ASSIGN_OR_RETURN(const std::vector<Prefix> prefixes,
                          Prefixes(validation, scores, bins));
  Curve curve;
  for (const Prefix& prefix : prefixes) {
    CurvePoint point;
    point.q = prefix.q;
    point.n_t = prefix.treated.visitors;
    point.n_c = prefix.control.visitors;
    point.value = prefix.treated.purchases -
                  prefix.control.purchases * ControlScale(prefix);
    curve.points.push_back(point);
  }
  const double total = curve.points.back().value;
  curve.normalized = total > 0;
  if (curve.normalized) {
    for (CurvePoint& point : curve.points) point.value /= total;
    curve.points.back().value = 1.0;
  }
  return curve;
}

absl::StatusOr<Curve> QiniRoiCurve(const Dataset& validation,
                                   const UpliftScores& scores, int bins) {
  UPLIFT_ASSIGN_OR_RETURN(const std::vector<Prefix> prefixes,
                          Prefixes(validation, scores, bins));
  Curve curve;
  for (const Prefix& prefix : prefixes) {
    CurvePoint point;
    point.q = prefix.q;
    point.n_t = prefix.treated.visitors;
    point.n_c = prefix.control.visitors;
    const double revenue =
        prefix.treated.revenue - prefix.control.revenue * ControlScale(prefix);
    const absl::StatusOr<double> roi = Roi(revenue, prefix.treated.cost);
    point.defined = roi.ok();
    point.value = roi.ok() ? *roi : 0.0;
    curve.points.push_back(point);
  }
  return curve;
}

absl::StatusOr<double> Auuc(const Curve& qini) {
  if (!qini.normalized) {
    return UndefinedRoiError(
        "AUUC needs a normalized Qini curve; the overall effect is not positive");
  }
  if (qini.points.size() < 2) return InsufficientDataError("curve too short");
  double area = 0;
  for (size_t i = 1; i < qini.points.size(); ++i) {
    const CurvePoint& a = qini.points[i - 1];
    const CurvePoint& b = qini.points[i];
    area += 0.5 * (a.value + b.value) * (b.q - a.q);
  }
  return area;
}

absl::StatusOr<MetricReport> TableMetrics(const Curve& qini,
                                          const Curve& qini_roi) {
  if (qini.points.size() != qini_roi.points.size()) {
    return ShapeError("Qini and Qini-ROI curves are on different grids");
  }
  MetricReport report;
  UPLIFT_ASSIGN_OR_RETURN(report.auuc, Auuc(qini));
  bool any_feasible = false;
  for (size_t i = 0; i < qini.points.size(); ++i) {
    const CurvePoint& roi = qini_roi.points[i];
    if (roi.q != qini.points[i].q) {
      return ShapeError("Qini and Qini-ROI curves are on different grids");
    }
    if (roi.defined && roi.value < 0) continue;
    report.max_population_at_roi0 = std::max(report.max_population_at_roi0, roi.q);
    report.max_ate_at_roi0 = any_feasible ? std::max(report.max_ate_at_roi0,
                                                     qini.points[i].value)
                                          : qini.points[i].value;
    any_feasible = true;
  }
  if (!any_feasible) {
    report.max_population_at_roi0 = 0;
    report.max_ate_at_roi0 = 0;
  }
  return report;
}

absl::StatusOr<Evaluation> Evaluate(const Dataset& validation,
                                    const UpliftScores& scores, int bins) {
  Evaluation evaluation;
  UPLIFT_ASSIGN_OR_RETURN(evaluation.qini, QiniCurve(validation, scores, bins));
  UPLIFT_ASSIGN_OR_RETURN(evaluation.qini_roi,
                          QiniRoiCurve(validation, scores, bins));
  UPLIFT_ASSIGN_OR_RETURN(evaluation.report,
                          TableMetrics(evaluation.qini, evaluation.qini_roi));
  return evaluation;
}

std::string CurveToCsv(const Curve& curve) {
  std::string out = "q,value,n_t,n_c,defined\n";
  for (const CurvePoint& point : curve.points) {
    absl::StrAppend(&out, FormatDouble(point.q), ",",
                    point.defined ? FormatDouble(point.value) : "", ",",
                    point.n_t, ",", point.n_c, ",", point.defined ? 1 : 0, "\n");
  }
  return out;
}

std::string MetricReportToJson(const MetricReport& report) {
  return JsonReport(report).dump(2) + "\n";
}

std::string CompareToCsv(const std::vector<CompareRow>& rows) {
  std::string out = "method,auuc,max_population_at_roi0,max_ate_at_roi0\n";
  for (const CompareRow& row : rows) {
    absl::StrAppend(&out, row.method, ",", FormatDouble(row.report.auuc), ",",
                    FormatDouble(row.report.max_population_at_roi0), ",",
                    FormatDouble(row.report.max_ate_at_roi0), "\n");
  }
  return out;
}

std::string CompareToJson(const std::vector<CompareRow>& rows) {
  Json root = Json::array();
  for (const CompareRow& row : rows) {
    Json entry;
    entry["method"] = row.method;
    entry.update(JsonReport(row.report));
    root.push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

}  // namespace uplift_roi::eval
