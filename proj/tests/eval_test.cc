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
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "uplift_roi/simulate.h"

namespace uplift_roi::eval {
namespace {

using ::uplift_roi::testing::Visit;

Curve GridCurve(int bins, double (*f)(double)) {
  Curve curve;
  for (int j = 0; j <= bins; ++j) {
    const double q = static_cast<double>(j) / bins;
    curve.points.push_back({q, f(q), 0, 0, true});
  }
  return curve;
}

UpliftScores Keys(std::span<const double> keys) {
  UpliftScores scores(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) scores[i].sort_key = keys[i];
  return scores;
}

TEST(QiniCurve, TwoRecordToy) {
  auto dataset = Dataset::Create(
      {Visit({0}, true, true, 10, 4), Visit({0}, false, false)}, 1, 0.5);
  const std::vector<double> keys = {2.0, 1.0};
  auto curve = QiniCurve(*dataset, Keys(keys), 2);
  ASSERT_TRUE(curve.ok());
  ASSERT_EQ(curve->points.size(), 3u);
  EXPECT_TRUE(curve->normalized);
  EXPECT_EQ(curve->points[0].value, 0.0);
  EXPECT_EQ(curve->points[1].value, 1.0);
  EXPECT_EQ(curve->points[2].value, 1.0);
  EXPECT_EQ(curve->points[1].n_t, 1);
  EXPECT_EQ(curve->points[1].n_c, 0);
}

TEST(QiniCurve, InputErrors) {
  auto dataset = Dataset::Create(
      {Visit({0}, true, true, 10, 4), Visit({0}, false, false)}, 1, 0.5);
  const std::vector<double> one = {1.0};
  EXPECT_EQ(QiniCurve(*dataset, Keys(one)).status().code(),
            absl::StatusCode::kFailedPrecondition);
  const std::vector<double> two = {1.0, 2.0};
  EXPECT_EQ(QiniCurve(*dataset, Keys(two), 0).status().code(),
            absl::StatusCode::kInvalidArgument);
  auto treated_only = Dataset::Create(
      {Visit({0}, true, true, 10, 4), Visit({0}, true, false)}, 1, 0.5);
  EXPECT_EQ(QiniCurve(*treated_only, Keys(two)).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(QiniCurve, NonPositiveEffectIsFlagged) {
  auto dataset = Dataset::Create(
      {Visit({0}, true, false), Visit({0}, false, true, 10, 0)}, 1, 0.5);
  const std::vector<double> keys = {2.0, 1.0};
  auto curve = QiniCurve(*dataset, Keys(keys), 2);
  ASSERT_TRUE(curve.ok());
  EXPECT_FALSE(curve->normalized);
  EXPECT_EQ(curve->points.back().value, -1.0);
  EXPECT_FALSE(Auuc(*curve).ok());
}

// Prefix formula evaluated directly on the sorted records.
double RawDelta(const Dataset& data, std::span<const double> keys, size_t k) {
  std::vector<size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return keys[a] > keys[b]; });
  double yt = 0, yc = 0, nt = 0, nc = 0;
  for (size_t i = 0; i < k; ++i) {
    const VisitRecord& r = data.record(order[i]);
    (r.treatment ? yt : yc) += r.outcome;
    (r.treatment ? nt : nc) += 1;
  }
  return nc == 0 ? yt : yt - yc * nt / nc;
}

TEST(QiniCurve, MatchesDirectPrefixFormula) {
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  config.n = 3000;
  auto population = simulate::GenPopulation(config, 0);
  const Dataset& data = population->dataset;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> keys(data.size());
  for (double& k : keys) k = g(rng);
  const int bins = 50;
  auto curve = QiniCurve(data, Keys(keys), bins);
  ASSERT_TRUE(curve.ok());
  ASSERT_TRUE(curve->normalized);
  const double total = RawDelta(data, keys, data.size());
  for (int j = 0; j <= bins; ++j) {
    const size_t k = static_cast<size_t>(std::llround(double(j) / bins * data.size()));
    EXPECT_NEAR(curve->points[j].value, RawDelta(data, keys, k) / total, 1e-12);
  }

  // At q = 1 the prefix estimator is the group-level ATE.
  auto deltas = ComputeGroupDeltas(data.Arm(true), data.Arm(false));
  const double nt = static_cast<double>(data.Arm(true).size());
  EXPECT_NEAR(total / nt, deltas->purchases / nt, 1e-12);

  auto roi = QiniRoiCurve(data, Keys(keys), bins);
  EXPECT_NEAR(roi->points.back().value, *Roi(deltas->revenue, deltas->cost),
              1e-12);
}

TEST(QiniCurve, InvariantUnderIncreasingTransform) {
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  config.n = 4000;
  auto population = simulate::GenPopulation(config, 0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> keys(config.n), transformed(config.n);
  for (int64_t i = 0; i < config.n; ++i) {
    keys[i] = g(rng);
    transformed[i] = keys[i] * keys[i] * keys[i] + 2 * keys[i] + 5;
  }
  auto a = Evaluate(population->dataset, Keys(keys));
  auto b = Evaluate(population->dataset, Keys(transformed));
  ASSERT_TRUE(a.ok() && b.ok());
  for (size_t j = 0; j < a->qini.points.size(); ++j) {
    EXPECT_EQ(a->qini.points[j].value, b->qini.points[j].value);
    EXPECT_EQ(a->qini_roi.points[j].value, b->qini_roi.points[j].value);
  }
  EXPECT_EQ(a->report.auuc, b->report.auuc);
  EXPECT_EQ(a->report.max_ate_at_roi0, b->report.max_ate_at_roi0);
}

TEST(QiniCurve, OracleOnHalfPersuadablePopulationSaturates) {
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  config.n = 100000;
  config.segments[0].weight = 0.5;  // persuadable
  config.segments[1].weight = 0.5;  // sure thing, no effect
  config.segments[1].uplift = 0.0;
  config.segments[2].weight = 0.0;
  config.segments[3].weight = 0.0;
  auto population = simulate::GenPopulation(config, 0);
  std::vector<double> keys;
  for (const auto& o : population->oracle) keys.push_back(o.TrueCateY());
  auto curve = QiniCurve(population->dataset, Keys(keys));
  ASSERT_TRUE(curve.ok());
  const auto& points = curve->points;
  EXPECT_NEAR(points[100].value, 1.0, 0.1);  // q = 0.5
  for (size_t j = 110; j < points.size(); ++j) {
    EXPECT_NEAR(points[j].value, 1.0, 0.1);
  }
}

TEST(Auuc, AnalyticShapes) {
  EXPECT_NEAR(*Auuc(GridCurve(200, [](double q) { return q; })), 0.5, 1e-12);
  EXPECT_NEAR(
      *Auuc(GridCurve(200, [](double q) { return std::min(2 * q, 1.0); })),
      0.75, 1e-12);
  const auto box = [](double q) { return q > 0 ? 1.0 : 0.0; };
  EXPECT_NEAR(*Auuc(GridCurve(10, box)), 0.95, 1e-12);
  EXPECT_NEAR(*Auuc(GridCurve(10000, box)), 1.0, 1e-4);
}

TEST(QiniRoiCurve, HandPrefixAndZeroCost) {
  // Top record: treated purchase worth 24 at cost 4, next a control
  // purchase worth 8. Prefix 1 has Delta revenue 24 - 0, investment 4.
  auto dataset = Dataset::Create(
      {Visit({0}, true, true, 24, 4), Visit({0}, false, true, 8, 0),
       Visit({0}, true, false), Visit({0}, false, false)},
      1, 0.5);
  const std::vector<double> keys = {4, 3, 2, 1};
  auto curve = QiniRoiCurve(*dataset, Keys(keys), 4);
  ASSERT_TRUE(curve.ok());
  EXPECT_FALSE(curve->points[0].defined);
  EXPECT_DOUBLE_EQ(curve->points[1].value, 5.0);  // (24 - 4) / 4
  EXPECT_DOUBLE_EQ(curve->points[2].value, (24 - 8 - 4) / 4.0);
  EXPECT_DOUBLE_EQ(curve->points[4].value, (24 - 8 - 4) / 4.0);

  auto free = Dataset::Create(
      {Visit({0}, true, true, 24, 0), Visit({0}, false, true, 8, 0)}, 1, 0.5);
  const std::vector<double> two = {2, 1};
  auto free_curve = QiniRoiCurve(*free, Keys(two), 2);
  for (const CurvePoint& p : free_curve->points) EXPECT_FALSE(p.defined);
}

TEST(QiniRoiCurve, DecreasesOnceCandidatesEnter) {
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  config.n = 100000;
  auto population = simulate::GenPopulation(config, 0);
  const UpliftScores oracle = simulate::OracleScores(population->oracle);
  size_t free_lunch = 0;
  for (const auto& s : oracle) free_lunch += s.sort_key == kInf;
  auto curve = QiniRoiCurve(population->dataset, oracle);
  std::vector<double> qs, values;
  const double boundary = static_cast<double>(free_lunch) / oracle.size();
  for (const CurvePoint& p : curve->points) {
    if (p.q > boundary && p.defined) {
      qs.push_back(p.q);
      values.push_back(p.value);
    }
  }
  ASSERT_GT(qs.size(), 20u);
  EXPECT_LT(testing::Spearman(qs, values), 0.0);
}

TEST(TableMetrics, Cases) {
  const int bins = 10;
  const Curve qini = GridCurve(bins, [](double q) {
    return q <= 0.3 ? q / 0.3 * 0.8 : 0.8 + (q - 0.3) / 0.7 * 0.2;
  });
  Curve crossing = GridCurve(bins, [](double q) { return 0.3 - q; });
  crossing.points[3].value = 0.0;  // exactly on the boundary
  auto report = TableMetrics(qini, crossing);
  ASSERT_TRUE(report.ok());
  EXPECT_NEAR(report->max_population_at_roi0, 0.3, 1e-12);
  EXPECT_NEAR(report->max_ate_at_roi0, 0.8, 1e-12);

  Curve negative = GridCurve(bins, [](double) { return -0.5; });
  negative.points[0].defined = false;  // q = 0 has no investment
  report = TableMetrics(qini, negative);
  EXPECT_EQ(report->max_population_at_roi0, 0.0);
  EXPECT_EQ(report->max_ate_at_roi0, 0.0);
  EXPECT_GT(report->auuc, 0.5);

  const Curve positive = GridCurve(bins, [](double) { return 0.2; });
  const Curve bumpy = GridCurve(bins, [](double q) { return q < 0.5 ? 2 * q * 1.1 : 1.1 - (q - 0.5) * 0.2; });
  report = TableMetrics(bumpy, positive);
  EXPECT_EQ(report->max_population_at_roi0, 1.0);
  EXPECT_NEAR(report->max_ate_at_roi0, 1.1, 1e-12);
}

TEST(Output, CsvAndJson) {
  Curve curve = GridCurve(2, [](double q) { return q; });
  curve.points[0].defined = false;
  const std::string csv = CurveToCsv(curve);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "q,value,n_t,n_c,defined");
  EXPECT_NE(csv.find("\n0,,0,0,0\n"), std::string::npos);

  const std::vector<CompareRow> rows = {{"a", {0.7, 0.3, 0.8}},
                                        {"b", {0.6, 0.0, 0.0}}};
  const std::string table = CompareToCsv(rows);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_EQ(table.substr(0, table.find('\n')),
            "method,auuc,max_population_at_roi0,max_ate_at_roi0");
  EXPECT_NE(CompareToJson(rows).find("\"b\""), std::string::npos);
}

}  // namespace
}  // namespace uplift_roi::eval
