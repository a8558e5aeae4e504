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

#include "uplift_roi/harness.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/assign.h"
#include "uplift_roi/dataset_io.h"
#include "uplift_roi/random.h"
#include "uplift_roi/status.h"

namespace uplift_roi::harness {
namespace {

using Json = nlohmann::ordered_json;

Json OptionalJson(const std::optional<double>& value) {
  return value ? Json(*value) : Json(nullptr);
}

Json ThresholdJson(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

absl::Status CheckKeys(const Json& object, const std::set<std::string>& allowed,
                       const char* where) {
  if (!object.is_object()) {
    return SchemaError(absl::StrCat(where, " must be a JSON object"));
  }
  for (const auto& item : object.items()) {
    if (!allowed.count(item.key())) {
      return SchemaError(
          absl::StrCat("unknown field '", item.key(), "' in ", where));
    }
  }
  return absl::OkStatus();
}

template <typename T>
void ReadIfPresent(const Json& object, const char* key, T* out) {
  if (object.contains(key)) *out = object.at(key).get<T>();
}

int PickArm(const std::array<double, kNumArms>& weights, double u) {
  double cumulative = 0;
  for (int arm = 0; arm < kNumArms; ++arm) {
    cumulative += weights[arm];
    if (u < cumulative) return arm;
  }
  return kNumArms - 1;
}

// Population config with the experiment's seed.
simulate::PopulationConfig SeededPopulation(const ExperimentConfig& config) {
  simulate::PopulationConfig population = config.population;
  population.seed = config.seed;
  return population;
}

std::string CsvNumber(const std::optional<double>& value) {
  return value ? FormatDouble(*value) : "";
}

}  // namespace

absl::Status ValidateExperimentConfig(const ExperimentConfig& config) {
  UPLIFT_RETURN_IF_ERROR(simulate::ValidateConfig(config.population));
  double total = 0;
  for (const double weight : config.arm_weights) {
    if (!(weight > 0)) return ConfigError("arm weights must be positive");
    total += weight;
  }
  if (std::abs(total - 1) > 1e-9) {
    return ConfigError(absl::StrCat("arm weights sum to ", total, ", not 1"));
  }
  if (config.periods < 1) return ConfigError("periods must be >= 1");
  if (config.visitors_per_period < 1) {
    return ConfigError("visitors_per_period must be >= 1");
  }
  if (config.train_size < 1 || config.validation_size < 1) {
    return ConfigError("train_size and validation_size must be >= 1");
  }
  const CalibrationSettings& calibration = config.calibration;
  if (!(calibration.q_min >= 0 && calibration.q_min <= calibration.q_max &&
        calibration.q_max <= 1)) {
    return ConfigError("calibration bounds must satisfy 0 <= q_min <= q_max <= 1");
  }
  if (calibration.offline_points < 0) {
    return ConfigError("offline_points must be >= 0");
  }
  const calibrate::PointWeights& w = calibration.weights;
  if (!(w.offline > 0 && w.recent > 0 && w.older > 0)) {
    return ConfigError("calibration weights must be positive");
  }
  UPLIFT_RETURN_IF_ERROR(learners::ValidateLearnerConfig(config.uplift.learner));
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ExperimentConfigFromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("experiment config: ", e.what()));
  }
  UPLIFT_RETURN_IF_ERROR(CheckKeys(
      root,
      {"population", "arm_weights", "periods", "visitors_per_period",
       "train_size", "validation_size", "method", "uplift", "static_threshold",
       "calibration", "seed"},
      "experiment config"));
  ExperimentConfig config;
  try {
    if (root.contains("population")) {
      UPLIFT_ASSIGN_OR_RETURN(
          config.population,
          simulate::PopulationConfigFromJson(root["population"].dump()));
    }
    if (root.contains("arm_weights")) {
      const Json& weights = root["arm_weights"];
      UPLIFT_RETURN_IF_ERROR(
          CheckKeys(weights, {"A", "B", "C", "D"}, "arm_weights"));
      for (int arm = 0; arm < kNumArms; ++arm) {
        config.arm_weights[arm] = weights.value(kArmNames[arm], 0.0);
      }
    }
    ReadIfPresent(root, "periods", &config.periods);
    ReadIfPresent(root, "visitors_per_period", &config.visitors_per_period);
    ReadIfPresent(root, "train_size", &config.train_size);
    ReadIfPresent(root, "validation_size", &config.validation_size);
    ReadIfPresent(root, "seed", &config.seed);
    if (root.contains("method")) {
      UPLIFT_ASSIGN_OR_RETURN(
          config.method, uplift::ParseMethodId(root["method"].get<std::string>()));
    }
    if (root.contains("uplift")) {
      UPLIFT_ASSIGN_OR_RETURN(config.uplift,
                              uplift::UpliftConfigFromJson(root["uplift"].dump()));
    }
    if (root.contains("static_threshold") && !root["static_threshold"].is_null()) {
      config.static_threshold = root["static_threshold"].get<double>();
    }
    if (root.contains("calibration")) {
      const Json& calibration = root["calibration"];
      UPLIFT_RETURN_IF_ERROR(CheckKeys(
          calibration,
          {"enabled", "q_min", "q_max", "offline_points", "offline_weight",
           "recent_weight", "older_weight", "recent_age"},
          "calibration"));
      CalibrationSettings& out = config.calibration;
      ReadIfPresent(calibration, "enabled", &out.enabled);
      ReadIfPresent(calibration, "q_min", &out.q_min);
      ReadIfPresent(calibration, "q_max", &out.q_max);
      ReadIfPresent(calibration, "offline_points", &out.offline_points);
      ReadIfPresent(calibration, "offline_weight", &out.weights.offline);
      ReadIfPresent(calibration, "recent_weight", &out.weights.recent);
      ReadIfPresent(calibration, "older_weight", &out.weights.older);
      ReadIfPresent(calibration, "recent_age", &out.weights.recent_age);
    }
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("experiment config: ", e.what()));
  }
  UPLIFT_RETURN_IF_ERROR(ValidateExperimentConfig(config));
  return config;
}

std::string ExperimentConfigToJson(const ExperimentConfig& config) {
  Json root;
  root["population"] = Json::parse(simulate::PopulationConfigToJson(config.population));
  Json weights;
  for (int arm = 0; arm < kNumArms; ++arm) {
    weights[kArmNames[arm]] = config.arm_weights[arm];
  }
  root["arm_weights"] = std::move(weights);
  root["periods"] = config.periods;
  root["visitors_per_period"] = config.visitors_per_period;
  root["train_size"] = config.train_size;
  root["validation_size"] = config.validation_size;
  root["method"] = uplift::MethodName(config.method);
  root["uplift"] = Json::parse(uplift::UpliftConfigToJson(config.uplift));
  root["static_threshold"] = config.static_threshold
                                 ? ThresholdJson(*config.static_threshold)
                                 : Json(nullptr);
  const CalibrationSettings& calibration = config.calibration;
  root["calibration"] = {{"enabled", calibration.enabled},
                         {"q_min", calibration.q_min},
                         {"q_max", calibration.q_max},
                         {"offline_points", calibration.offline_points},
                         {"offline_weight", calibration.weights.offline},
                         {"recent_weight", calibration.weights.recent},
                         {"older_weight", calibration.weights.older},
                         {"recent_age", calibration.weights.recent_age}};
  root["seed"] = config.seed;
  return root.dump(2) + "\n";
}

absl::StatusOr<OfflineSetup> PrepareOffline(const ExperimentConfig& config) {
  UPLIFT_RETURN_IF_ERROR(ValidateExperimentConfig(config));
  simulate::PopulationConfig population = SeededPopulation(config);
  population.n = config.train_size;
  UPLIFT_ASSIGN_OR_RETURN(const simulate::Population train,
                          simulate::GenPopulation(population, 0));
  uplift::UpliftConfig uplift_config = config.uplift;
  uplift_config.learner.seed = config.seed;
  uplift_config.value_learner.seed = config.seed;
  UPLIFT_ASSIGN_OR_RETURN(
      uplift::UpliftModel scorer,
      uplift::UpliftModel::Fit(config.method, train.dataset, uplift_config));
  return PrepareOffline(config, std::move(scorer));
}

absl::StatusOr<OfflineSetup> PrepareOffline(const ExperimentConfig& config,
                                            uplift::UpliftModel scorer) {
  UPLIFT_RETURN_IF_ERROR(ValidateExperimentConfig(config));
  // The validation part continues the period-0 visitor sequence after the
  // training part.
  const simulate::PopulationConfig population = SeededPopulation(config);
  UPLIFT_ASSIGN_OR_RETURN(const auto weights,
                          simulate::SegmentWeightsAt(population, 0));
  std::vector<VisitRecord> records;
  records.reserve(config.validation_size);
  for (int64_t i = 0; i < config.validation_size; ++i) {
    const int64_t index = config.train_size + i;
    const simulate::Visitor visitor =
        simulate::DrawVisitor(population, weights, 0, index);
    SplitMix64 rng = SplitMix64::ForStream(
        population.seed, simulate::StreamId(0, simulate::StreamPurpose::kTrial),
        index);
    const bool treated = rng.Bernoulli(population.propensity);
    records.push_back(simulate::RealizeVisit(visitor.oracle, treated, rng));
  }

  OfflineSetup setup;
  setup.scorer = std::move(scorer);
  UPLIFT_ASSIGN_OR_RETURN(
      setup.validation,
      Dataset::Create(std::move(records), population.feature_dim,
                      population.propensity, population.seed));
  UPLIFT_ASSIGN_OR_RETURN(setup.validation_scores,
                          setup.scorer.Score(setup.validation.records()));
  // A null or negative overall effect leaves the Qini curve unnormalized and
  // the AUUC undefined; the curves still locate the operating point.
  UPLIFT_ASSIGN_OR_RETURN(
      setup.evaluation.qini,
      eval::QiniCurve(setup.validation, setup.validation_scores));
  UPLIFT_ASSIGN_OR_RETURN(
      setup.evaluation.qini_roi,
      eval::QiniRoiCurve(setup.validation, setup.validation_scores));
  if (setup.evaluation.qini.normalized) {
    UPLIFT_ASSIGN_OR_RETURN(setup.evaluation.report,
                            eval::TableMetrics(setup.evaluation.qini,
                                               setup.evaluation.qini_roi));
  }

  if (config.static_threshold) {
    setup.static_threshold = *config.static_threshold;
  } else {
    // Operating point with the largest Qini value among ROI >= 0 points.
    const auto& qini = setup.evaluation.qini.points;
    const auto& roi = setup.evaluation.qini_roi.points;
    double best_q = 0, best_value = -kInf;
    for (size_t i = 0; i < qini.size(); ++i) {
      if (roi[i].defined && roi[i].value < 0) continue;
      if (qini[i].value > best_value) {
        best_value = qini[i].value;
        best_q = qini[i].q;
      }
    }
    UPLIFT_ASSIGN_OR_RETURN(setup.static_threshold,
                            calibrate::QToThreshold(setup.validation_scores, best_q));
  }
  setup.static_q = assign::ThresholdPolicy(setup.validation_scores,
                                           setup.static_threshold)
                       .exposed_fraction;
  setup.offline_points = calibrate::OfflinePoints(
      setup.evaluation.qini_roi, config.calibration.offline_points,
      config.calibration.weights.offline);
  return setup;
}

double PeriodReport::ExposedFraction(int arm) const {
  return arms[arm].visitors == 0
             ? 0.0
             : static_cast<double>(arms[arm].treated) / arms[arm].visitors;
}

std::vector<std::array<ArmMetrics, kNumArms>> CumulativeMetrics(
    std::span<const PeriodReport> reports) {
  std::vector<std::array<ArmMetrics, kNumArms>> series;
  std::array<ArmTotals, kNumArms> totals;
  for (const PeriodReport& report : reports) {
    for (int arm = 0; arm < kNumArms; ++arm) totals[arm] += report.arms[arm];
    std::array<ArmMetrics, kNumArms> metrics;
    if (totals[kArmA].visitors > 0) metrics[kArmA].ate = 0.0;
    for (int arm = kArmB; arm < kNumArms; ++arm) {
      const absl::StatusOr<GroupDeltas> deltas =
          ComputeGroupDeltas(totals[arm], totals[kArmA]);
      if (!deltas.ok()) continue;
      metrics[arm].ate = deltas->purchases / totals[arm].visitors;
      const absl::StatusOr<double> roi = Roi(deltas->revenue, deltas->cost);
      if (roi.ok()) metrics[arm].roi = *roi;
    }
    const std::optional<double> reference = metrics[kArmB].ate;
    if (reference && *reference != 0) {
      for (int arm = 0; arm < kNumArms; ++arm) {
        if (metrics[arm].ate) {
          metrics[arm].relative_ate = *metrics[arm].ate / *reference;
        }
      }
    }
    series.push_back(metrics);
  }
  return series;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const OfflineSetup& offline) {
  UPLIFT_RETURN_IF_ERROR(ValidateExperimentConfig(config));
  const simulate::PopulationConfig population = SeededPopulation(config);
  const CalibrationSettings& calibration = config.calibration;

  struct OnlinePoint {
    int period;
    double q;
    double roi;
  };
  std::vector<OnlinePoint> online;
  double theta_d = offline.static_threshold;
  double q_d = offline.static_q;
  bool calibrated = false;

  ExperimentResult result;
  std::vector<double> keys(config.visitors_per_period);
  for (int period = 1; period <= config.periods; ++period) {
    UPLIFT_ASSIGN_OR_RETURN(const auto weights,
                            simulate::SegmentWeightsAt(population, period));
    PeriodReport report;
    report.period = period;
    report.thresholds = {kInf, -kInf, offline.static_threshold, theta_d};
    report.q_d = q_d;
    report.calibrated = calibrated;
    for (int64_t i = 0; i < config.visitors_per_period; ++i) {
      const simulate::Visitor visitor =
          simulate::DrawVisitor(population, weights, period, i);
      UPLIFT_ASSIGN_OR_RETURN(const RecordScore score,
                              offline.scorer.ScoreOne(visitor.oracle.features));
      keys[i] = score.sort_key;
      SplitMix64 routing = SplitMix64::ForStream(
          config.seed,
          simulate::StreamId(period, simulate::StreamPurpose::kArmRouting), i);
      const int arm = PickArm(config.arm_weights, routing.Uniform());
      bool treat = false;
      switch (arm) {
        case kArmA:
          break;
        case kArmB:
          treat = true;
          break;
        default:
          treat = assign::ShouldTreat(score, report.thresholds[arm]);
      }
      SplitMix64 outcome = SplitMix64::ForStream(
          config.seed,
          simulate::StreamId(period, simulate::StreamPurpose::kOutcome), i);
      report.arms[arm].Add(simulate::RealizeVisit(visitor.oracle, treat, outcome));
    }
    for (const ArmTotals& totals : report.arms) {
      if (totals.visitors == 0) report.flagged = true;
    }
    result.reports.push_back(report);
    result.reports.back().cumulative = CumulativeMetrics(result.reports).back();

    if (!calibration.enabled || period == config.periods) continue;
    const std::optional<double>& roi_d =
        result.reports.back().cumulative[kArmD].roi;
    if (roi_d) online.push_back({period, report.ExposedFraction(kArmD), *roi_d});
    std::vector<calibrate::CalibrationPoint> points = offline.offline_points;
    for (const OnlinePoint& point : online) {
      points.push_back(
          {point.q, point.roi, calibration.weights.Online(period - point.period)});
    }
    const absl::StatusOr<calibrate::CalibrationCurve> curve =
        calibrate::FitRoiCurve(points);
    calibrated = false;
    if (!curve.ok()) continue;
    const absl::StatusOr<double> q_star =
        calibrate::SolveQStar(*curve, calibration.q_min, calibration.q_max);
    if (!q_star.ok()) continue;
    UPLIFT_ASSIGN_OR_RETURN(theta_d, calibrate::QToThreshold(keys, *q_star));
    q_d = *q_star;
    calibrated = true;
    result.calibration_log +=
        calibrate::CalibrationLogLine(period, points, *curve, q_d, theta_d);
  }
  return result;
}

std::string ReportsToJsonLines(std::span<const PeriodReport> reports) {
  std::string out;
  for (const PeriodReport& report : reports) {
    Json line;
    line["period"] = report.period;
    Json arms;
    for (int arm = 0; arm < kNumArms; ++arm) {
      const ArmTotals& totals = report.arms[arm];
      const ArmMetrics& metrics = report.cumulative[arm];
      arms[kArmNames[arm]] = {
          {"visitors", totals.visitors},
          {"treated", totals.treated},
          {"purchases", totals.purchases},
          {"revenue", totals.revenue},
          {"cost", totals.cost},
          {"threshold", ThresholdJson(report.thresholds[arm])},
          {"cum_ate", OptionalJson(metrics.ate)},
          {"cum_roi", OptionalJson(metrics.roi)},
          {"rel_ate", OptionalJson(metrics.relative_ate)}};
    }
    line["arms"] = std::move(arms);
    line["theta_d"] = ThresholdJson(report.thresholds[kArmD]);
    line["q_d"] = report.q_d;
    line["calibrated"] = report.calibrated;
    line["flagged"] = report.flagged;
    out += line.dump() + "\n";
  }
  return out;
}

std::string ReportsToCsv(std::span<const PeriodReport> reports) {
  std::string out = "period,arm,cum_roi,rel_ate,q,theta,calibrated\n";
  for (const PeriodReport& report : reports) {
    for (int arm = 0; arm < kNumArms; ++arm) {
      const ArmMetrics& metrics = report.cumulative[arm];
      absl::StrAppend(&out, report.period, ",", kArmNames[arm], ",",
                      CsvNumber(metrics.roi), ",",
                      CsvNumber(metrics.relative_ate), ",",
                      FormatDouble(report.ExposedFraction(arm)), ",",
                      FormatDouble(report.thresholds[arm]), ",",
                      arm == kArmD && report.calibrated ? 1 : 0, "\n");
    }
  }
  return out;
}

}  // namespace uplift_roi::harness
