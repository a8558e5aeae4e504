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

// Multi-period online experiment with four randomly assigned arms:
//
//   A  control, never treated
//   B  everybody treated
//   C  treated iff sort_key >= a fixed threshold chosen offline
//   D  like C, but the threshold is recalibrated after every period from the
//      fitted ROI(Q) curve
//
// Before period 1 a scorer is trained on a period-0 randomized trial and
// frozen. Each period draws fresh visitors at that period's drift, routes
// them to arms and samples outcomes from the oracle probabilities.

#ifndef UPLIFT_ROI_HARNESS_H_
#define UPLIFT_ROI_HARNESS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "uplift_roi/calibrate.h"
#include "uplift_roi/core.h"
#include "uplift_roi/eval.h"
#include "uplift_roi/simulate.h"
#include "uplift_roi/uplift.h"

namespace uplift_roi::harness {

enum Arm { kArmA = 0, kArmB, kArmC, kArmD };
inline constexpr int kNumArms = 4;
inline constexpr std::array<const char*, kNumArms> kArmNames = {"A", "B", "C",
                                                                 "D"};

struct CalibrationSettings {
  // When false, arm D keeps its initial threshold.
  bool enabled = true;
  double q_min = calibrate::kDefaultQMin;
  double q_max = calibrate::kDefaultQMax;
  // Qini-ROI points of the offline validation curve fed to every refit.
  int offline_points = 20;
  calibrate::PointWeights weights;
};

struct ExperimentConfig {
  simulate::PopulationConfig population = simulate::DefaultPopulationConfig();
  std::array<double, kNumArms> arm_weights = {0.25, 0.25, 0.25, 0.25};
  int periods = 8;
  int64_t visitors_per_period = 200000;
  // Period-0 trial split into a training and a validation part.
  int64_t train_size = 200000;
  int64_t validation_size = 100000;
  uplift::MethodId method = uplift::MethodId::kRetrospective;
  uplift::UpliftConfig uplift;
  // Arm C's threshold. Unset: the offline operating point with the largest
  // Qini value at ROI >= 0 on the validation part.
  std::optional<double> static_threshold;
  CalibrationSettings calibration;
  // Overrides the population and learner seeds.
  uint64_t seed = 1;
};

absl::Status ValidateExperimentConfig(const ExperimentConfig& config);
absl::StatusOr<ExperimentConfig> ExperimentConfigFromJson(std::string_view text);
std::string ExperimentConfigToJson(const ExperimentConfig& config);

// Everything the online phase needs from period 0.
struct OfflineSetup {
  uplift::UpliftModel scorer;
  Dataset validation;
  UpliftScores validation_scores;
  eval::Evaluation evaluation;
  double static_threshold = kInf;
  // Exposure of the static threshold on the validation part.
  double static_q = 0.0;
  std::vector<calibrate::CalibrationPoint> offline_points;
};

// Trains the scorer on the period-0 training part.
absl::StatusOr<OfflineSetup> PrepareOffline(const ExperimentConfig& config);
// Uses an already fitted scorer.
absl::StatusOr<OfflineSetup> PrepareOffline(const ExperimentConfig& config,
                                            uplift::UpliftModel scorer);

struct ArmMetrics {
  // Unset for arm A, for an arm with no visitors and when there was no
  // investment.
  std::optional<double> ate;
  std::optional<double> roi;
  std::optional<double> relative_ate;
};

struct PeriodReport {
  int period = 0;
  std::array<ArmTotals, kNumArms> arms;
  // Treatment thresholds in force; A and B are +inf and -inf.
  std::array<double, kNumArms> thresholds{};
  // Arm D's target exposure in force this period.
  double q_d = 0.0;
  // Whether arm D's threshold came from a refit.
  bool calibrated = false;
  // Some arm had no visitors this period.
  bool flagged = false;
  // Cumulative metrics over periods 1..period.
  std::array<ArmMetrics, kNumArms> cumulative;

  double ExposedFraction(int arm) const;
};

// Cumulative ATE, ROI and relative ATE against arm A after each report.
std::vector<std::array<ArmMetrics, kNumArms>> CumulativeMetrics(
    std::span<const PeriodReport> reports);

struct ExperimentResult {
  std::vector<PeriodReport> reports;
  // One JSON line per refit.
  std::string calibration_log;
};

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const OfflineSetup& offline);

std::string ReportsToJsonLines(std::span<const PeriodReport> reports);
// `period,arm,cum_roi,rel_ate,q,theta,calibrated`.
std::string ReportsToCsv(std::span<const PeriodReport> reports);

}  // namespace uplift_roi::harness

#endif  // UPLIFT_ROI_HARNESS_H_
