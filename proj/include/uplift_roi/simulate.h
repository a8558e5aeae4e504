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

// Synthetic randomized-trial populations with known potential outcomes.
//
// Every visitor belongs to one of four archetypes:
//
//   persuadable     buys more often when offered the promotion.
//   sure thing      buys anyway; the promotion barely moves it.
//   lost cause      zero purchase intent (also stands in for crawler traffic,
//                   placed at extreme feature values).
//   do not disturb  buys less often when offered the promotion.
//
// The control purchase probability is a logistic function of the features
// centred on the archetype's base rate; the treated probability adds the
// archetype uplift and is clamped to [0, 1]. A drift schedule shifts the base
// rate logits and the archetype mix linearly with the period index.

#ifndef UPLIFT_ROI_SIMULATE_H_
#define UPLIFT_ROI_SIMULATE_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "uplift_roi/core.h"
#include "uplift_roi/random.h"

namespace uplift_roi::simulate {

enum class Segment { kPersuadable = 0, kSureThing, kLostCause, kDoNotDisturb };
inline constexpr int kNumSegments = 4;

std::string_view SegmentName(Segment segment);

struct SegmentParams {
  double weight = 0.25;
  // Control purchase probability at the segment's feature mean. Ignored for
  // lost causes, whose probabilities are identically zero.
  double base_rate = 0.1;
  // Additive change in purchase probability under treatment.
  double uplift = 0.0;
  // Per-feature mean of the segment's Gaussian feature distribution.
  std::vector<double> feature_mean;
};

struct DriftSchedule {
  // Added to every base-rate logit once per period.
  double base_logit_shift = 0.0;
  // Added to the segment weights once per period, before clamping at zero
  // and renormalizing.
  std::array<double, kNumSegments> weight_shift{};
};

struct PopulationConfig {
  int feature_dim = 4;
  int64_t n = 100000;
  double propensity = 0.5;
  std::array<SegmentParams, kNumSegments> segments;
  // Logistic slope of the control purchase probability on each feature.
  std::vector<double> base_rate_coefficients;
  double feature_noise = 1.0;
  double revenue_control = 10.0;  // Revenue per purchase without promotion.
  double revenue_treated = 10.0;  // Revenue per purchase with promotion.
  double cost = 4.0;              // Promotion cost per treated purchase.
  DriftSchedule drift;
  uint64_t seed = 1;
};

// The default four-archetype population used by the tools and the online
// experiment: promotion-wide ROI is negative, a targeted subset is profitable.
PopulationConfig DefaultPopulationConfig();

absl::Status ValidateConfig(const PopulationConfig& config);

absl::StatusOr<PopulationConfig> PopulationConfigFromJson(std::string_view text);
std::string PopulationConfigToJson(const PopulationConfig& config);

// Ground truth for one visitor.
struct OracleRecord {
  std::vector<double> features;
  double p0 = 0.0;  // Pr(Y=1 | T=0, x)
  double p1 = 0.0;  // Pr(Y=1 | T=1, x)
  double r0 = 0.0;
  double r1 = 0.0;
  double c = 0.0;

  double TrueCateY() const { return p1 - p0; }
  // Expected incremental loss of treating this visitor.
  double TrueCateLoss() const { return p1 * (c - r1) + p0 * r0; }
};

struct Population {
  Dataset dataset;
  std::vector<OracleRecord> oracle;
  std::vector<Segment> segments;
};

// Random stream purposes. Each (period, purpose) pair addresses an
// independent family of per-visitor streams under one seed.
enum class StreamPurpose : uint64_t {
  kVisitor = 0,
  kTrial = 1,
  kArmRouting = 2,
  kOutcome = 3,
};
uint64_t StreamId(int period, StreamPurpose purpose);

// Segment weights in force at `period`, after drift and renormalization.
absl::StatusOr<std::array<double, kNumSegments>> SegmentWeightsAt(
    const PopulationConfig& config, int period);

// Draws visitor `index` of `period` without realizing treatment or outcome.
// Deterministic in (config, period, index).
struct Visitor {
  OracleRecord oracle;
  Segment segment = Segment::kPersuadable;
};
Visitor DrawVisitor(const PopulationConfig& config,
                    const std::array<double, kNumSegments>& weights, int period,
                    int64_t index);

// Realizes purchase, revenue and cost for a visitor under `treated`.
VisitRecord RealizeVisit(const OracleRecord& oracle, bool treated,
                         SplitMix64& rng);

// A randomized trial of config.n visitors with T ~ Bernoulli(propensity).
absl::StatusOr<Population> GenPopulation(const PopulationConfig& config,
                                         int period);

// Exact CATE_Y and CATE_Loss from the potential outcomes.
UpliftScores OracleScores(const std::vector<OracleRecord>& oracle);

std::string OracleToCsv(const std::vector<OracleRecord>& oracle);
// Reads `p0,p1,r0,r1,c` rows; features are left empty.
absl::StatusOr<std::vector<OracleRecord>> OracleFromCsv(std::string_view csv);

// "out/data.csv" -> "out/data.oracle.csv".
std::string OraclePathFor(const std::string& csv_path);

}  // namespace uplift_roi::simulate

#endif  // UPLIFT_ROI_SIMULATE_H_
