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

#include "uplift_roi/simulate.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/dataset_io.h"
#include "uplift_roi/status.h"

namespace uplift_roi::simulate {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<const char*, kNumSegments> kSegmentKeys = {
    "persuadable", "sure_thing", "lost_cause", "do_not_disturb"};

double Logit(double p) { return std::log(p / (1 - p)); }
double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <typename T>
absl::Status ReadField(const Json& object, const char* key, T* out) {
  if (!object.contains(key)) return absl::OkStatus();
  try {
    *out = object.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("field '", key, "': ", e.what()));
  }
  return absl::OkStatus();
}

absl::Status CheckKeys(const Json& object, const std::set<std::string>& allowed,
                       std::string_view where) {
  if (!object.is_object()) {
    return SchemaError(absl::StrCat(ToAbsl(where), " must be a JSON object"));
  }
  for (const auto& item : object.items()) {
    if (!allowed.count(item.key())) {
      return SchemaError(
          absl::StrCat("unknown field '", item.key(), "' in ", ToAbsl(where)));
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view SegmentName(Segment segment) {
  return kSegmentKeys[static_cast<int>(segment)];
}

PopulationConfig DefaultPopulationConfig() {
  PopulationConfig config;
  config.feature_dim = 4;
  config.n = 100000;
  config.propensity = 0.5;
  config.base_rate_coefficients = {1.0, 0.5, 0.0, 0.0};
  config.feature_noise = 1.0;
  config.revenue_control = 10.0;
  config.revenue_treated = 10.0;
  config.cost = 4.0;
  auto& persuadable = config.segments[0];
  persuadable = {0.35, 0.25, 0.15, {0.0, 0.0, 2.0, 2.0}};
  auto& sure_thing = config.segments[1];
  sure_thing = {0.30, 0.45, 0.03, {0.0, 0.0, 2.0, -2.0}};
  auto& lost_cause = config.segments[2];
  lost_cause = {0.25, 0.0, 0.0, {0.0, 0.0, -4.0, -4.0}};
  auto& do_not_disturb = config.segments[3];
  do_not_disturb = {0.10, 0.25, -0.03, {0.0, 0.0, -2.0, 2.0}};
  config.drift.base_logit_shift = -0.1;
  config.seed = 1;
  return config;
}

absl::Status ValidateConfig(const PopulationConfig& config) {
  if (config.feature_dim < 1) return ConfigError("feature_dim must be >= 1");
  if (config.n < 1) return ConfigError("n must be >= 1");
  if (!(config.propensity > 0 && config.propensity < 1)) {
    return ConfigError("propensity must lie in (0,1)");
  }
  if (!config.base_rate_coefficients.empty() &&
      static_cast<int>(config.base_rate_coefficients.size()) !=
          config.feature_dim) {
    return ConfigError("base_rate_coefficients must have feature_dim entries");
  }
  if (!(config.feature_noise >= 0)) {
    return ConfigError("feature_noise must be >= 0");
  }
  if (!(config.revenue_control >= 0 && config.revenue_treated >= 0 &&
        config.cost >= 0)) {
    return ConfigError("revenues and cost must be nonnegative");
  }
  double total = 0;
  for (int s = 0; s < kNumSegments; ++s) {
    const SegmentParams& segment = config.segments[s];
    if (!(segment.weight >= 0)) {
      return ConfigError(absl::StrCat(kSegmentKeys[s], ": negative weight"));
    }
    total += segment.weight;
    if (!segment.feature_mean.empty() &&
        static_cast<int>(segment.feature_mean.size()) != config.feature_dim) {
      return ConfigError(absl::StrCat(
          kSegmentKeys[s], ": feature_mean must have feature_dim entries"));
    }
    if (static_cast<Segment>(s) == Segment::kLostCause) continue;
    if (!(segment.base_rate > 0 && segment.base_rate < 1)) {
      return ConfigError(
          absl::StrCat(kSegmentKeys[s], ": base_rate must lie in (0,1)"));
    }
    if (!(segment.uplift >= -1 && segment.uplift <= 1)) {
      return ConfigError(
          absl::StrCat(kSegmentKeys[s], ": uplift must lie in [-1,1]"));
    }
  }
  if (total <= 0) return ConfigError("segment weights are all zero");
  if (std::abs(total - 1.0) > 1e-6) {
    return ConfigError(absl::StrCat("segment weights sum to ", total, ", not 1"));
  }
  return absl::OkStatus();
}

absl::StatusOr<PopulationConfig> PopulationConfigFromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("population config: ", e.what()));
  }
  UPLIFT_RETURN_IF_ERROR(CheckKeys(
      root,
      {"feature_dim", "n", "propensity", "segments", "base_rate_coefficients",
       "feature_noise", "revenue_control", "revenue_treated", "cost", "drift",
       "seed"},
      "population config"));
  PopulationConfig config = DefaultPopulationConfig();
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "feature_dim", &config.feature_dim));
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "n", &config.n));
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "propensity", &config.propensity));
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "base_rate_coefficients",
                                   &config.base_rate_coefficients));
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "feature_noise", &config.feature_noise));
  UPLIFT_RETURN_IF_ERROR(
      ReadField(root, "revenue_control", &config.revenue_control));
  UPLIFT_RETURN_IF_ERROR(
      ReadField(root, "revenue_treated", &config.revenue_treated));
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "cost", &config.cost));
  UPLIFT_RETURN_IF_ERROR(ReadField(root, "seed", &config.seed));
  if (root.contains("segments")) {
    const Json& segments = root["segments"];
    UPLIFT_RETURN_IF_ERROR(CheckKeys(
        segments, {kSegmentKeys.begin(), kSegmentKeys.end()}, "segments"));
    for (int s = 0; s < kNumSegments; ++s) {
      if (!segments.contains(kSegmentKeys[s])) {
        // A segment omitted from an explicit mix carries no weight.
        config.segments[s].weight = 0;
        continue;
      }
      const Json& item = segments[kSegmentKeys[s]];
      UPLIFT_RETURN_IF_ERROR(CheckKeys(
          item, {"weight", "base_rate", "uplift", "feature_mean"},
          kSegmentKeys[s]));
      SegmentParams& segment = config.segments[s];
      UPLIFT_RETURN_IF_ERROR(ReadField(item, "weight", &segment.weight));
      UPLIFT_RETURN_IF_ERROR(ReadField(item, "base_rate", &segment.base_rate));
      UPLIFT_RETURN_IF_ERROR(ReadField(item, "uplift", &segment.uplift));
      UPLIFT_RETURN_IF_ERROR(
          ReadField(item, "feature_mean", &segment.feature_mean));
    }
  }
  if (root.contains("drift")) {
    const Json& drift = root["drift"];
    UPLIFT_RETURN_IF_ERROR(
        CheckKeys(drift, {"base_logit_shift", "weight_shift"}, "drift"));
    config.drift = DriftSchedule{};
    UPLIFT_RETURN_IF_ERROR(
        ReadField(drift, "base_logit_shift", &config.drift.base_logit_shift));
    if (drift.contains("weight_shift")) {
      const Json& shift = drift["weight_shift"];
      UPLIFT_RETURN_IF_ERROR(CheckKeys(
          shift, {kSegmentKeys.begin(), kSegmentKeys.end()}, "weight_shift"));
      for (int s = 0; s < kNumSegments; ++s) {
        UPLIFT_RETURN_IF_ERROR(
            ReadField(shift, kSegmentKeys[s], &config.drift.weight_shift[s]));
      }
    }
  }
  // Dimension-dependent defaults no longer apply when d changes.
  if (config.feature_dim != 4) {
    if (!root.contains("base_rate_coefficients")) {
      config.base_rate_coefficients.assign(config.feature_dim, 0.0);
      config.base_rate_coefficients[0] = 1.0;
    }
    for (auto& segment : config.segments) {
      if (static_cast<int>(segment.feature_mean.size()) != config.feature_dim) {
        segment.feature_mean.clear();
      }
    }
  }
  UPLIFT_RETURN_IF_ERROR(ValidateConfig(config));
  return config;
}

std::string PopulationConfigToJson(const PopulationConfig& config) {
  Json root;
  root["feature_dim"] = config.feature_dim;
  root["n"] = config.n;
  root["propensity"] = config.propensity;
  Json segments = Json::object();
  for (int s = 0; s < kNumSegments; ++s) {
    const SegmentParams& segment = config.segments[s];
    segments[kSegmentKeys[s]] = {{"weight", segment.weight},
                                 {"base_rate", segment.base_rate},
                                 {"uplift", segment.uplift},
                                 {"feature_mean", segment.feature_mean}};
  }
  root["segments"] = segments;
  root["base_rate_coefficients"] = config.base_rate_coefficients;
  root["feature_noise"] = config.feature_noise;
  root["revenue_control"] = config.revenue_control;
  root["revenue_treated"] = config.revenue_treated;
  root["cost"] = config.cost;
  Json shift = Json::object();
  for (int s = 0; s < kNumSegments; ++s) {
    shift[kSegmentKeys[s]] = config.drift.weight_shift[s];
  }
  root["drift"] = {{"base_logit_shift", config.drift.base_logit_shift},
                   {"weight_shift", shift}};
  root["seed"] = config.seed;
  return root.dump(2) + "\n";
}

uint64_t StreamId(int period, StreamPurpose purpose) {
  // The period is folded into the high bits.
  return (static_cast<uint64_t>(period) << 8) | static_cast<uint64_t>(purpose);
}

absl::StatusOr<std::array<double, kNumSegments>> SegmentWeightsAt(
    const PopulationConfig& config, int period) {
  std::array<double, kNumSegments> weights{};
  double total = 0;
  for (int s = 0; s < kNumSegments; ++s) {
    weights[s] = std::max(
        0.0, config.segments[s].weight + period * config.drift.weight_shift[s]);
    total += weights[s];
  }
  if (total <= 0) {
    return ConfigError(
        absl::StrCat("drift leaves no segment weight at period ", period));
  }
  for (double& weight : weights) weight /= total;
  return weights;
}

Visitor DrawVisitor(const PopulationConfig& config,
                    const std::array<double, kNumSegments>& weights, int period,
                    int64_t index) {
  SplitMix64 rng = SplitMix64::ForStream(
      config.seed, StreamId(period, StreamPurpose::kVisitor), index);
  const double pick = rng.Uniform();
  int s = -1;
  int last_nonzero = 0;
  double cumulative = 0;
  for (int k = 0; k < kNumSegments; ++k) {
    if (weights[k] <= 0) continue;
    last_nonzero = k;
    cumulative += weights[k];
    if (pick < cumulative) {
      s = k;
      break;
    }
  }
  // Rounding can leave the cumulative sum just below 1.
  if (s < 0) s = last_nonzero;

  Visitor visitor;
  visitor.segment = static_cast<Segment>(s);
  const SegmentParams& params = config.segments[s];
  OracleRecord& oracle = visitor.oracle;
  oracle.features.resize(config.feature_dim);
  double linear = 0;
  for (int j = 0; j < config.feature_dim; ++j) {
    const double mean = params.feature_mean.empty() ? 0.0 : params.feature_mean[j];
    const double deviation = config.feature_noise * rng.Normal();
    oracle.features[j] = mean + deviation;
    if (!config.base_rate_coefficients.empty()) {
      linear += config.base_rate_coefficients[j] * deviation;
    }
  }
  if (visitor.segment == Segment::kLostCause) {
    oracle.p0 = 0;
    oracle.p1 = 0;
  } else {
    oracle.p0 = Sigmoid(Logit(params.base_rate) +
                        period * config.drift.base_logit_shift + linear);
    oracle.p1 = std::clamp(oracle.p0 + params.uplift, 0.0, 1.0);
  }
  oracle.r0 = config.revenue_control;
  oracle.r1 = config.revenue_treated;
  oracle.c = config.cost;
  return visitor;
}

VisitRecord RealizeVisit(const OracleRecord& oracle, bool treated,
                         SplitMix64& rng) {
  VisitRecord record;
  record.features = oracle.features;
  record.treatment = treated;
  record.outcome = rng.Bernoulli(treated ? oracle.p1 : oracle.p0);
  if (record.outcome) {
    record.revenue = treated ? oracle.r1 : oracle.r0;
    record.cost = treated ? oracle.c : 0.0;
  }
  return record;
}

absl::StatusOr<Population> GenPopulation(const PopulationConfig& config,
                                         int period) {
  UPLIFT_RETURN_IF_ERROR(ValidateConfig(config));
  if (period < 0) return ConfigError("period must be >= 0");
  UPLIFT_ASSIGN_OR_RETURN(const auto weights, SegmentWeightsAt(config, period));

  Population population;
  std::vector<VisitRecord> records;
  records.reserve(config.n);
  population.oracle.reserve(config.n);
  population.segments.reserve(config.n);
  for (int64_t i = 0; i < config.n; ++i) {
    Visitor visitor = DrawVisitor(config, weights, period, i);
    SplitMix64 rng = SplitMix64::ForStream(
        config.seed, StreamId(period, StreamPurpose::kTrial), i);
    const bool treated = rng.Bernoulli(config.propensity);
    records.push_back(RealizeVisit(visitor.oracle, treated, rng));
    population.oracle.push_back(std::move(visitor.oracle));
    population.segments.push_back(visitor.segment);
  }
  UPLIFT_ASSIGN_OR_RETURN(
      population.dataset,
      Dataset::Create(std::move(records), config.feature_dim, config.propensity,
                      config.seed));
  return population;
}

UpliftScores OracleScores(const std::vector<OracleRecord>& oracle) {
  UpliftScores scores;
  scores.reserve(oracle.size());
  for (const auto& record : oracle) {
    scores.push_back(
        ScoreFromMagnitudes(record.TrueCateY(), record.TrueCateLoss()));
  }
  return scores;
}

std::string OracleToCsv(const std::vector<OracleRecord>& oracle) {
  std::string out = "p0,p1,r0,r1,c\n";
  for (const auto& record : oracle) {
    absl::StrAppend(&out, FormatDouble(record.p0), ",", FormatDouble(record.p1),
                    ",", FormatDouble(record.r0), ",", FormatDouble(record.r1),
                    ",", FormatDouble(record.c), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<OracleRecord>> OracleFromCsv(std::string_view csv) {
  UPLIFT_ASSIGN_OR_RETURN(const CsvTable table, ParseCsv(csv));
  if (table.header != std::vector<std::string>{"p0", "p1", "r0", "r1", "c"}) {
    return SchemaError("oracle header must be p0,p1,r0,r1,c");
  }
  std::vector<OracleRecord> oracle;
  oracle.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    OracleRecord record;
    UPLIFT_ASSIGN_OR_RETURN(record.p0, ParseDouble(row[0]));
    UPLIFT_ASSIGN_OR_RETURN(record.p1, ParseDouble(row[1]));
    UPLIFT_ASSIGN_OR_RETURN(record.r0, ParseDouble(row[2]));
    UPLIFT_ASSIGN_OR_RETURN(record.r1, ParseDouble(row[3]));
    UPLIFT_ASSIGN_OR_RETURN(record.c, ParseDouble(row[4]));
    oracle.push_back(std::move(record));
  }
  return oracle;
}

std::string OraclePathFor(const std::string& csv_path) {
  std::filesystem::path path(csv_path);
  path.replace_extension(".oracle.csv");
  return path.string();
}

}  // namespace uplift_roi::simulate
