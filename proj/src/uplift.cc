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

#include "uplift_roi/uplift.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/status.h"

namespace uplift_roi::uplift {
namespace {

using Json = nlohmann::ordered_json;
using learners::FittedModel;
using learners::LearnerConfig;
using learners::TrainingData;

constexpr int kBundleFormatVersion = 1;

absl::Status CheckPropensity(double propensity) {
  if (!(propensity > 0 && propensity < 1)) {
    return ConfigError(
        absl::StrCat("propensity must lie in (0,1), got ", propensity));
  }
  return absl::OkStatus();
}

absl::Status CheckEconomics(double revenue, double cost) {
  if (!(2 * revenue > cost)) {
    return DegenerateEconomicsError(absl::StrCat(
        "promotion cost ", cost, " is at least twice the revenue ", revenue,
        " per purchase; the loss-sign threshold leaves the unit interval"));
  }
  return absl::OkStatus();
}

Json ModelJson(const FittedModel& model) {
  return Json::parse(learners::ModelToJson(model));
}

absl::StatusOr<FittedModel> ModelFromJsonField(const Json& root,
                                               const char* key) {
  if (!root.contains(key)) {
    return SchemaError(absl::StrCat("model bundle is missing '", key, "'"));
  }
  return learners::ModelFromJson(root[key].dump());
}

}  // namespace

std::string_view MethodName(MethodId method) {
  switch (method) {
    case MethodId::kTwoModels:
      return "two-models";
    case MethodId::kTransformedOutcome:
      return "transformed-outcome";
    case MethodId::kFractionalApproximation:
      return "fractional-approximation";
    case MethodId::kRetrospective:
      return "retrospective";
  }
  return "unknown";
}

absl::StatusOr<MethodId> ParseMethodId(std::string_view name) {
  for (const MethodId method : kAllMethods) {
    if (MethodName(method) == name) return method;
  }
  return ConfigError(absl::StrCat(
      "unknown method '", ToAbsl(name),
      "' (expected two-models, transformed-outcome, fractional-approximation "
      "or retrospective)"));
}

absl::StatusOr<UpliftConfig> UpliftConfigFromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("uplift config: ", e.what()));
  }
  if (!root.is_object()) return SchemaError("uplift config must be an object");
  UpliftConfig config;
  for (const auto& item : root.items()) {
    if (item.key() == "learner") {
      UPLIFT_ASSIGN_OR_RETURN(config.learner,
                              learners::LearnerConfigFromJson(item.value().dump()));
    } else if (item.key() == "value_learner") {
      UPLIFT_ASSIGN_OR_RETURN(config.value_learner,
                              learners::LearnerConfigFromJson(item.value().dump()));
    } else if (item.key() == "per_record_values") {
      if (!item.value().is_boolean()) {
        return SchemaError("per_record_values must be a boolean");
      }
      config.per_record_values = item.value().get<bool>();
    } else {
      return SchemaError(
          absl::StrCat("unknown uplift config field '", item.key(), "'"));
    }
  }
  return config;
}

std::string UpliftConfigToJson(const UpliftConfig& config) {
  Json root;
  root["learner"] = Json::parse(learners::LearnerConfigToJson(config.learner));
  root["per_record_values"] = config.per_record_values;
  root["value_learner"] =
      Json::parse(learners::LearnerConfigToJson(config.value_learner));
  return root.dump(2) + "\n";
}

absl::StatusOr<TwoModels> FitTwoModels(const Dataset& train,
                                       const LearnerConfig& config) {
  TrainingData treated(train.feature_dim()), control(train.feature_dim());
  for (const auto& record : train.records()) {
    (record.treatment ? treated : control)
        .Add(record.features, record.outcome ? 1.0 : 0.0);
  }
  if (treated.size() == 0 || control.size() == 0) {
    return InsufficientDataError(absl::StrCat(
        "two-models needs both arms; treated rows: ", treated.size(),
        ", control rows: ", control.size()));
  }
  TwoModels models;
  UPLIFT_ASSIGN_OR_RETURN(models.treated,
                          learners::FitClassifier(treated, config));
  UPLIFT_ASSIGN_OR_RETURN(models.control,
                          learners::FitClassifier(control, config));
  return models;
}

RecordScore TwoModelsScore(double p1, double p0) {
  RecordScore score;
  score.cate_y = p1 - p0;
  score.y_positive = p1 - p0 > 0;
  score.sort_key = p1 - p0;
  return score;
}

absl::StatusOr<double> TransformedOutcome(bool outcome, bool treatment,
                                          double propensity) {
  UPLIFT_RETURN_IF_ERROR(CheckPropensity(propensity));
  if (!outcome) return 0.0;
  return ((treatment ? 1.0 : 0.0) - propensity) /
         (propensity * (1 - propensity));
}

absl::StatusOr<TransformedOutcomeModel> FitTransformedOutcome(
    const Dataset& train, const LearnerConfig& config) {
  const double e = train.propensity();
  UPLIFT_RETURN_IF_ERROR(CheckPropensity(e));
  TrainingData data(train.feature_dim());
  for (const auto& record : train.records()) {
    UPLIFT_ASSIGN_OR_RETURN(const double z,
                            TransformedOutcome(record.outcome, record.treatment, e));
    data.Add(record.features, z);
  }
  TransformedOutcomeModel model;
  model.propensity = e;
  UPLIFT_ASSIGN_OR_RETURN(model.regressor, learners::FitRegressor(data, config));
  return model;
}

RecordScore TransformedOutcomeScore(double cate_y) {
  RecordScore score;
  score.cate_y = std::clamp(cate_y, -1.0, 1.0);
  score.y_positive = *score.cate_y > 0;
  score.sort_key = *score.cate_y;
  return score;
}

absl::StatusOr<ValueEstimates> FitValueEstimates(const RecordSource& train) {
  double r1 = 0, c = 0, r0 = 0;
  size_t treated = 0, control = 0;
  for (const size_t row : train.purchase_rows()) {
    const VisitRecord& record = train.record(row);
    if (record.treatment) {
      r1 += record.revenue;
      c += record.cost;
      ++treated;
    } else {
      r0 += record.revenue;
      ++control;
    }
  }
  if (treated == 0) {
    return InsufficientDataError("no purchases in the treated arm");
  }
  if (control == 0) {
    return InsufficientDataError("no purchases in the control arm");
  }
  return ValueEstimates{r1 / treated, r0 / control, c / treated};
}

RecordScore FractionalScore(double p1, double p0, const ValueEstimates& values) {
  return ScoreFromMagnitudes(p1 - p0, p1 * (values.c - values.r1) + p0 * values.r0);
}

absl::StatusOr<RetrospectiveModel> FitRetrospective(const RecordSource& train,
                                                    const UpliftConfig& config) {
  UPLIFT_RETURN_IF_ERROR(CheckPropensity(train.propensity()));
  RetrospectiveModel model;
  model.propensity = train.propensity();
  model.per_record_values = config.per_record_values;
  UPLIFT_ASSIGN_OR_RETURN(model.values, FitValueEstimates(train));

  const int d = train.feature_dim();
  TrainingData s_data(d), r1_data(d), r0_data(d), c_data(d);
  double revenue = 0;
  for (const size_t row : train.purchase_rows()) {
    const VisitRecord& record = train.record(row);
    s_data.Add(record.features, record.treatment ? 1.0 : 0.0);
    revenue += record.revenue;
    if (record.treatment) {
      r1_data.Add(record.features, record.revenue);
      c_data.Add(record.features, record.cost);
    } else {
      r0_data.Add(record.features, record.revenue);
    }
  }
  model.revenue = revenue / static_cast<double>(s_data.size());
  UPLIFT_RETURN_IF_ERROR(CheckEconomics(
      config.per_record_values ? model.values.r1 : model.revenue, model.values.c));
  UPLIFT_ASSIGN_OR_RETURN(model.s_model,
                          learners::FitClassifier(s_data, config.learner));
  if (config.per_record_values) {
    UPLIFT_ASSIGN_OR_RETURN(model.r1_model,
                            learners::FitRegressor(r1_data, config.value_learner));
    UPLIFT_ASSIGN_OR_RETURN(model.r0_model,
                            learners::FitRegressor(r0_data, config.value_learner));
    UPLIFT_ASSIGN_OR_RETURN(model.c_model,
                            learners::FitRegressor(c_data, config.value_learner));
  }
  return model;
}

double CorrectForPropensity(double s, double propensity) {
  const double odds = s / (1 - s) * (1 - propensity) / propensity;
  return odds / (1 + odds);
}

absl::StatusOr<RecordScore> RetrospectiveScore(double s, double revenue,
                                               double cost) {
  UPLIFT_RETURN_IF_ERROR(CheckEconomics(revenue, cost));
  RecordScore score;
  score.y_positive = s > 0.5;
  score.loss_positive = s < revenue / (2 * revenue - cost);
  const double denominator = s * (cost - revenue) + (1 - s) * revenue;
  score.sort_key = GreedySortKey(score.y_positive, score.loss_positive,
                                 (2 * s - 1) / denominator);
  return score;
}

RecordScore RetrospectiveScoreGeneral(double s, double r1, double r0, double c) {
  RecordScore score;
  const double denominator = s * (c - r1) + (1 - s) * r0;
  score.y_positive = s > 0.5;
  score.loss_positive = denominator > 0;
  score.sort_key = GreedySortKey(score.y_positive, score.loss_positive,
                                 (2 * s - 1) / denominator);
  return score;
}

absl::StatusOr<UpliftModel> UpliftModel::Fit(MethodId method,
                                             const Dataset& train,
                                             const UpliftConfig& config) {
  UpliftModel model;
  model.method_ = method;
  model.feature_dim_ = train.feature_dim();
  model.propensity_ = train.propensity();
  switch (method) {
    case MethodId::kTwoModels: {
      UPLIFT_ASSIGN_OR_RETURN(model.two_models_,
                              FitTwoModels(train, config.learner));
      break;
    }
    case MethodId::kTransformedOutcome: {
      UPLIFT_ASSIGN_OR_RETURN(model.transformed_outcome_,
                              FitTransformedOutcome(train, config.learner));
      break;
    }
    case MethodId::kFractionalApproximation: {
      UPLIFT_ASSIGN_OR_RETURN(model.values_, FitValueEstimates(train));
      UPLIFT_ASSIGN_OR_RETURN(model.two_models_,
                              FitTwoModels(train, config.learner));
      break;
    }
    case MethodId::kRetrospective: {
      UPLIFT_ASSIGN_OR_RETURN(model.retrospective_,
                              FitRetrospective(train, config));
      model.values_ = model.retrospective_->values;
      break;
    }
  }
  return model;
}

absl::StatusOr<RecordScore> UpliftModel::ScoreOne(
    std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim_) {
    return ShapeError(absl::StrCat("uplift model expects ", feature_dim_,
                                   " features, got ", features.size()));
  }
  switch (method_) {
    case MethodId::kTwoModels:
      return TwoModelsScore(two_models_->treated.Evaluate(features),
                            two_models_->control.Evaluate(features));
    case MethodId::kTransformedOutcome:
      return TransformedOutcomeScore(
          transformed_outcome_->regressor.Evaluate(features));
    case MethodId::kFractionalApproximation:
      return FractionalScore(two_models_->treated.Evaluate(features),
                             two_models_->control.Evaluate(features), *values_);
    case MethodId::kRetrospective: {
      const RetrospectiveModel& retro = *retrospective_;
      const double s = CorrectForPropensity(retro.s_model.Evaluate(features),
                                            retro.propensity);
      if (!retro.per_record_values) {
        return RetrospectiveScore(s, retro.revenue, retro.values.c);
      }
      return RetrospectiveScoreGeneral(
          s, std::max(0.0, retro.r1_model->Evaluate(features)),
          std::max(0.0, retro.r0_model->Evaluate(features)),
          std::max(0.0, retro.c_model->Evaluate(features)));
    }
  }
  return absl::InternalError("unhandled method");
}

absl::StatusOr<UpliftScores> UpliftModel::Score(
    std::span<const VisitRecord> records) const {
  UpliftScores scores;
  scores.reserve(records.size());
  for (const auto& record : records) {
    UPLIFT_ASSIGN_OR_RETURN(RecordScore score, ScoreOne(record.features));
    scores.push_back(score);
  }
  return scores;
}

std::string UpliftModel::ToJson() const {
  Json root;
  root["format_version"] = kBundleFormatVersion;
  root["method"] = MethodName(method_);
  root["feature_dim"] = feature_dim_;
  root["propensity"] = propensity_;
  if (values_) {
    root["values"] = {{"r1", values_->r1}, {"r0", values_->r0}, {"c", values_->c}};
  }
  Json models = Json::object();
  if (two_models_) {
    models["treated"] = ModelJson(two_models_->treated);
    models["control"] = ModelJson(two_models_->control);
  }
  if (transformed_outcome_) {
    models["regressor"] = ModelJson(transformed_outcome_->regressor);
  }
  if (retrospective_) {
    root["revenue"] = retrospective_->revenue;
    root["per_record_values"] = retrospective_->per_record_values;
    models["s"] = ModelJson(retrospective_->s_model);
    if (retrospective_->per_record_values) {
      models["r1"] = ModelJson(*retrospective_->r1_model);
      models["r0"] = ModelJson(*retrospective_->r0_model);
      models["c"] = ModelJson(*retrospective_->c_model);
    }
  }
  root["models"] = std::move(models);
  return root.dump() + "\n";
}

absl::StatusOr<UpliftModel> UpliftModel::FromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("model bundle: ", e.what()));
  }
  UpliftModel model;
  try {
    if (!root.is_object() || !root.contains("format_version") ||
        root["format_version"].get<int>() != kBundleFormatVersion) {
      return SchemaError("unsupported or missing model bundle format_version");
    }
    UPLIFT_ASSIGN_OR_RETURN(model.method_,
                            ParseMethodId(root.at("method").get<std::string>()));
    model.feature_dim_ = root.at("feature_dim").get<int>();
    model.propensity_ = root.at("propensity").get<double>();
    UPLIFT_RETURN_IF_ERROR(CheckPropensity(model.propensity_));
    if (root.contains("values")) {
      const Json& values = root["values"];
      model.values_ = ValueEstimates{values.at("r1").get<double>(),
                                     values.at("r0").get<double>(),
                                     values.at("c").get<double>()};
    }
    const Json& models = root.at("models");
    switch (model.method_) {
      case MethodId::kFractionalApproximation:
        if (!model.values_) return SchemaError("bundle is missing values");
        [[fallthrough]];
      case MethodId::kTwoModels: {
        TwoModels two;
        UPLIFT_ASSIGN_OR_RETURN(two.treated, ModelFromJsonField(models, "treated"));
        UPLIFT_ASSIGN_OR_RETURN(two.control, ModelFromJsonField(models, "control"));
        model.two_models_ = std::move(two);
        break;
      }
      case MethodId::kTransformedOutcome: {
        TransformedOutcomeModel to;
        to.propensity = model.propensity_;
        UPLIFT_ASSIGN_OR_RETURN(to.regressor,
                                ModelFromJsonField(models, "regressor"));
        model.transformed_outcome_ = std::move(to);
        break;
      }
      case MethodId::kRetrospective: {
        if (!model.values_) return SchemaError("bundle is missing values");
        RetrospectiveModel retro;
        retro.values = *model.values_;
        retro.propensity = model.propensity_;
        retro.revenue = root.at("revenue").get<double>();
        retro.per_record_values = root.value("per_record_values", false);
        UPLIFT_ASSIGN_OR_RETURN(retro.s_model, ModelFromJsonField(models, "s"));
        if (retro.per_record_values) {
          UPLIFT_ASSIGN_OR_RETURN(retro.r1_model, ModelFromJsonField(models, "r1"));
          UPLIFT_ASSIGN_OR_RETURN(retro.r0_model, ModelFromJsonField(models, "r0"));
          UPLIFT_ASSIGN_OR_RETURN(retro.c_model, ModelFromJsonField(models, "c"));
        } else {
          UPLIFT_RETURN_IF_ERROR(CheckEconomics(retro.revenue, retro.values.c));
        }
        model.retrospective_ = std::move(retro);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("model bundle: ", e.what()));
  }
  return model;
}

}  // namespace uplift_roi::uplift
