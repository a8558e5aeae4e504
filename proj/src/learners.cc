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

#include "uplift_roi/learners.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/status.h"

namespace uplift_roi::learners {
namespace {

using Json = nlohmann::ordered_json;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double ClampProbability(double p) {
  return std::clamp(p, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

double Logit(double p) { return std::log(p / (1.0 - p)); }

absl::Status CheckTrainingData(const TrainingData& data, Task task) {
  if (data.size() < 2) {
    return InsufficientDataError(
        absl::StrCat("need at least 2 training rows, got ", data.size()));
  }
  double total_weight = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double w = data.weight(i);
    if (!(w >= 0) || !std::isfinite(w)) {
      return SchemaError("training weights must be finite and nonnegative");
    }
    total_weight += w;
    const double y = data.label(i);
    if (!std::isfinite(y)) return SchemaError("non-finite training label");
    if (task == Task::kClassification && y != 0 && y != 1) {
      return SchemaError("classification labels must be 0 or 1");
    }
    for (const double x : data.row(i)) {
      if (!std::isfinite(x)) return SchemaError("non-finite training feature");
    }
  }
  if (total_weight <= 0) return InsufficientDataError("total weight is zero");
  return absl::OkStatus();
}

double WeightedMean(std::span<const double> values,
                    std::span<const double> weights) {
  double sum = 0, total = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    sum += weights[i] * values[i];
    total += weights[i];
  }
  return sum / total;
}

FittedModel FitLinear(const TrainingData& data, Task task,
                      const LearnerConfig& config) {
  const int d = data.feature_dim();
  const size_t n = data.size();
  double total_weight = 0;
  for (size_t i = 0; i < n; ++i) total_weight += data.weight(i);

  // Standardize so a single step size suits every problem.
  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  for (int j = 0; j < d; ++j) {
    double sum = 0;
    for (size_t i = 0; i < n; ++i) sum += data.weight(i) * data.feature(i, j);
    mean[j] = sum / total_weight;
    double var = 0;
    for (size_t i = 0; i < n; ++i) {
      const double diff = data.feature(i, j) - mean[j];
      var += data.weight(i) * diff * diff;
    }
    var /= total_weight;
    if (var > 1e-24) scale[j] = std::sqrt(var);
  }
  TrainingData standardized(d);
  std::vector<double> z(d);
  for (size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = (data.feature(i, j) - mean[j]) / scale[j];
    standardized.Add(z, data.label(i), data.weight(i));
  }

  const double base = WeightedMean(data.labels(), data.weights());
  std::vector<double> params(d + 1, 0.0);
  params[0] = task == Task::kClassification ? Logit(ClampProbability(base)) : base;
  const double curvature = task == Task::kClassification ? 0.25 : 1.0;
  const double step = 1.0 / (curvature * (1.0 + d) + config.l2);
  std::vector<double> gradient;
  for (int it = 0; it < config.iterations; ++it) {
    internal::LinearObjective(standardized, task, params, config.l2, &gradient);
    double largest = 0;
    for (int k = 0; k <= d; ++k) {
      params[k] -= step * gradient[k];
      largest = std::max(largest, std::abs(gradient[k]));
    }
    if (largest < 1e-13) break;
  }

  FittedModel model;
  model.kind = LearnerKind::kLinear;
  model.task = task;
  model.feature_dim = d;
  model.config = config;
  model.weights.resize(d);
  model.bias = params[0];
  for (int j = 0; j < d; ++j) {
    model.weights[j] = params[j + 1] / scale[j];
    model.bias -= model.weights[j] * mean[j];
  }
  return model;
}

FittedModel ConstantClassifier(const TrainingData& data,
                               const LearnerConfig& config) {
  FittedModel model;
  model.kind = config.kind;
  model.task = Task::kClassification;
  model.feature_dim = data.feature_dim();
  model.config = config;
  model.constant = true;
  const double logit =
      Logit(ClampProbability(WeightedMean(data.labels(), data.weights())));
  if (config.kind == LearnerKind::kLinear) {
    model.bias = logit;
    model.weights.assign(data.feature_dim(), 0.0);
  } else {
    model.base_score = logit;
  }
  return model;
}

absl::Status CheckDimension(const FittedModel& model,
                            std::span<const double> features) {
  if (static_cast<int>(features.size()) != model.feature_dim) {
    return ShapeError(absl::StrCat("model expects ", model.feature_dim,
                                   " features, got ", features.size()));
  }
  return absl::OkStatus();
}

Json ConfigToJsonObject(const LearnerConfig& config) {
  return Json{{"kind", LearnerKindName(config.kind)},
              {"l2", config.l2},
              {"iterations", config.iterations},
              {"rounds", config.rounds},
              {"learning_rate", config.learning_rate},
              {"max_depth", config.max_depth},
              {"min_leaf_weight", config.min_leaf_weight},
              {"subsample", config.subsample},
              {"seed", config.seed}};
}

absl::StatusOr<LearnerConfig> ConfigFromJsonObject(const Json& root) {
  if (!root.is_object()) return SchemaError("learner config must be an object");
  LearnerConfig config;
  try {
    for (const auto& item : root.items()) {
      const std::string& key = item.key();
      const Json& value = item.value();
      if (key == "kind") {
        UPLIFT_ASSIGN_OR_RETURN(config.kind,
                                ParseLearnerKind(value.get<std::string>()));
      } else if (key == "l2") {
        config.l2 = value.get<double>();
      } else if (key == "iterations") {
        config.iterations = value.get<int>();
      } else if (key == "rounds") {
        config.rounds = value.get<int>();
      } else if (key == "learning_rate") {
        config.learning_rate = value.get<double>();
      } else if (key == "max_depth") {
        config.max_depth = value.get<int>();
      } else if (key == "min_leaf_weight") {
        config.min_leaf_weight = value.get<double>();
      } else if (key == "subsample") {
        config.subsample = value.get<double>();
      } else if (key == "seed") {
        config.seed = value.get<uint64_t>();
      } else {
        return SchemaError(absl::StrCat("unknown learner config field '", key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("learner config: ", e.what()));
  }
  UPLIFT_RETURN_IF_ERROR(ValidateLearnerConfig(config));
  return config;
}

}  // namespace

std::string_view LearnerKindName(LearnerKind kind) {
  return kind == LearnerKind::kLinear ? "linear" : "boosted-trees";
}

std::string_view TaskName(Task task) {
  return task == Task::kClassification ? "classification" : "regression";
}

absl::Status ValidateLearnerConfig(const LearnerConfig& config) {
  if (config.rounds < 1) return ConfigError("rounds must be >= 1");
  if (config.max_depth < 1) return ConfigError("max_depth must be >= 1");
  if (!(config.learning_rate > 0 && config.learning_rate <= 1)) {
    return ConfigError("learning_rate must lie in (0,1]");
  }
  if (!(config.l2 >= 0)) return ConfigError("l2 must be >= 0");
  if (config.iterations < 1) return ConfigError("iterations must be >= 1");
  if (!(config.min_leaf_weight >= 0)) {
    return ConfigError("min_leaf_weight must be >= 0");
  }
  if (!(config.subsample > 0 && config.subsample <= 1)) {
    return ConfigError("subsample must lie in (0,1]");
  }
  return absl::OkStatus();
}

absl::StatusOr<LearnerKind> ParseLearnerKind(std::string_view name) {
  if (name == "linear" || name == "logistic") return LearnerKind::kLinear;
  if (name == "boosted-trees") return LearnerKind::kBoostedTrees;
  return ConfigError(absl::StrCat("unknown learner kind '", ToAbsl(name), "'"));
}

absl::StatusOr<LearnerConfig> LearnerConfigFromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("learner config: ", e.what()));
  }
  return ConfigFromJsonObject(root);
}

std::string LearnerConfigToJson(const LearnerConfig& config) {
  return ConfigToJsonObject(config).dump(2) + "\n";
}

void TrainingData::Add(std::span<const double> features, double label,
                       double weight) {
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
  weights_.push_back(weight);
}

double Tree::Predict(std::span<const double> features) const {
  int index = 0;
  while (nodes[index].feature >= 0) {
    const TreeNode& node = nodes[index];
    index = features[node.feature] < node.threshold ? node.left : node.right;
  }
  return nodes[index].value;
}

double FittedModel::RawOutput(std::span<const double> features) const {
  if (kind == LearnerKind::kLinear) {
    double out = bias;
    for (size_t j = 0; j < weights.size(); ++j) out += weights[j] * features[j];
    return out;
  }
  double out = base_score;
  for (const Tree& tree : trees) out += tree.Predict(features);
  return out;
}

double FittedModel::Evaluate(std::span<const double> features) const {
  const double raw = RawOutput(features);
  return task == Task::kClassification ? ClampProbability(Sigmoid(raw)) : raw;
}

namespace internal {

double LinearObjective(const TrainingData& data, Task task,
                       std::span<const double> params, double l2,
                       std::vector<double>* gradient) {
  const int d = data.feature_dim();
  if (gradient != nullptr) gradient->assign(d + 1, 0.0);
  double loss = 0, total_weight = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    double margin = params[0];
    for (int j = 0; j < d; ++j) margin += params[j + 1] * x[j];
    const double w = data.weight(i);
    const double y = data.label(i);
    double residual;
    if (task == Task::kClassification) {
      loss += w * (Softplus(margin) - y * margin);
      residual = Sigmoid(margin) - y;
    } else {
      residual = margin - y;
      loss += 0.5 * w * residual * residual;
    }
    total_weight += w;
    if (gradient != nullptr) {
      (*gradient)[0] += w * residual;
      for (int j = 0; j < d; ++j) (*gradient)[j + 1] += w * residual * x[j];
    }
  }
  loss /= total_weight;
  double penalty = 0;
  for (int j = 1; j <= d; ++j) penalty += params[j] * params[j];
  loss += 0.5 * l2 * penalty;
  if (gradient != nullptr) {
    for (auto& g : *gradient) g /= total_weight;
    for (int j = 1; j <= d; ++j) (*gradient)[j] += l2 * params[j];
  }
  return loss;
}

}  // namespace internal

absl::StatusOr<FittedModel> FitClassifier(const TrainingData& data,
                                          const LearnerConfig& config) {
  UPLIFT_RETURN_IF_ERROR(ValidateLearnerConfig(config));
  UPLIFT_RETURN_IF_ERROR(CheckTrainingData(data, Task::kClassification));
  bool has_positive = false, has_negative = false;
  for (size_t i = 0; i < data.size(); ++i) {
    if (data.weight(i) <= 0) continue;
    (data.label(i) == 1 ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) return ConstantClassifier(data, config);
  if (config.kind == LearnerKind::kLinear) {
    return FitLinear(data, Task::kClassification, config);
  }
  return internal::FitTrees(data, Task::kClassification, config);
}

absl::StatusOr<FittedModel> FitRegressor(const TrainingData& data,
                                         const LearnerConfig& config) {
  UPLIFT_RETURN_IF_ERROR(ValidateLearnerConfig(config));
  UPLIFT_RETURN_IF_ERROR(CheckTrainingData(data, Task::kRegression));
  if (config.kind == LearnerKind::kLinear) {
    return FitLinear(data, Task::kRegression, config);
  }
  return internal::FitTrees(data, Task::kRegression, config);
}

absl::StatusOr<double> PredictProba(const FittedModel& model,
                                    std::span<const double> features) {
  if (model.task != Task::kClassification) {
    return absl::InvalidArgumentError("PredictProba called on a regressor");
  }
  UPLIFT_RETURN_IF_ERROR(CheckDimension(model, features));
  return model.Evaluate(features);
}

absl::StatusOr<double> Predict(const FittedModel& model,
                               std::span<const double> features) {
  UPLIFT_RETURN_IF_ERROR(CheckDimension(model, features));
  return model.Evaluate(features);
}

double TrainingLoss(const FittedModel& model, const TrainingData& data) {
  double loss = 0, total_weight = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double raw = model.RawOutput(data.row(i));
    const double w = data.weight(i);
    if (model.task == Task::kClassification) {
      loss += w * (Softplus(raw) - data.label(i) * raw);
    } else {
      const double residual = raw - data.label(i);
      loss += 0.5 * w * residual * residual;
    }
    total_weight += w;
  }
  return loss / total_weight;
}

std::string ModelToJson(const FittedModel& model) {
  Json root;
  root["format_version"] = kModelFormatVersion;
  root["kind"] = LearnerKindName(model.kind);
  root["task"] = TaskName(model.task);
  root["feature_dim"] = model.feature_dim;
  root["constant"] = model.constant;
  root["config"] = ConfigToJsonObject(model.config);
  if (model.kind == LearnerKind::kLinear) {
    root["bias"] = model.bias;
    root["weights"] = model.weights;
  } else {
    root["base_score"] = model.base_score;
    Json trees = Json::array();
    for (const Tree& tree : model.trees) {
      Json nodes = Json::array();
      for (const TreeNode& node : tree.nodes) {
        nodes.push_back(Json::array(
            {node.feature, node.threshold, node.left, node.right, node.value}));
      }
      trees.push_back(std::move(nodes));
    }
    root["trees"] = std::move(trees);
  }
  return root.dump();
}

absl::StatusOr<FittedModel> ModelFromJson(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("model document: ", e.what()));
  }
  if (!root.is_object() || !root.contains("format_version")) {
    return SchemaError("model document has no format_version");
  }
  FittedModel model;
  try {
    const int version = root.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      return SchemaError(absl::StrCat("unsupported model format_version ",
                                      version, " (expected ",
                                      kModelFormatVersion, ")"));
    }
    UPLIFT_ASSIGN_OR_RETURN(model.kind,
                            ParseLearnerKind(root.at("kind").get<std::string>()));
    const std::string task = root.at("task").get<std::string>();
    if (task == "classification") {
      model.task = Task::kClassification;
    } else if (task == "regression") {
      model.task = Task::kRegression;
    } else {
      return SchemaError(absl::StrCat("unknown task '", task, "'"));
    }
    model.feature_dim = root.at("feature_dim").get<int>();
    model.constant = root.value("constant", false);
    UPLIFT_ASSIGN_OR_RETURN(model.config, ConfigFromJsonObject(root.at("config")));
    if (model.kind == LearnerKind::kLinear) {
      model.bias = root.at("bias").get<double>();
      model.weights = root.at("weights").get<std::vector<double>>();
      if (static_cast<int>(model.weights.size()) != model.feature_dim) {
        return SchemaError("linear model weight count != feature_dim");
      }
    } else {
      model.base_score = root.at("base_score").get<double>();
      for (const Json& nodes : root.at("trees")) {
        Tree tree;
        for (const Json& item : nodes) {
          TreeNode node;
          node.feature = item.at(0).get<int>();
          node.threshold = item.at(1).get<double>();
          node.left = item.at(2).get<int>();
          node.right = item.at(3).get<int>();
          node.value = item.at(4).get<double>();
          tree.nodes.push_back(node);
        }
        const int size = static_cast<int>(tree.nodes.size());
        if (size == 0) return SchemaError("empty tree in model document");
        for (int k = 0; k < size; ++k) {
          const TreeNode& node = tree.nodes[k];
          // Children always follow their parent, which rules out cycles.
          if (node.feature >= model.feature_dim ||
              (node.feature >= 0 && (node.left <= k || node.left >= size ||
                                     node.right <= k || node.right >= size))) {
            return SchemaError("malformed tree node in model document");
          }
        }
        model.trees.push_back(std::move(tree));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("model document: ", e.what()));
  }
  return model;
}

}  // namespace uplift_roi::learners
