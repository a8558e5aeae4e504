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

#include "uplift_roi/cli.h"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "uplift_roi/assign.h"
#include "uplift_roi/calibrate.h"
#include "uplift_roi/core.h"
#include "uplift_roi/dataset_io.h"
#include "uplift_roi/eval.h"
#include "uplift_roi/harness.h"
#include "uplift_roi/simulate.h"
#include "uplift_roi/status.h"
#include "uplift_roi/uplift.h"

namespace uplift_roi::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Options shared by every command; unused ones stay empty.
struct Options {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string method;
  std::optional<double> theta;
  bool solve = false;
  int grid = eval::kDefaultBins;
  std::optional<int> periods;
  std::string data;
  std::vector<std::string> models;
  std::string scores;
  std::string oracle;
  std::string points;
  std::optional<int64_t> n;
  int period = 0;
  double q_min = calibrate::kDefaultQMin;
  double q_max = calibrate::kDefaultQMax;
};

// Append-only run record, one JSON line per invocation in `<out>/manifest.jsonl`.
class Manifest {
 public:
  Manifest(std::string command, const Options& options)
      : command_(std::move(command)),
        options_(options),
        start_(std::chrono::steady_clock::now()) {}

  void Input(const std::string& path) { inputs_.push_back(path); }
  void Output(const std::string& path) { outputs_.push_back(path); }

  absl::Status Write() const {
    Json line;
    line["command"] = command_;
    line["config_paths"] = options_.config.empty()
                               ? Json::array()
                               : Json::array({options_.config});
    line["seed"] = options_.seed ? Json(*options_.seed) : Json(nullptr);
    line["inputs"] = inputs_;
    line["outputs"] = outputs_;
    line["tool_version"] = kToolVersion;
    line["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    return AppendTextFile((fs::path(options_.out) / "manifest.jsonl").string(),
                          line.dump() + "\n");
  }

 private:
  std::string command_;
  const Options& options_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

std::string OutPath(const Options& options, const char* name) {
  return (fs::path(options.out) / name).string();
}

absl::Status WriteOutput(Manifest& manifest, const std::string& path,
                         std::string_view content) {
  UPLIFT_RETURN_IF_ERROR(WriteTextFile(path, content));
  manifest.Output(path);
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadConfig(const std::string& path) {
  absl::StatusOr<std::string> text = ReadTextFile(path);
  if (absl::IsNotFound(text.status())) {
    return absl::NotFoundError(absl::StrCat("config not found: ", path));
  }
  return text;
}

absl::StatusOr<uplift::UpliftModel> LoadModel(const std::string& path) {
  UPLIFT_ASSIGN_OR_RETURN(const std::string text, ReadTextFile(path));
  return uplift::UpliftModel::FromJson(text);
}

// Scores from --scores, --oracle or --model applied to --data.
absl::StatusOr<UpliftScores> LoadScores(const Options& options,
                                        Manifest& manifest,
                                        const Dataset* dataset) {
  if (!options.scores.empty()) {
    manifest.Input(options.scores);
    UPLIFT_ASSIGN_OR_RETURN(const std::string text,
                            ReadTextFile(options.scores));
    return ScoresFromCsv(text);
  }
  if (!options.oracle.empty()) {
    manifest.Input(options.oracle);
    UPLIFT_ASSIGN_OR_RETURN(const std::string text,
                            ReadTextFile(options.oracle));
    UPLIFT_ASSIGN_OR_RETURN(const auto oracle, simulate::OracleFromCsv(text));
    return simulate::OracleScores(oracle);
  }
  if (options.models.size() == 1 && dataset != nullptr) {
    manifest.Input(options.models[0]);
    UPLIFT_ASSIGN_OR_RETURN(const uplift::UpliftModel model,
                            LoadModel(options.models[0]));
    return model.Score(dataset->records());
  }
  return ConfigError("need --scores, --oracle, or one --model with --data");
}

absl::StatusOr<Dataset> LoadData(const Options& options, Manifest& manifest) {
  if (options.data.empty()) return ConfigError("--data is required");
  manifest.Input(options.data);
  return LoadDataset(options.data);
}

absl::Status CheckSize(const UpliftScores& scores, const Dataset& dataset) {
  if (scores.size() != dataset.size()) {
    return ShapeError(absl::StrCat(scores.size(), " scores for ",
                                   dataset.size(), " records"));
  }
  return absl::OkStatus();
}

absl::Status Gen(const Options& options, std::ostream& out) {
  Manifest manifest("gen", options);
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  if (!options.config.empty()) {
    UPLIFT_ASSIGN_OR_RETURN(const std::string text, ReadConfig(options.config));
    UPLIFT_ASSIGN_OR_RETURN(config, simulate::PopulationConfigFromJson(text));
  }
  if (options.seed) config.seed = *options.seed;
  if (options.n) config.n = *options.n;
  UPLIFT_ASSIGN_OR_RETURN(const simulate::Population population,
                          simulate::GenPopulation(config, options.period));
  const std::string csv = OutPath(options, "data.csv");
  UPLIFT_RETURN_IF_ERROR(SaveDataset(population.dataset, csv));
  manifest.Output(csv);
  manifest.Output(MetadataPathFor(csv));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, simulate::OraclePathFor(csv),
                                     simulate::OracleToCsv(population.oracle)));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "population.json"),
                                     simulate::PopulationConfigToJson(config)));
  out << "wrote " << population.dataset.size() << " records to " << csv << "\n";
  return manifest.Write();
}

absl::Status Train(const Options& options, std::ostream& out) {
  Manifest manifest("train", options);
  UPLIFT_ASSIGN_OR_RETURN(const uplift::MethodId method,
                          uplift::ParseMethodId(options.method));
  uplift::UpliftConfig config;
  if (!options.config.empty()) {
    UPLIFT_ASSIGN_OR_RETURN(const std::string text, ReadConfig(options.config));
    UPLIFT_ASSIGN_OR_RETURN(config, uplift::UpliftConfigFromJson(text));
  }
  if (options.seed) {
    config.learner.seed = *options.seed;
    config.value_learner.seed = *options.seed;
  }
  UPLIFT_ASSIGN_OR_RETURN(const Dataset data, LoadData(options, manifest));
  UPLIFT_ASSIGN_OR_RETURN(const uplift::UpliftModel model,
                          uplift::UpliftModel::Fit(method, data, config));
  const std::string path = OutPath(options, "model.json");
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, path, model.ToJson()));
  out << "trained " << uplift::MethodName(method) << " on " << data.size()
      << " records; model at " << path << "\n";
  return manifest.Write();
}

absl::Status Score(const Options& options, std::ostream& out) {
  Manifest manifest("score", options);
  UPLIFT_ASSIGN_OR_RETURN(const Dataset data, LoadData(options, manifest));
  UPLIFT_ASSIGN_OR_RETURN(const UpliftScores scores,
                          LoadScores(options, manifest, &data));
  const std::string path = OutPath(options, "scores.csv");
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, path, ScoresToCsv(scores)));
  out << "scored " << scores.size() << " records\n";
  return manifest.Write();
}

absl::Status Evaluate(const Options& options, std::ostream& out) {
  Manifest manifest("evaluate", options);
  UPLIFT_ASSIGN_OR_RETURN(const Dataset data, LoadData(options, manifest));
  UPLIFT_ASSIGN_OR_RETURN(const UpliftScores scores,
                          LoadScores(options, manifest, &data));
  UPLIFT_RETURN_IF_ERROR(CheckSize(scores, data));
  UPLIFT_ASSIGN_OR_RETURN(const eval::Curve qini,
                          eval::QiniCurve(data, scores, options.grid));
  UPLIFT_ASSIGN_OR_RETURN(const eval::Curve qini_roi,
                          eval::QiniRoiCurve(data, scores, options.grid));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "qini.csv"),
                                     eval::CurveToCsv(qini)));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "qini_roi.csv"),
                                     eval::CurveToCsv(qini_roi)));
  UPLIFT_ASSIGN_OR_RETURN(const eval::MetricReport report,
                          eval::TableMetrics(qini, qini_roi));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "metrics.json"),
                                     eval::MetricReportToJson(report)));
  out << "auuc " << FormatDouble(report.auuc) << ", max population at ROI>=0 "
      << FormatDouble(report.max_population_at_roi0) << ", max ATE at ROI>=0 "
      << FormatDouble(report.max_ate_at_roi0) << "\n";
  return manifest.Write();
}

// Threshold at the largest-Qini operating point with ROI >= 0.
absl::StatusOr<double> QiniRoiOperatingPoint(const Dataset& data,
                                             const UpliftScores& scores,
                                             int grid) {
  UPLIFT_ASSIGN_OR_RETURN(const eval::Evaluation evaluation,
                          eval::Evaluate(data, scores, grid));
  double best_q = 0, best_value = -kInf;
  for (size_t i = 0; i < evaluation.qini.points.size(); ++i) {
    const eval::CurvePoint& roi = evaluation.qini_roi.points[i];
    if (roi.defined && roi.value < 0) continue;
    if (evaluation.qini.points[i].value > best_value) {
      best_value = evaluation.qini.points[i].value;
      best_q = roi.q;
    }
  }
  return calibrate::QToThreshold(scores, best_q);
}

absl::Status Assign(const Options& options, std::ostream& out,
                    std::ostream& err) {
  Manifest manifest("assign", options);
  if (options.theta.has_value() == options.solve) {
    return ConfigError("assign needs exactly one of --theta and --solve");
  }
  std::optional<Dataset> data;
  if (!options.data.empty()) {
    UPLIFT_ASSIGN_OR_RETURN(data, LoadData(options, manifest));
  }
  UPLIFT_ASSIGN_OR_RETURN(
      const UpliftScores scores,
      LoadScores(options, manifest, data ? &*data : nullptr));
  if (data) UPLIFT_RETURN_IF_ERROR(CheckSize(scores, *data));

  assign::Assignment assignment;
  bool greedy = false;
  if (options.solve) {
    absl::StatusOr<assign::Assignment> solved = assign::GreedyAssign(scores);
    if (solved.ok()) {
      assignment = *std::move(solved);
      greedy = true;
    } else if (data) {
      // Ratio-only scores: no budget to spend, so take the offline operating
      // point on the supplied data instead.
      err << "note: " << solved.status().message()
          << "; using the Qini-ROI operating point on --data\n";
      UPLIFT_ASSIGN_OR_RETURN(const double threshold,
                              QiniRoiOperatingPoint(*data, scores, options.grid));
      assignment.threshold = threshold;
    } else {
      return solved.status();
    }
  } else {
    assignment.threshold = *options.theta;
  }
  if (!greedy) {
    const AssignmentPolicy policy =
        assign::ThresholdPolicy(scores, assignment.threshold);
    assignment.z = assign::ApplyPolicy(policy, scores);
    const assign::Quadrants quadrants = assign::PartitionQuadrants(scores);
    assignment.num_always = quadrants.always.size();
    assignment.num_candidates = quadrants.candidates.size();
    assignment.num_never = quadrants.never.size();
    for (size_t i = 0; i < scores.size(); ++i) {
      if (assignment.z[i] && scores[i].cate_y) {
        assignment.total_cate_y += *scores[i].cate_y;
      }
    }
  }
  UPLIFT_RETURN_IF_ERROR(
      WriteOutput(manifest, OutPath(options, "assignment.csv"),
                  assign::AssignmentToCsv(assignment, scores)));
  UPLIFT_RETURN_IF_ERROR(
      WriteOutput(manifest, OutPath(options, "assignment.json"),
                  assign::AssignmentSummaryJson(assignment)));
  out << "theta* = " << FormatDouble(assignment.threshold) << "\n";
  out << "treated " << assignment.num_treated() << " of " << scores.size()
      << ":";
  for (size_t i = 0; i < assignment.z.size(); ++i) {
    if (assignment.z[i]) out << " " << i;
  }
  out << "\n";
  return manifest.Write();
}

absl::Status Simulate(const Options& options, std::ostream& out) {
  Manifest manifest("simulate", options);
  harness::ExperimentConfig config;
  if (!options.config.empty()) {
    UPLIFT_ASSIGN_OR_RETURN(const std::string text, ReadConfig(options.config));
    UPLIFT_ASSIGN_OR_RETURN(config, harness::ExperimentConfigFromJson(text));
  }
  if (options.seed) config.seed = *options.seed;
  if (options.periods) config.periods = *options.periods;
  UPLIFT_RETURN_IF_ERROR(harness::ValidateExperimentConfig(config));

  harness::OfflineSetup offline;
  if (options.models.size() == 1) {
    manifest.Input(options.models[0]);
    UPLIFT_ASSIGN_OR_RETURN(uplift::UpliftModel model,
                            LoadModel(options.models[0]));
    UPLIFT_ASSIGN_OR_RETURN(offline,
                            harness::PrepareOffline(config, std::move(model)));
  } else {
    UPLIFT_ASSIGN_OR_RETURN(offline, harness::PrepareOffline(config));
  }
  UPLIFT_ASSIGN_OR_RETURN(const harness::ExperimentResult result,
                          harness::RunExperiment(config, offline));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "experiment.json"),
                                     harness::ExperimentConfigToJson(config)));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "reports.jsonl"),
                                     harness::ReportsToJsonLines(result.reports)));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "series.csv"),
                                     harness::ReportsToCsv(result.reports)));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest,
                                     OutPath(options, "calibration.jsonl"),
                                     result.calibration_log));
  const harness::PeriodReport& last = result.reports.back();
  for (int arm = harness::kArmB; arm < harness::kNumArms; ++arm) {
    const harness::ArmMetrics& metrics = last.cumulative[arm];
    out << "arm " << harness::kArmNames[arm] << ": cumulative ROI "
        << (metrics.roi ? FormatDouble(*metrics.roi) : "undefined")
        << ", relative ATE "
        << (metrics.relative_ate ? FormatDouble(*metrics.relative_ate)
                                 : "undefined")
        << "\n";
  }
  return manifest.Write();
}

absl::Status Compare(const Options& options, std::ostream& out) {
  Manifest manifest("compare", options);
  if (options.models.empty()) return ConfigError("compare needs --model");
  UPLIFT_ASSIGN_OR_RETURN(const Dataset data, LoadData(options, manifest));
  std::vector<eval::CompareRow> rows;
  for (const std::string& path : options.models) {
    manifest.Input(path);
    UPLIFT_ASSIGN_OR_RETURN(const uplift::UpliftModel model, LoadModel(path));
    UPLIFT_ASSIGN_OR_RETURN(const UpliftScores scores,
                            model.Score(data.records()));
    UPLIFT_ASSIGN_OR_RETURN(const eval::Evaluation evaluation,
                            eval::Evaluate(data, scores, options.grid));
    rows.push_back({std::string(uplift::MethodName(model.method())),
                    evaluation.report});
  }
  const std::string table = eval::CompareToCsv(rows);
  UPLIFT_RETURN_IF_ERROR(
      WriteOutput(manifest, OutPath(options, "compare.csv"), table));
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest, OutPath(options, "compare.json"),
                                     eval::CompareToJson(rows)));
  out << table;
  return manifest.Write();
}

absl::Status Calibrate(const Options& options, std::ostream& out) {
  Manifest manifest("calibrate", options);
  if (options.points.empty()) return ConfigError("calibrate needs --points");
  manifest.Input(options.points);
  UPLIFT_ASSIGN_OR_RETURN(const CsvTable table, ReadCsvFile(options.points));
  const bool weighted =
      table.header == std::vector<std::string>{"q", "roi", "weight"};
  if (!weighted && table.header != std::vector<std::string>{"q", "roi"}) {
    return SchemaError("points need a q,roi or q,roi,weight header");
  }
  std::vector<calibrate::CalibrationPoint> points;
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      return ShapeError("point row has wrong width");
    }
    calibrate::CalibrationPoint point;
    UPLIFT_ASSIGN_OR_RETURN(point.q, ParseDouble(row[0]));
    UPLIFT_ASSIGN_OR_RETURN(point.roi, ParseDouble(row[1]));
    if (weighted) {
      UPLIFT_ASSIGN_OR_RETURN(point.weight, ParseDouble(row[2]));
    }
    points.push_back(point);
  }
  UPLIFT_ASSIGN_OR_RETURN(const calibrate::CalibrationCurve curve,
                          calibrate::FitRoiCurve(points));
  UPLIFT_ASSIGN_OR_RETURN(
      const double q_star,
      calibrate::SolveQStar(curve, options.q_min, options.q_max));
  std::optional<double> threshold;
  if (!options.scores.empty()) {
    UPLIFT_ASSIGN_OR_RETURN(const UpliftScores reference,
                            LoadScores(options, manifest, nullptr));
    UPLIFT_ASSIGN_OR_RETURN(threshold,
                            calibrate::QToThreshold(reference, q_star));
  }
  Json result;
  result["a"] = curve.a;
  result["b"] = curve.b;
  result["c"] = curve.c;
  result["residual_norm"] = curve.residual_norm;
  result["iterations"] = curve.iterations;
  result["converged"] = curve.converged;
  result["q_star"] = q_star;
  result["theta"] = threshold ? Json(FormatDouble(*threshold)) : Json(nullptr);
  UPLIFT_RETURN_IF_ERROR(WriteOutput(manifest,
                                     OutPath(options, "calibration.json"),
                                     result.dump(2) + "\n"));
  const std::string log = OutPath(options, "calibration.jsonl");
  UPLIFT_RETURN_IF_ERROR(AppendTextFile(
      log, calibrate::CalibrationLogLine(0, points, curve, q_star,
                                         threshold.value_or(kInf))));
  manifest.Output(log);
  out << "a " << FormatDouble(curve.a) << ", b " << FormatDouble(curve.b)
      << ", c " << FormatDouble(curve.c) << ", Q* " << FormatDouble(q_star)
      << "\n";
  if (threshold) out << "theta " << FormatDouble(*threshold) << "\n";
  return manifest.Write();
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Uplift modeling under an ROI constraint", "uplift_roi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options options;

  auto add_out = [&](CLI::App* command) {
    command->add_option("--out", options.out, "Output directory")->required();
  };
  auto add_seed = [&](CLI::App* command) {
    command->add_option("--seed", options.seed, "Random seed");
  };
  auto add_scores = [&](CLI::App* command) {
    command->add_option("--model", options.models, "Model file")->expected(1);
    command->add_option("--scores", options.scores, "Scores CSV");
    command->add_option("--oracle", options.oracle, "Oracle CSV");
  };

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic trial");
  gen->add_option("--config", options.config, "Population config JSON");
  gen->add_option("--n", options.n, "Number of visitors");
  gen->add_option("--period", options.period, "Drift period")
      ->check(CLI::NonNegativeNumber);
  add_seed(gen);
  add_out(gen);

  CLI::App* train = app.add_subcommand("train", "Fit an uplift method");
  train->add_option("--method", options.method, "Method name")->required();
  train->add_option("--data", options.data, "Training dataset CSV")->required();
  train->add_option("--config", options.config, "Uplift config JSON");
  add_seed(train);
  add_out(train);

  CLI::App* score = app.add_subcommand("score", "Score a dataset");
  score->add_option("--data", options.data, "Dataset CSV")->required();
  add_scores(score);
  add_out(score);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Offline evaluation");
  evaluate->add_option("--data", options.data, "Validation dataset CSV")
      ->required();
  evaluate->add_option("--grid", options.grid, "Number of bins")
      ->check(CLI::PositiveNumber);
  add_scores(evaluate);
  add_out(evaluate);

  CLI::App* assign_cmd = app.add_subcommand("assign", "Treatment assignment");
  assign_cmd->add_option("--data", options.data, "Dataset CSV");
  auto* theta = assign_cmd->add_option("--theta", options.theta, "Threshold");
  auto* solve =
      assign_cmd->add_flag("--solve", options.solve, "Greedy knapsack");
  theta->excludes(solve);
  assign_cmd->add_option("--grid", options.grid, "Number of bins")
      ->check(CLI::PositiveNumber);
  add_scores(assign_cmd);
  add_out(assign_cmd);

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Online experiment");
  simulate_cmd->add_option("--config", options.config, "Experiment config JSON");
  simulate_cmd->add_option("--periods", options.periods, "Number of periods")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--model", options.models, "Pre-fitted scorer")
      ->expected(1);
  add_seed(simulate_cmd);
  add_out(simulate_cmd);

  CLI::App* compare = app.add_subcommand("compare", "Compare models");
  compare->add_option("--model", options.models, "Model files")->required();
  compare->add_option("--data", options.data, "Validation dataset CSV")
      ->required();
  compare->add_option("--grid", options.grid, "Number of bins")
      ->check(CLI::PositiveNumber);
  add_out(compare);

  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "Fit the ROI(Q) curve");
  calibrate_cmd->add_option("--points", options.points, "q,roi[,weight] CSV")
      ->required();
  calibrate_cmd->add_option("--scores", options.scores,
                            "Reference scores for the threshold");
  calibrate_cmd->add_option("--q-min", options.q_min, "Lower Q bound");
  calibrate_cmd->add_option("--q-max", options.q_max, "Upper Q bound");
  add_out(calibrate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  absl::Status status;
  if (gen->parsed()) status = Gen(options, out);
  if (train->parsed()) status = Train(options, out);
  if (score->parsed()) status = Score(options, out);
  if (evaluate->parsed()) status = Evaluate(options, out);
  if (assign_cmd->parsed()) status = Assign(options, out, err);
  if (simulate_cmd->parsed()) status = Simulate(options, out);
  if (compare->parsed()) status = Compare(options, out);
  if (calibrate_cmd->parsed()) status = Calibrate(options, out);
  if (!status.ok()) {
    err << "error: " << status.message() << "\n";
    return ExitCodeForStatus(status);
  }
  return 0;
}

}  // namespace uplift_roi::cli
