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

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "uplift_roi/dataset_io.h"
#include "uplift_roi/simulate.h"

namespace uplift_roi::cli {
namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult RunTool(std::initializer_list<std::string> args) {
  std::vector<std::string> owned = {"uplift_roi"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& arg : owned) argv.push_back(arg.c_str());
  std::ostringstream out, err;
  RunResult result;
  result.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string Slurp(const std::string& path) {
  return *ReadTextFile(path);
}

void Write(const std::string& path, const std::string& content) {
  ASSERT_TRUE(WriteTextFile(path, content).ok());
}

constexpr char kFastUplift[] =
    R"({"learner": {"kind": "boosted-trees", "rounds": 10, "max_depth": 3}})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = uplift_roi::testing::ScratchDir(
        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    Write(dir_ + "/uplift.json", kFastUplift);
  }
  std::string dir_;
};

TEST_F(CliTest, GenWritesDatasetAndManifest) {
  const RunResult r = RunTool({"gen", "--n", "1500", "--seed", "4", "--out", dir_});
  ASSERT_EQ(r.code, 0) << r.err;
  auto dataset = LoadDataset(dir_ + "/data.csv");
  ASSERT_TRUE(dataset.ok());
  EXPECT_EQ(dataset->size(), 1500u);
  EXPECT_EQ(dataset->seed(), 4u);
  auto oracle = simulate::OracleFromCsv(Slurp(dir_ + "/data.oracle.csv"));
  EXPECT_EQ(oracle->size(), 1500u);
  const std::string manifest = Slurp(dir_ + "/manifest.jsonl");
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 1);
  EXPECT_NE(manifest.find("\"command\":\"gen\""), std::string::npos);
  EXPECT_NE(manifest.find("\"tool_version\""), std::string::npos);
  // Append-only: a second run adds a line.
  ASSERT_EQ(RunTool({"gen", "--n", "10", "--out", dir_}).code, 0);
  const std::string twice = Slurp(dir_ + "/manifest.jsonl");
  EXPECT_EQ(std::count(twice.begin(), twice.end(), '\n'), 2);
}

TEST_F(CliTest, GenIsByteIdenticalForOneSeed) {
  ASSERT_EQ(RunTool({"gen", "--n", "800", "--seed", "9", "--out", dir_ + "/a"}).code, 0);
  ASSERT_EQ(RunTool({"gen", "--n", "800", "--seed", "9", "--out", dir_ + "/b"}).code, 0);
  for (const char* name : {"data.csv", "data.meta.json", "data.oracle.csv",
                           "population.json"}) {
    EXPECT_EQ(Slurp(dir_ + "/a/" + name), Slurp(dir_ + "/b/" + name)) << name;
  }
}

TEST_F(CliTest, MissingConfigExitsTwo) {
  const RunResult r =
      RunTool({"gen", "--config", dir_ + "/absent.json", "--out", dir_});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("config not found"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunTool({"frobnicate"}).code, 2);
  EXPECT_EQ(RunTool({"train", "--method", "two-models"}).code, 2);
  EXPECT_EQ(RunTool({"assign", "--theta", "1", "--solve", "--out", dir_}).code, 2);
}

TEST_F(CliTest, SchemaErrorExitsThree) {
  Write(dir_ + "/bad.json", R"({"feature_dim": "four"})");
  const RunResult r = RunTool({"gen", "--config", dir_ + "/bad.json", "--out", dir_});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  ASSERT_EQ(RunTool({"gen", "--n", "500", "--out", dir_}).code, 0);
  EXPECT_EQ(RunTool({"train", "--method", "x-learner", "--data", dir_ + "/data.csv",
                 "--out", dir_})
                .code,
            3);
}

TEST_F(CliTest, NoPurchasesExitsFour) {
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  for (auto& segment : config.segments) segment.weight = 0;
  config.segments[static_cast<int>(simulate::Segment::kLostCause)].weight = 1;
  Write(dir_ + "/pop.json", simulate::PopulationConfigToJson(config));
  ASSERT_EQ(RunTool({"gen", "--config", dir_ + "/pop.json", "--n", "300", "--out",
                 dir_}).code,
            0);
  const RunResult r = RunTool({"train", "--method", "retrospective", "--data",
                           dir_ + "/data.csv", "--out", dir_});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("no purchases in the treated arm"), std::string::npos);
}

TEST_F(CliTest, ShapeMismatchExitsFour) {
  ASSERT_EQ(RunTool({"gen", "--n", "300", "--out", dir_}).code, 0);
  Write(dir_ + "/few.csv", "cate_y,cate_loss\n0.1,0.2\n");
  EXPECT_EQ(RunTool({"evaluate", "--data", dir_ + "/data.csv", "--scores",
                 dir_ + "/few.csv", "--out", dir_})
                .code,
            4);
}

TEST_F(CliTest, ExpensivePromotionExitsFive) {
  simulate::PopulationConfig config = simulate::DefaultPopulationConfig();
  config.cost = 25;
  Write(dir_ + "/pop.json", simulate::PopulationConfigToJson(config));
  ASSERT_EQ(RunTool({"gen", "--config", dir_ + "/pop.json", "--n", "2000", "--out",
                 dir_}).code,
            0);
  EXPECT_EQ(RunTool({"train", "--method", "retrospective", "--data",
                 dir_ + "/data.csv", "--out", dir_})
                .code,
            5);
}

TEST_F(CliTest, SolveOnWorkedExample) {
  Write(dir_ + "/scores.csv", "cate_y,cate_loss\n3,-1\n2,2\n1,1\n4,5\n");
  const RunResult r =
      RunTool({"assign", "--scores", dir_ + "/scores.csv", "--solve", "--out", dir_});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("theta* = 1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("treated 2 of 4: 0 2\n"), std::string::npos) << r.out;
  const std::string csv = Slurp(dir_ + "/assignment.csv");
  EXPECT_NE(csv.find("\n2,1,1\n"), std::string::npos) << csv;
}

TEST_F(CliTest, ThresholdAssignment) {
  Write(dir_ + "/scores.csv", "cate_y,cate_loss\n3,-1\n2,2\n1,1\n4,5\n");
  const RunResult r = RunTool(
      {"assign", "--scores", dir_ + "/scores.csv", "--theta", "0.9", "--out", dir_});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("treated 3 of 4: 0 1 2\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, TrainScoreEvaluateCompare) {
  ASSERT_EQ(RunTool({"gen", "--n", "6000", "--seed", "1", "--out", dir_ + "/train"}).code, 0);
  ASSERT_EQ(RunTool({"gen", "--n", "4000", "--seed", "2", "--out", dir_ + "/valid"}).code, 0);
  std::vector<std::string> models;
  for (const char* method : {"two-models", "transformed-outcome",
                             "fractional-approximation", "retrospective"}) {
    const std::string out = dir_ + "/" + method;
    const RunResult r = RunTool({"train", "--method", method, "--data",
                             dir_ + "/train/data.csv", "--config",
                             dir_ + "/uplift.json", "--seed", "3", "--out", out});
    ASSERT_EQ(r.code, 0) << method << r.err;
    models.push_back(out + "/model.json");
  }
  const RunResult scored = RunTool({"score", "--data", dir_ + "/valid/data.csv",
                                "--model", models[3], "--out", dir_ + "/s"});
  ASSERT_EQ(scored.code, 0) << scored.err;
  auto scores = ScoresFromCsv(Slurp(dir_ + "/s/scores.csv"));
  EXPECT_EQ(scores->size(), 4000u);

  const RunResult evaluated =
      RunTool({"evaluate", "--data", dir_ + "/valid/data.csv", "--model", models[2],
           "--grid", "50", "--out", dir_ + "/e"});
  ASSERT_EQ(evaluated.code, 0) << evaluated.err;
  const std::string qini = Slurp(dir_ + "/e/qini.csv");
  EXPECT_EQ(std::count(qini.begin(), qini.end(), '\n'), 52);

  const RunResult compared =
      RunTool({"compare", "--model", models[0], "--model", models[1], "--model",
           models[2], "--model", models[3], "--data", dir_ + "/valid/data.csv",
           "--out", dir_ + "/c"});
  ASSERT_EQ(compared.code, 0) << compared.err;
  auto table = ParseCsv(Slurp(dir_ + "/c/compare.csv"));
  ASSERT_TRUE(table.ok());
  EXPECT_EQ(table->header,
            std::vector<std::string>({"method", "auuc", "max_population_at_roi0",
                                      "max_ate_at_roi0"}));
  ASSERT_EQ(table->rows.size(), 4u);
  EXPECT_EQ(table->rows[3][0], "retrospective");

  // Retrospective scores carry no magnitudes; --solve falls back to the
  // Qini-ROI operating point on --data.
  const RunResult solved =
      RunTool({"assign", "--data", dir_ + "/valid/data.csv", "--model", models[3],
           "--solve", "--out", dir_ + "/a"});
  EXPECT_EQ(solved.code, 0) << solved.err;
  EXPECT_NE(solved.out.find("theta* = "), std::string::npos);
}

TEST_F(CliTest, CalibrateSolvesKnownCurve) {
  std::string points = "q,roi\n";
  for (int i = 0; i <= 10; ++i) {
    const double q = i / 10.0;
    points += FormatDouble(q) + "," + FormatDouble(std::exp(-2 * q) - 0.5) + "\n";
  }
  Write(dir_ + "/points.csv", points);
  const RunResult r = RunTool({"calibrate", "--points", dir_ + "/points.csv",
                           "--q-min", "0", "--out", dir_});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string result = Slurp(dir_ + "/calibration.json");
  EXPECT_NE(result.find("\"q_star\": 0.34657359"), std::string::npos) << result;
  Write(dir_ + "/two.csv", "q,roi\n0.1,1\n0.2,0.5\n");
  EXPECT_EQ(RunTool({"calibrate", "--points", dir_ + "/two.csv", "--out", dir_}).code, 4);
}

TEST_F(CliTest, SimulateSmallExperiment) {
  Write(dir_ + "/exp.json", R"({"periods": 2, "visitors_per_period": 4000,
    "train_size": 6000, "validation_size": 3000,
    "uplift": {"learner": {"rounds": 10}}})");
  const RunResult r = RunTool({"simulate", "--config", dir_ + "/exp.json", "--seed",
                           "2", "--out", dir_});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string series = Slurp(dir_ + "/series.csv");
  EXPECT_EQ(std::count(series.begin(), series.end(), '\n'), 1 + 2 * 4);
  const std::string reports = Slurp(dir_ + "/reports.jsonl");
  EXPECT_EQ(std::count(reports.begin(), reports.end(), '\n'), 2);
}

}  // namespace
}  // namespace uplift_roi::cli
