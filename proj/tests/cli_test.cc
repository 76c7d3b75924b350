// Copyright 2026 The trajdistill Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajdistill/cli.h"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "trajdistill/data_io.h"

namespace trajdistill {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kTinyConfig[] = R"({
  "seed": 5,
  "train_data": {"example_count": 200},
  "eval_data": {"example_count": 60},
  "teacher_train": {"total_steps": 30},
  "student_train": {"total_steps": 30},
  "pipeline": {"ensemble_size": 2, "teacher_nms_modes": 8}
})";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("trajdistill_cli_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "config.json").string();
    std::ofstream(config_) << kTinyConfig;
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs one subcommand against `out` with the tiny config.
  int Run(std::initializer_list<std::string> args,
          const fs::path& out = fs::path()) {
    std::vector<std::string> argv = {"trajdistill", "--quiet", "--config",
                                     config_, "--out",
                                     (out.empty() ? dir_ / "run" : out).string()};
    argv.insert(argv.end(), args.begin(), args.end());
    return RunRaw(argv);
  }

  int RunRaw(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return RunCli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static int CountLines(const std::string& text) {
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
  }

  json ErrorLine() const {
    const std::string e = err_.str();
    EXPECT_EQ(CountLines(e), 1) << e;
    return json::parse(e);
  }

  fs::path dir_;
  std::string config_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(RunRaw({"trajdistill", "--help"}), kExitOk);
  EXPECT_NE(out_.str().find("sweep-ensemble"), std::string::npos);
  EXPECT_EQ(RunRaw({"trajdistill"}), kExitUsage);
  EXPECT_EQ(ErrorLine()["error"], "usage");
  EXPECT_EQ(RunRaw({"trajdistill", "frobnicate"}), kExitUsage);
  EXPECT_EQ(ErrorLine()["error"], "usage");
  EXPECT_EQ(Run({"sweep-ensemble", "--sizes", "0"}), kExitUsage);
  EXPECT_EQ(RunRaw({"trajdistill", "--config", (dir_ / "none.json").string(),
                    "gen-data"}),
            kExitUsage);
  EXPECT_EQ(ErrorLine()["error"], "usage");
  std::ofstream(config_) << R"({"pipeline": {"student_nms_modes": 50}})";
  EXPECT_EQ(Run({"gen-data"}), kExitUsage);
  std::ofstream(config_) << "{not json";
  EXPECT_EQ(Run({"gen-data"}), kExitUsage);
}

TEST_F(CliTest, MissingInputIsDataError) {
  EXPECT_EQ(Run({"train-teachers"}), kExitData);
  const json e = ErrorLine();
  EXPECT_EQ(e["error"], "data");
  EXPECT_NE(e["message"].get<std::string>().find("train.dataset.jsonl"),
            std::string::npos);
}

TEST_F(CliTest, LockedDirectory) {
  fs::create_directories(dir_ / "run");
  std::ofstream(dir_ / "run" / ".trajdistill.lock") << "";
  EXPECT_EQ(Run({"gen-data"}), kExitData);
  EXPECT_NE(ErrorLine()["message"].get<std::string>().find("locked"),
            std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "run" / "train.dataset.jsonl"));
  fs::remove(dir_ / "run" / ".trajdistill.lock");
  EXPECT_EQ(Run({"gen-data"}), kExitOk);
  EXPECT_FALSE(fs::exists(dir_ / "run" / ".trajdistill.lock"));
}

TEST_F(CliTest, DivergenceIsNumericalError) {
  std::ofstream(config_)
      << R"({"train_data": {"example_count": 50},
             "teacher_train": {"total_steps": 20, "learning_rate": 1e200,
                               "grad_clip_norm": 0},
             "pipeline": {"ensemble_size": 1, "teacher_nms_modes": 6}})";
  ASSERT_EQ(Run({"gen-data"}), kExitOk);
  EXPECT_EQ(Run({"train-teachers"}), kExitNumerical);
  EXPECT_EQ(ErrorLine()["error"], "numerical");
}

TEST_F(CliTest, EvalOfGroundTruthPredictions) {
  ASSERT_EQ(Run({"gen-data"}), kExitOk);
  const Dataset eval = ReadDataset(dir_ / "run" / "eval.dataset.jsonl");
  std::vector<int64_t> ids;
  std::vector<GmmPrediction> preds;
  for (const AgentExample& ex : eval.examples) {
    ids.push_back(ex.example_id);
    GmmPrediction p;
    p.modes.push_back({1.0, ex.gt_future,
                       Trajectory(ex.gt_future.size(), Vec2{1.0, 1.0})});
    preds.push_back(p);
  }
  const fs::path path = dir_ / "oracle.targets.jsonl";
  WriteTargets(path, ids, preds, json::object());
  ASSERT_EQ(Run({"eval", "--predictions", path.string()}), kExitOk)
      << err_.str();
  const MetricsReport r = ReadReport(dir_ / "run" / "oracle.report.jsonl");
  EXPECT_EQ(r.num_examples, 60);
  EXPECT_EQ(r.min_ade, 0.0);
  EXPECT_EQ(r.min_fde, 0.0);
  EXPECT_EQ(r.miss_rate, 0.0);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.brier_min_fde, 0.0);
  // Predictions for other examples are rejected.
  ids.back() += 1000;
  WriteTargets(path, ids, preds, json::object());
  EXPECT_EQ(Run({"eval", "--predictions", path.string()}), kExitData);
}

TEST_F(CliTest, FullPipelineIsReproducible) {
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  for (const fs::path& out : {a, b}) {
    ASSERT_EQ(Run({"gen-data"}, out), kExitOk) << err_.str();
    ASSERT_EQ(Run({"train-teachers"}, out), kExitOk) << err_.str();
    ASSERT_EQ(Run({"build-targets"}, out), kExitOk) << err_.str();
    ASSERT_EQ(Run({"distill"}, out), kExitOk) << err_.str();
    ASSERT_EQ(Run({"eval"}, out), kExitOk) << err_.str();
    ASSERT_EQ(Run({"eval", "--model", (out / "teacher_00.ckpt.jsonl").string(),
                   "--model", (out / "teacher_01.ckpt.jsonl").string()},
                  out),
              kExitOk)
        << err_.str();
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(Slurp(entry.path()), Slurp(b / entry.path().filename()))
        << entry.path();
  }
  EXPECT_EQ(files, 9);
  EXPECT_TRUE(fs::exists(a / "student.report.jsonl"));
  EXPECT_TRUE(fs::exists(a / "ensemble_2.report.jsonl"));
  const std::string curve = Slurp(a / "student_loss.csv");
  EXPECT_EQ(curve.rfind("step,learning_rate,distill_nll,gt_loss,total\n", 0),
            0u);
  EXPECT_EQ(CountLines(curve), 31);
}

TEST_F(CliTest, DistillWithOverrides) {
  std::ofstream(config_) << R"({
    "train_data": {"example_count": 150},
    "eval_data": {"example_count": 40},
    "teacher_train": {"total_steps": 20},
    "student_train": {"total_steps": 20},
    "pipeline": {"ensemble_size": 1, "teacher_nms_modes": 6},
    "distill": {"temperature": 8, "w_gt": 0.4, "w_var": 0.5,
                "loss": "sampled", "sample_count": 4}})";
  ASSERT_EQ(Run({"gen-data"}), kExitOk);
  ASSERT_EQ(Run({"train-teachers"}), kExitOk);
  ASSERT_EQ(Run({"build-targets"}), kExitOk);
  ASSERT_EQ(Run({"distill"}), kExitOk) << err_.str();
  const Checkpoint ckpt = ReadCheckpoint(dir_ / "run" / "student.ckpt.jsonl");
  EXPECT_EQ(ckpt.steps, 20);
  EXPECT_EQ(ckpt.config["distill"]["temperature"], 8.0);
  EXPECT_EQ(ckpt.config["distill"]["loss"], "sampled");
  // The seed flag overrides the config.
  ASSERT_EQ(Run({"--seed", "9", "gen-data"}), kExitOk);
  const Dataset train = ReadDataset(dir_ / "run" / "train.dataset.jsonl");
  EXPECT_EQ(train.config["seed"], 9);
}

TEST_F(CliTest, SweepEnsembleCsv) {
  ASSERT_EQ(Run({"sweep-ensemble", "--sizes", "1", "2"}), kExitOk)
      << err_.str();
  const std::string csv = Slurp(dir_ / "run" / "sweep_ensemble.csv");
  std::istringstream in(csv);
  std::vector<std::string> labels;
  for (std::string line; std::getline(in, line);) {
    labels.push_back(line.substr(0, line.find(',')));
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 14) << line;
  }
  const std::vector<std::string> expected = {"label", "baseline", "ensemble",
                                             "ensemble", "student"};
  EXPECT_EQ(labels, expected);
}

}  // namespace
}  // namespace trajdistill
