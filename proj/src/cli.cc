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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trajdistill/data_io.h"
#include "trajdistill/errors.h"
#include "trajdistill/pipeline.h"

namespace trajdistill {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kTrainData[] = "train.dataset.jsonl";
constexpr char kEvalData[] = "eval.dataset.jsonl";
constexpr char kTargets[] = "targets.jsonl";
constexpr char kStudent[] = "student.ckpt.jsonl";
constexpr char kLossCurve[] = "student_loss.csv";
constexpr char kLockName[] = ".trajdistill.lock";

// Command line mistakes and bad config values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  int64_t seed = -1;
  bool quiet = false;
  std::vector<std::string> models;
  std::string predictions;
  std::string name;
  std::vector<double> temperatures = {1, 2, 4, 8, 16};
  std::vector<int> sizes = {1, 2, 4, 8};
};

// Holds an exclusive lock file in the output directory for the lifetime of
// the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / kLockName) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw std::runtime_error("output directory " + dir.string() +
                               " is locked by another run (" +
                               path_.string() + " exists)");
    }
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

class Runner {
 public:
  Runner(const Options& opt, std::ostream& log)
      : opt_(opt), dir_(opt.out_dir), log_(log) {}

  void Setup() {
    json j = json::object();
    if (!opt_.config_path.empty()) {
      std::ifstream in(opt_.config_path);
      if (!in) throw UsageError("cannot open config " + opt_.config_path);
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError("malformed config " + opt_.config_path + ": " +
                         e.what());
      }
    }
    if (opt_.seed >= 0) j["seed"] = opt_.seed;
    try {
      cfg_ = ExperimentConfigFromJson(j);
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("bad config value: ") + e.what());
    }
    echo_ = ExperimentConfigToJson(cfg_);
  }

  void GenData() {
    Log("generating " + std::to_string(cfg_.train_data.example_count) +
        " train and " + std::to_string(cfg_.eval_data.example_count) +
        " eval examples");
    WriteDataset(dir_ / kTrainData, Generate(cfg_.train_data), echo_);
    WriteDataset(dir_ / kEvalData, Generate(cfg_.eval_data), echo_);
  }

  void TrainTeachersCmd() {
    const Dataset train = ReadDataset(dir_ / kTrainData);
    RequireExamples(train, kTrainData);
    for (int k = 0; k < cfg_.pipeline.ensemble_size; ++k) {
      Log("training teacher " + std::to_string(k));
      WriteCheckpoint(dir_ / TeacherName(k), TrainOneTeacher(train.examples, k),
                      cfg_.teacher_train.total_steps, echo_);
    }
  }

  void BuildTargets() {
    const Dataset train = ReadDataset(dir_ / kTrainData);
    const std::vector<StudentModel> teachers = LoadTeachers();
    Log("building targets from " + std::to_string(teachers.size()) +
        " teachers");
    const std::vector<GmmPrediction> targets =
        BuildEnsembleTargets(train.examples, teachers, cfg_.pipeline,
                             cfg_.distill.temperature, cfg_.nms);
    WriteTargets(dir_ / kTargets, Ids(train.examples), targets, echo_);
  }

  void Distill() {
    const Dataset train = ReadDataset(dir_ / kTrainData);
    RequireExamples(train, kTrainData);
    std::vector<GmmPrediction> targets;
    if (cfg_.distill.loss != DistillLoss::kNone) {
      TargetCache cache = ReadTargets(dir_ / kTargets);
      if (cache.example_ids != Ids(train.examples)) {
        throw FormatError((dir_ / kTargets).string(), 1,
                          "targets do not match the training examples");
      }
      targets = std::move(cache.predictions);
    }
    Log("distilling a " + std::to_string(cfg_.pipeline.student_modes) +
        "-mode student with the " +
        std::string(DistillLossName(cfg_.distill.loss)) + " loss");
    ModelConfig shape = cfg_.student_model;
    shape.modes = cfg_.pipeline.student_modes;
    const TrainResult result =
        TrainStudent(train.examples, targets, shape, StudentTrainConfig(cfg_),
                     cfg_.distill);
    std::string csv = "step,learning_rate,distill_nll,gt_loss,total\n";
    char line[256];
    for (const LossRecord& r : result.curve) {
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n",
                    r.step, r.learning_rate, r.loss.distill_nll,
                    r.loss.gt_loss, r.loss.total);
      csv += line;
    }
    WriteFileAtomically(dir_ / kLossCurve, csv);
    WriteCheckpoint(dir_ / kStudent, result.model,
                    cfg_.student_train.total_steps, echo_);
  }

  void Eval() {
    const Dataset eval = ReadDataset(dir_ / kEvalData);
    std::vector<GmmPrediction> preds;
    std::string name = opt_.name;
    if (!opt_.predictions.empty()) {
      if (!opt_.models.empty()) {
        throw UsageError("--predictions and --model are exclusive");
      }
      TargetCache cache = ReadTargets(opt_.predictions);
      if (cache.example_ids != Ids(eval.examples)) {
        throw FormatError(opt_.predictions, 1,
                          "predictions do not match the eval examples");
      }
      preds = std::move(cache.predictions);
      if (name.empty()) name = Stem(opt_.predictions);
    } else {
      std::vector<std::string> paths = opt_.models;
      if (paths.empty()) paths.push_back((dir_ / kStudent).string());
      std::vector<StudentModel> models;
      for (const std::string& p : paths) models.push_back(ReadCheckpoint(p).model);
      const int m_s = cfg_.pipeline.student_nms_modes;
      if (models.size() == 1) {
        preds = PredictModel(models.front(), eval.examples, m_s, cfg_.nms);
        if (name.empty()) name = Stem(paths.front());
      } else {
        preds = PredictEnsemble(models, eval.examples, m_s, cfg_.nms);
        if (name.empty()) name = "ensemble_" + std::to_string(models.size());
      }
    }
    Log("evaluating " + name + " on " + std::to_string(eval.examples.size()) +
        " examples");
    const MetricsReport report = Evaluate(preds, eval.examples);
    WriteReport(dir_ / (name + ".report.jsonl"), report, echo_);
  }

  void SweepTemperatureCmd() {
    Log("temperature sweep over " + std::to_string(opt_.temperatures.size()) +
        " values");
    WriteFileAtomically(dir_ / "sweep_temperature.csv",
                        SweepCsv(SweepTemperature(cfg_, opt_.temperatures)));
  }

  void SweepEnsembleCmd() {
    Log("ensemble sweep over " + std::to_string(opt_.sizes.size()) +
        " sizes");
    WriteFileAtomically(dir_ / "sweep_ensemble.csv",
                        SweepCsv(SweepEnsemble(cfg_, opt_.sizes)));
  }

  void CompareLossCmd() {
    Log("comparing bijective and learned mode mapping");
    WriteFileAtomically(dir_ / "compare_loss.csv",
                        SweepCsv(CompareLoss(cfg_)));
  }

 private:
  static std::string TeacherName(int k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "teacher_%02d.ckpt.jsonl", k);
    return buf;
  }

  static std::string Stem(const fs::path& p) {
    std::string s = p.filename().string();
    return s.substr(0, s.find('.'));
  }

  static std::vector<int64_t> Ids(const std::vector<AgentExample>& examples) {
    std::vector<int64_t> ids;
    ids.reserve(examples.size());
    for (const AgentExample& ex : examples) ids.push_back(ex.example_id);
    return ids;
  }

  void RequireExamples(const Dataset& d, const char* file) const {
    if (d.examples.empty()) {
      throw FormatError((dir_ / file).string(), 1, "dataset has no examples");
    }
  }

  // Same shape and seed as teacher k of TrainTeachers().
  StudentModel TrainOneTeacher(const std::vector<AgentExample>& train,
                               int k) const {
    ModelConfig shape = cfg_.teacher_model;
    shape.modes = cfg_.pipeline.teacher_modes;
    return TrainTeacher(train, shape, cfg_.teacher_train, cfg_.seed * 1000 + k)
        .model;
  }

  std::vector<StudentModel> LoadTeachers() const {
    std::vector<StudentModel> teachers;
    for (int k = 0; k < cfg_.pipeline.ensemble_size; ++k) {
      teachers.push_back(ReadCheckpoint(dir_ / TeacherName(k)).model);
    }
    return teachers;
  }

  void Log(const std::string& msg) const {
    if (!opt_.quiet) log_ << "trajdistill: " << msg << "\n";
  }

  const Options& opt_;
  fs::path dir_;
  std::ostream& log_;
  ExperimentConfig cfg_;
  json echo_;
};

int Fail(std::ostream& err, ExitCode code, std::string_view kind,
         const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  Options opt;
  CLI::App app{"Ensemble distillation for multimodal trajectory models"};
  app.require_subcommand(1, 1);
  app.add_option("--config", opt.config_path, "JSON experiment config");
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--seed", opt.seed, "Overrides the config seed")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", opt.quiet, "No progress messages");
  app.fallthrough();

  CLI::App* gen = app.add_subcommand("gen-data", "Generate train/eval data");
  CLI::App* teachers =
      app.add_subcommand("train-teachers", "Train the K teacher models");
  CLI::App* targets = app.add_subcommand(
      "build-targets", "Reduce the teacher ensemble into distillation targets");
  CLI::App* distill =
      app.add_subcommand("distill", "Train a student on the targets");
  CLI::App* eval = app.add_subcommand("eval", "Score models on eval data");
  eval->add_option("--model", opt.models,
                   "Checkpoint; several form an ensemble");
  eval->add_option("--predictions", opt.predictions,
                   "Stored predictions aligned with the eval data");
  eval->add_option("--name", opt.name, "Report name");
  CLI::App* sweep_t = app.add_subcommand(
      "sweep-temperature", "Distill at several temperatures");
  sweep_t->add_option("--temperatures", opt.temperatures)
      ->check(CLI::PositiveNumber);
  CLI::App* sweep_e = app.add_subcommand(
      "sweep-ensemble", "Score baseline, ensembles and distilled student");
  sweep_e->add_option("--sizes", opt.sizes)->check(CLI::PositiveNumber);
  CLI::App* compare = app.add_subcommand(
      "compare-loss", "Bijective versus learned mode mapping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return Fail(err, kExitUsage, "usage", e.what());
  }

  try {
    Runner runner(opt, err);
    runner.Setup();
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) {
      throw UsageError("cannot create " + opt.out_dir + ": " + ec.message());
    }
    DirectoryLock lock(opt.out_dir);
    if (gen->parsed()) runner.GenData();
    if (teachers->parsed()) runner.TrainTeachersCmd();
    if (targets->parsed()) runner.BuildTargets();
    if (distill->parsed()) runner.Distill();
    if (eval->parsed()) runner.Eval();
    if (sweep_t->parsed()) runner.SweepTemperatureCmd();
    if (sweep_e->parsed()) runner.SweepEnsembleCmd();
    if (compare->parsed()) runner.CompareLossCmd();
  } catch (const UsageError& e) {
    return Fail(err, kExitUsage, "usage", e.what());
  } catch (const NumericalError& e) {
    return Fail(err, kExitNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return Fail(err, kExitData, "data", e.what());
  }
  return kExitOk;
}

}  // namespace trajdistill
