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

#include "trajdistill/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "trajdistill/data_io.h"

namespace trajdistill {
namespace {

using nlohmann::json;

constexpr uint64_t kEvalSeedOffset = 1000003;

// Mode counts live in the pipeline section.
json ModelConfigToJson(const ModelConfig& m) {
  return {{"mean_scale", m.mean_scale},
          {"init_mean_std", m.init_mean_std},
          {"init_weight_std", m.init_weight_std},
          {"init_std", m.init_std},
          {"min_std", m.min_std},
          {"anchor_init", m.anchor_init}};
}

ModelConfig ModelConfigFromJson(const json& j, ModelConfig m) {
  m.mean_scale = j.value("mean_scale", m.mean_scale);
  m.init_mean_std = j.value("init_mean_std", m.init_mean_std);
  m.init_weight_std = j.value("init_weight_std", m.init_weight_std);
  m.init_std = j.value("init_std", m.init_std);
  m.min_std = j.value("min_std", m.min_std);
  m.anchor_init = j.value("anchor_init", m.anchor_init);
  return m;
}

json TrainConfigToJson(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"total_steps", t.total_steps},
          {"batch_size", t.batch_size},
          {"beta1", t.optimizer.beta1},
          {"beta2", t.optimizer.beta2},
          {"epsilon", t.optimizer.epsilon},
          {"weight_decay", t.optimizer.weight_decay},
          {"grad_clip_norm", t.grad_clip_norm}};
}

TrainConfig TrainConfigFromJson(const json& j, TrainConfig t) {
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.total_steps = j.value("total_steps", t.total_steps);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.optimizer.beta1 = j.value("beta1", t.optimizer.beta1);
  t.optimizer.beta2 = j.value("beta2", t.optimizer.beta2);
  t.optimizer.epsilon = j.value("epsilon", t.optimizer.epsilon);
  t.optimizer.weight_decay = j.value("weight_decay", t.optimizer.weight_decay);
  t.grad_clip_norm = j.value("grad_clip_norm", t.grad_clip_norm);
  return t;
}

std::string_view DistanceName(DistanceKind k) {
  return k == DistanceKind::kFinalPoint ? "final_point" : "mean_over_time";
}

DistanceKind ParseDistance(const std::string& s) {
  if (s == "final_point") return DistanceKind::kFinalPoint;
  if (s == "mean_over_time") return DistanceKind::kMeanOverTime;
  throw std::invalid_argument("unknown distance kind: " + s);
}

double RelativeCost(const StudentModel& model, const StudentModel& reference) {
  return static_cast<double>(model.FlopsPerInference()) /
         static_cast<double>(reference.FlopsPerInference());
}

std::vector<GmmPrediction> Reduce(std::vector<GmmPrediction> preds,
                                  int output_modes, NmsConfig nms) {
  nms.target_modes = output_modes;
  for (GmmPrediction& p : preds) {
    if (p.NumModes() > output_modes) p = NmsReduce(p, nms);
  }
  return preds;
}

struct Data {
  std::vector<AgentExample> train;
  std::vector<AgentExample> eval;
};

Data MakeData(const ExperimentConfig& cfg) {
  return {Generate(cfg.train_data), Generate(cfg.eval_data)};
}

ModelConfig StudentShape(const ExperimentConfig& cfg) {
  ModelConfig m = cfg.student_model;
  m.modes = cfg.pipeline.student_modes;
  return m;
}

SweepRow DistillRow(const ExperimentConfig& cfg, const Data& data,
                    std::span<const StudentModel> teachers,
                    const DistillConfig& dcfg, const PipelineConfig& pipeline,
                    std::string label) {
  const std::vector<GmmPrediction> targets = BuildEnsembleTargets(
      data.train, teachers, pipeline, dcfg.temperature, cfg.nms);
  ModelConfig shape = cfg.student_model;
  shape.modes = pipeline.student_modes;
  const TrainResult student = TrainStudent(
      data.train, targets, shape, StudentTrainConfig(cfg), dcfg);
  SweepRow row;
  row.label = std::move(label);
  row.ensemble_size = static_cast<int>(teachers.size());
  row.relative_cost = RelativeCost(student.model, teachers.front());
  row.temperature = dcfg.temperature;
  row.teacher_nms_modes = pipeline.teacher_nms_modes;
  row.student_modes = pipeline.student_modes;
  row.loss = DistillLossName(dcfg.loss);
  row.report = Evaluate(PredictModel(student.model, data.eval,
                                     pipeline.student_nms_modes, cfg.nms),
                        data.eval);
  return row;
}

}  // namespace

ExperimentConfig ExperimentConfig::Default() {
  ExperimentConfig cfg;
  cfg.train_data.example_count = 10000;
  cfg.eval_data.example_count = 2000;
  cfg.teacher_model.modes = 6;
  cfg.student_model.modes = 6;
  cfg.teacher_train.learning_rate = 0.05;
  cfg.teacher_train.total_steps = 2000;
  cfg.teacher_train.batch_size = 64;
  cfg.student_train = cfg.teacher_train;
  cfg.student_train.total_steps = 1000;
  cfg.pipeline.ensemble_size = 8;
  cfg.pipeline.teacher_modes = 6;
  cfg.pipeline.teacher_nms_modes = 12;
  cfg.pipeline.student_modes = 6;
  cfg.pipeline.student_nms_modes = 6;
  cfg.nms.coverage_radius = 4.0;
  cfg.seed = 0;
  cfg.train_data.seed = 0;
  cfg.eval_data.seed = kEvalSeedOffset;
  return cfg;
}

json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  return {
      {"seed", cfg.seed},
      {"train_data", ScenarioConfigToJson(cfg.train_data)},
      {"eval_data", ScenarioConfigToJson(cfg.eval_data)},
      {"teacher_model", ModelConfigToJson(cfg.teacher_model)},
      {"student_model", ModelConfigToJson(cfg.student_model)},
      {"teacher_train", TrainConfigToJson(cfg.teacher_train)},
      {"student_train", TrainConfigToJson(cfg.student_train)},
      {"pipeline",
       {{"ensemble_size", cfg.pipeline.ensemble_size},
        {"teacher_modes", cfg.pipeline.teacher_modes},
        {"teacher_nms_modes", cfg.pipeline.teacher_nms_modes},
        {"student_modes", cfg.pipeline.student_modes},
        {"student_nms_modes", cfg.pipeline.student_nms_modes}}},
      {"distill",
       {{"temperature", cfg.distill.temperature},
        {"w_gt", cfg.distill.w_gt},
        {"w_var", cfg.distill.w_var},
        {"sample_count", cfg.distill.sample_count},
        {"loss", DistillLossName(cfg.distill.loss)}}},
      {"nms",
       {{"coverage_radius", cfg.nms.coverage_radius},
        {"refine_iters", cfg.nms.refine_iters},
        {"distance", DistanceName(cfg.nms.distance)}}},
  };
}

ExperimentConfig ExperimentConfigFromJson(const json& j) {
  ExperimentConfig cfg = ExperimentConfig::Default();
  if (j.contains("seed")) {
    cfg.seed = j["seed"].get<uint64_t>();
    cfg.train_data.seed = cfg.seed;
    cfg.eval_data.seed = cfg.seed + kEvalSeedOffset;
  }
  if (j.contains("train_data")) {
    json merged = ScenarioConfigToJson(cfg.train_data);
    merged.update(j["train_data"]);
    cfg.train_data = ScenarioConfigFromJson(merged);
  }
  if (j.contains("eval_data")) {
    json merged = ScenarioConfigToJson(cfg.eval_data);
    merged.update(j["eval_data"]);
    cfg.eval_data = ScenarioConfigFromJson(merged);
  }
  if (j.contains("teacher_model")) {
    cfg.teacher_model = ModelConfigFromJson(j["teacher_model"], cfg.teacher_model);
  }
  if (j.contains("student_model")) {
    cfg.student_model = ModelConfigFromJson(j["student_model"], cfg.student_model);
  }
  if (j.contains("teacher_train")) {
    cfg.teacher_train = TrainConfigFromJson(j["teacher_train"], cfg.teacher_train);
  }
  if (j.contains("student_train")) {
    cfg.student_train = TrainConfigFromJson(j["student_train"], cfg.student_train);
  }
  if (j.contains("pipeline")) {
    const json& p = j["pipeline"];
    cfg.pipeline.ensemble_size = p.value("ensemble_size", cfg.pipeline.ensemble_size);
    cfg.pipeline.teacher_modes = p.value("teacher_modes", cfg.pipeline.teacher_modes);
    cfg.pipeline.teacher_nms_modes =
        p.value("teacher_nms_modes", cfg.pipeline.teacher_nms_modes);
    cfg.pipeline.student_modes = p.value("student_modes", cfg.pipeline.student_modes);
    cfg.pipeline.student_nms_modes =
        p.value("student_nms_modes", cfg.pipeline.student_nms_modes);
  }
  if (j.contains("distill")) {
    const json& d = j["distill"];
    cfg.distill.temperature = d.value("temperature", cfg.distill.temperature);
    cfg.distill.w_gt = d.value("w_gt", cfg.distill.w_gt);
    cfg.distill.w_var = d.value("w_var", cfg.distill.w_var);
    cfg.distill.sample_count = d.value("sample_count", cfg.distill.sample_count);
    if (d.contains("loss")) {
      cfg.distill.loss = ParseDistillLoss(d["loss"].get<std::string>());
    }
  }
  if (j.contains("nms")) {
    const json& n = j["nms"];
    cfg.nms.coverage_radius = n.value("coverage_radius", cfg.nms.coverage_radius);
    cfg.nms.refine_iters = n.value("refine_iters", cfg.nms.refine_iters);
    if (n.contains("distance")) {
      cfg.nms.distance = ParseDistance(n["distance"].get<std::string>());
    }
  }
  cfg.teacher_model.modes = cfg.pipeline.teacher_modes;
  cfg.student_model.modes = cfg.pipeline.student_modes;
  ValidatePipeline(cfg.pipeline);
  ValidateConfig(cfg.train_data);
  ValidateConfig(cfg.eval_data);
  return cfg;
}

TrainConfig StudentTrainConfig(const ExperimentConfig& cfg) {
  TrainConfig t = cfg.student_train;
  t.seed = cfg.seed * 1000 + 999;
  return t;
}

std::vector<StudentModel> TrainTeachers(std::span<const AgentExample> dataset,
                                        const ExperimentConfig& cfg, int count,
                                        uint64_t base_seed) {
  ModelConfig shape = cfg.teacher_model;
  shape.modes = cfg.pipeline.teacher_modes;
  std::vector<StudentModel> teachers;
  teachers.reserve(count);
  for (int k = 0; k < count; ++k) {
    teachers.push_back(
        TrainTeacher(dataset, shape, cfg.teacher_train, base_seed * 1000 + k)
            .model);
  }
  return teachers;
}

std::vector<GmmPrediction> PredictModel(const StudentModel& model,
                                        std::span<const AgentExample> dataset,
                                        int output_modes,
                                        const NmsConfig& nms) {
  std::vector<GmmPrediction> out;
  out.reserve(dataset.size());
  for (const AgentExample& ex : dataset) out.push_back(model.Predict(ex.features));
  return Reduce(std::move(out), output_modes, nms);
}

std::vector<GmmPrediction> PredictEnsemble(
    std::span<const StudentModel> teachers,
    std::span<const AgentExample> dataset, int output_modes,
    const NmsConfig& nms) {
  NmsConfig reduce = nms;
  reduce.target_modes = output_modes;
  std::vector<GmmPrediction> out;
  out.reserve(dataset.size());
  for (const AgentExample& ex : dataset) {
    out.push_back(EnsemblePrediction(teachers, ex.features, 1.0, reduce));
  }
  return out;
}

MetricsReport Evaluate(std::span<const GmmPrediction> preds,
                       std::span<const AgentExample> dataset) {
  if (preds.size() != dataset.size()) {
    throw std::invalid_argument("one prediction per example required");
  }
  std::vector<PredictionSet> sets;
  std::vector<Trajectory> gts;
  std::vector<Maneuver> buckets;
  std::vector<std::vector<Trajectory>> others;
  for (size_t i = 0; i < preds.size(); ++i) {
    sets.push_back(ToPredictionSet(preds[i]));
    gts.push_back(dataset[i].gt_future);
    buckets.push_back(dataset[i].bucket);
    others.push_back(dataset[i].other_agents);
  }
  return ComputeMetrics({sets, gts, buckets, others});
}

std::vector<SweepRow> SweepEnsemble(const ExperimentConfig& cfg,
                                    std::span<const int> sizes) {
  if (sizes.empty()) throw std::invalid_argument("no ensemble sizes");
  const Data data = MakeData(cfg);
  const int max_k = *std::max_element(sizes.begin(), sizes.end());
  const std::vector<StudentModel> teachers =
      TrainTeachers(data.train, cfg, max_k, cfg.seed);
  const int m_s = cfg.pipeline.student_nms_modes;
  std::vector<SweepRow> rows;

  const TrainResult baseline = TrainTeacher(
      data.train, StudentShape(cfg), StudentTrainConfig(cfg),
      StudentTrainConfig(cfg).seed);
  SweepRow base;
  base.label = "baseline";
  base.ensemble_size = 1;
  base.relative_cost = RelativeCost(baseline.model, teachers.front());
  base.student_modes = cfg.pipeline.student_modes;
  base.loss = "none";
  base.report = Evaluate(PredictModel(baseline.model, data.eval, m_s, cfg.nms),
                         data.eval);
  rows.push_back(base);

  for (int k : sizes) {
    if (k < 1) throw std::invalid_argument("ensemble size must be >= 1");
    const std::span<const StudentModel> pool(teachers.data(), k);
    SweepRow row;
    row.label = "ensemble";
    row.ensemble_size = k;
    row.relative_cost = static_cast<double>(k);
    row.teacher_nms_modes = m_s;
    row.loss = "none";
    row.report = Evaluate(PredictEnsemble(pool, data.eval, m_s, cfg.nms),
                          data.eval);
    rows.push_back(row);
  }

  PipelineConfig pipeline = cfg.pipeline;
  pipeline.ensemble_size = max_k;
  rows.push_back(DistillRow(cfg, data, teachers, cfg.distill, pipeline,
                            "student"));
  return rows;
}

std::vector<SweepRow> SweepTemperature(const ExperimentConfig& cfg,
                                       std::span<const double> temperatures) {
  const Data data = MakeData(cfg);
  const std::vector<StudentModel> teachers =
      TrainTeachers(data.train, cfg, cfg.pipeline.ensemble_size, cfg.seed);
  std::vector<SweepRow> rows;
  for (double tau : temperatures) {
    DistillConfig dcfg = cfg.distill;
    dcfg.temperature = tau;
    rows.push_back(
        DistillRow(cfg, data, teachers, dcfg, cfg.pipeline, "student"));
  }
  return rows;
}

std::vector<SweepRow> CompareLoss(const ExperimentConfig& cfg) {
  const Data data = MakeData(cfg);
  const std::vector<StudentModel> teachers =
      TrainTeachers(data.train, cfg, cfg.pipeline.ensemble_size, cfg.seed);
  std::vector<SweepRow> rows;
  const int n_s = cfg.pipeline.student_modes;

  // M_T = N_S: bijective pairing and learned mapping.
  PipelineConfig matched = cfg.pipeline;
  matched.teacher_nms_modes = n_s;
  DistillConfig bijective = cfg.distill;
  bijective.loss = DistillLoss::kBijective;
  rows.push_back(
      DistillRow(cfg, data, teachers, bijective, matched, "student"));
  DistillConfig learned = cfg.distill;
  learned.loss = DistillLoss::kEfficient;
  rows.push_back(DistillRow(cfg, data, teachers, learned, matched, "student"));

  // M_T != N_S: only the learned mapping applies.
  PipelineConfig unmatched = cfg.pipeline;
  if (unmatched.teacher_nms_modes == n_s) {
    unmatched.teacher_nms_modes = std::min(
        2 * n_s, unmatched.ensemble_size * unmatched.teacher_modes);
  }
  rows.push_back(
      DistillRow(cfg, data, teachers, learned, unmatched, "student"));
  return rows;
}

std::string SweepCsv(std::span<const SweepRow> rows) {
  std::string out =
      "label,ensemble_size,relative_cost,temperature,teacher_nms_modes,"
      "student_modes,loss,min_ade,min_fde,miss_rate,map,soft_map,overlap,"
      "brier_min_fde,num_examples\n";
  char buf[512];
  for (const SweepRow& r : rows) {
    const MetricsReport& m = r.report;
    std::snprintf(buf, sizeof(buf),
                  "%s,%d,%.17g,%.17g,%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%d\n",
                  r.label.c_str(), r.ensemble_size, r.relative_cost,
                  r.temperature, r.teacher_nms_modes, r.student_modes,
                  r.loss.c_str(), m.min_ade, m.min_fde, m.miss_rate, m.map,
                  m.soft_map, m.overlap, m.brier_min_fde, m.num_examples);
    out += buf;
  }
  return out;
}

std::string_view DistillLossName(DistillLoss loss) {
  switch (loss) {
    case DistillLoss::kNone:
      return "none";
    case DistillLoss::kEfficient:
      return "efficient";
    case DistillLoss::kSampled:
      return "sampled";
    case DistillLoss::kBijective:
      return "bijective";
  }
  return "none";
}

DistillLoss ParseDistillLoss(std::string_view name) {
  if (name == "none") return DistillLoss::kNone;
  if (name == "efficient") return DistillLoss::kEfficient;
  if (name == "sampled") return DistillLoss::kSampled;
  if (name == "bijective") return DistillLoss::kBijective;
  throw std::invalid_argument("unknown distill loss: " + std::string(name));
}

}  // namespace trajdistill
