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

// End-to-end experiment building blocks shared by the command line and the
// acceptance suite: training teacher ensembles, distilling students,
// predicting and scoring held-out data.

#ifndef TRAJDISTILL_PIPELINE_H_
#define TRAJDISTILL_PIPELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajdistill/distill.h"
#include "trajdistill/ensemble.h"
#include "trajdistill/metrics.h"
#include "trajdistill/model.h"
#include "trajdistill/scenario.h"
#include "trajdistill/trainer.h"

namespace trajdistill {

struct ExperimentConfig {
  ScenarioGenConfig train_data;
  ScenarioGenConfig eval_data;
  ModelConfig teacher_model;
  ModelConfig student_model;
  TrainConfig teacher_train;
  TrainConfig student_train;
  PipelineConfig pipeline;
  DistillConfig distill;
  NmsConfig nms;
  uint64_t seed = 0;

  // Desk-scale defaults used by the command line and the acceptance suite.
  static ExperimentConfig Default();
};

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);
// Missing keys keep their ExperimentConfig::Default() values.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);

// cfg.student_train with the seed every student of a run trains from.
TrainConfig StudentTrainConfig(const ExperimentConfig& cfg);

// Teacher k is initialized from seed base_seed * 1000 + k.
std::vector<StudentModel> TrainTeachers(std::span<const AgentExample> dataset,
                                        const ExperimentConfig& cfg, int count,
                                        uint64_t base_seed);

// Model outputs, reduced with NMS to `output_modes` when the model has more.
std::vector<GmmPrediction> PredictModel(const StudentModel& model,
                                        std::span<const AgentExample> dataset,
                                        int output_modes,
                                        const NmsConfig& nms);

// Uniform untempered ensemble reduced to `output_modes`.
std::vector<GmmPrediction> PredictEnsemble(
    std::span<const StudentModel> teachers,
    std::span<const AgentExample> dataset, int output_modes,
    const NmsConfig& nms);

MetricsReport Evaluate(std::span<const GmmPrediction> preds,
                       std::span<const AgentExample> dataset);

struct SweepRow {
  std::string label;  // baseline, ensemble, student, ...
  int ensemble_size = 0;
  double relative_cost = 0.0;
  double temperature = 0.0;
  int teacher_nms_modes = 0;
  int student_modes = 0;
  std::string loss;
  MetricsReport report;
};

// Teachers, their ensembles of each size in `sizes` (nested prefixes of one
// pool), and a student distilled from the largest ensemble next to a
// ground-truth-only student of the same shape.
std::vector<SweepRow> SweepEnsemble(const ExperimentConfig& cfg,
                                    std::span<const int> sizes);

// Students distilled from the cfg.pipeline.ensemble_size ensemble at each
// temperature.
std::vector<SweepRow> SweepTemperature(const ExperimentConfig& cfg,
                                       std::span<const double> temperatures);

// Bijective versus learned mode mapping: (M_T = N_S, bijective),
// (M_T = N_S, efficient) and (M_T != N_S, efficient).
std::vector<SweepRow> CompareLoss(const ExperimentConfig& cfg);

std::string SweepCsv(std::span<const SweepRow> rows);

std::string_view DistillLossName(DistillLoss loss);
DistillLoss ParseDistillLoss(std::string_view name);

}  // namespace trajdistill

#endif  // TRAJDISTILL_PIPELINE_H_
