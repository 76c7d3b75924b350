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

// Mini-batch training of teacher and student models, and construction of
// the reduced ensemble targets students are distilled from.

#ifndef TRAJDISTILL_TRAINER_H_
#define TRAJDISTILL_TRAINER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "trajdistill/distill.h"
#include "trajdistill/ensemble.h"
#include "trajdistill/model.h"
#include "trajdistill/scenario.h"

namespace trajdistill {

struct TrainConfig {
  double learning_rate = 2e-4;
  // Learning rate decays linearly to zero over total_steps.
  int total_steps = 1000;
  int batch_size = 256;
  AdamWConfig optimizer;
  double grad_clip_norm = 10.0;
  uint64_t seed = 0;
};

struct PipelineConfig {
  int ensemble_size = 8;       // K
  int teacher_modes = 64;      // N_T
  int teacher_nms_modes = 6;   // M_T
  int student_modes = 6;       // N_S
  int student_nms_modes = 6;   // M_S
};

// Throws std::invalid_argument unless M_T <= K * N_T and M_S <= N_S.
void ValidatePipeline(const PipelineConfig& cfg);

// lr0 * (1 - step / total_steps), clamped at zero.
double LearningRate(const TrainConfig& cfg, int step);

struct LossRecord {
  int step = 0;
  double learning_rate = 0.0;
  LossBreakdown loss;  // batch means
};

struct TrainResult {
  StudentModel model;
  std::vector<LossRecord> curve;
};

// Trains a model on the ground-truth loss only, initialized from `seed`
// (which also drives the batch order).
TrainResult TrainTeacher(std::span<const AgentExample> dataset,
                         const ModelConfig& model_cfg, const TrainConfig& cfg,
                         uint64_t seed);

// Trains a model on distill + w_gt * gt against per-example targets aligned
// with `dataset`. Initialization and batch order come from cfg.seed.
TrainResult TrainStudent(std::span<const AgentExample> dataset,
                         std::span<const GmmPrediction> targets,
                         const ModelConfig& model_cfg, const TrainConfig& cfg,
                         const DistillConfig& dcfg);

// Runs every teacher on `features`, combines their outputs with uniform
// weights after tempering each one, and reduces the mixture with NMS.
GmmPrediction EnsemblePrediction(std::span<const StudentModel> teachers,
                                 std::span<const double> features,
                                 double temperature, const NmsConfig& nms);

// EnsemblePrediction for every example, reduced to pipeline.teacher_nms_modes.
std::vector<GmmPrediction> BuildEnsembleTargets(
    std::span<const AgentExample> dataset,
    std::span<const StudentModel> teachers, const PipelineConfig& pipeline,
    double temperature, NmsConfig nms = {});

}  // namespace trajdistill

#endif  // TRAJDISTILL_TRAINER_H_
