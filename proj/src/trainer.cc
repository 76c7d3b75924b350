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

#include "trajdistill/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "trajdistill/errors.h"

namespace trajdistill {
namespace {

void ClipByGlobalNorm(std::span<double> gradient, double max_norm) {
  if (!(max_norm > 0.0)) return;
  double sq = 0.0;
  for (double g : gradient) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : gradient) g *= s;
  }
}

uint64_t SampleSeed(uint64_t seed, int step, size_t example) {
  uint64_t x = seed ^ (static_cast<uint64_t>(step) << 32) ^ example;
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return x;
}

double SquaredDistance(const Trajectory& a, const Trajectory& b) {
  double s = 0.0;
  for (size_t t = 0; t < a.size(); ++t) s += SquaredNorm(a[t] - b[t]);
  return s;
}

// k-means over ground-truth futures divided by the distance covered in the
// last observed step, so that clusters follow maneuver shape rather than
// speed. Anchors are the centroids rescaled by the mean step length. The
// k-means++ seeding uses a fixed generator: every seed shares the anchors.
std::vector<Trajectory> SelectAnchors(std::span<const AgentExample> dataset,
                                      int count) {
  constexpr size_t kMaxCandidates = 2000;
  constexpr int kIterations = 25;
  constexpr uint64_t kAnchorSeed = 0x5eed;
  const size_t n = std::min(dataset.size(), kMaxCandidates);
  const size_t horizon = dataset.front().gt_future.size();

  std::vector<Trajectory> shapes(n);
  double mean_step = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double step = Norm(dataset[i].history.back());
    mean_step += step / n;
    const double inv = step > 1e-6 ? 1.0 / step : 1.0;
    for (Vec2 p : dataset[i].gt_future) shapes[i].push_back(inv * p);
  }

  std::mt19937_64 rng(kAnchorSeed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Trajectory> centers;
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  size_t pick = static_cast<size_t>(unit(rng) * n) % n;
  for (int a = 0; a < count; ++a) {
    centers.push_back(shapes[pick]);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(shapes[i], centers.back()));
      total += d2[i];
    }
    double u = unit(rng) * total;
    pick = static_cast<size_t>(unit(rng) * n) % n;
    for (size_t i = 0; total > 0.0 && i < n; ++i) {
      u -= d2[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
  }

  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < kIterations; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int a = 0; a < count; ++a) {
        const double d = SquaredDistance(shapes[i], centers[a]);
        if (d < best_d) {
          best_d = d;
          best = a;
        }
      }
      changed |= assignment[i] != best;
      assignment[i] = best;
    }
    if (!changed) break;
    std::vector<Trajectory> sums(count, Trajectory(horizon));
    std::vector<int> sizes(count, 0);
    for (size_t i = 0; i < n; ++i) {
      Trajectory& sum = sums[assignment[i]];
      ++sizes[assignment[i]];
      for (size_t t = 0; t < horizon; ++t) sum[t] = sum[t] + shapes[i][t];
    }
    for (int a = 0; a < count; ++a) {
      if (sizes[a] == 0) continue;
      for (size_t t = 0; t < horizon; ++t) {
        centers[a][t] = (1.0 / sizes[a]) * sums[a][t];
      }
    }
  }
  for (Trajectory& c : centers) {
    for (Vec2& p : c) p = mean_step * p;
  }
  return centers;
}

TrainResult Train(std::span<const AgentExample> dataset,
                  std::span<const GmmPrediction> targets,
                  const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const DistillConfig& dcfg) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  if (cfg.total_steps < 0) {
    throw std::invalid_argument("total_steps must be >= 0");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (dcfg.loss != DistillLoss::kNone && targets.size() != dataset.size()) {
    throw std::invalid_argument("one target per example required");
  }
  const int feature_dim = static_cast<int>(dataset.front().features.size());
  const int horizon = static_cast<int>(dataset.front().gt_future.size());

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  std::vector<Trajectory> anchors;
  if (model_cfg.anchor_init) {
    anchors = SelectAnchors(dataset, model_cfg.modes);
  }
  result.model = StudentModel::Initialize(feature_dim, horizon, model_cfg,
                                          rng(), anchors);
  StudentModel& model = result.model;
  AdamW optimizer(model.parameters().size(), cfg.optimizer);

  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});
  size_t cursor = order.size();
  std::vector<double> gradient(model.parameters().size());
  std::vector<Trajectory> samples;
  const EvalConfig teacher_sampling{dcfg.w_var, 1.0};

  for (int step = 0; step < cfg.total_steps; ++step) {
    std::fill(gradient.begin(), gradient.end(), 0.0);
    LossBreakdown batch_loss;
    const int batch = cfg.batch_size;
    const double scale = 1.0 / batch;
    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const size_t idx = order[cursor++];
      const AgentExample& ex = dataset[idx];
      DistillTarget target;
      if (dcfg.loss != DistillLoss::kNone) target.teacher = &targets[idx];
      if (dcfg.loss == DistillLoss::kSampled) {
        samples = Sample(targets[idx], teacher_sampling,
                         SampleSeed(cfg.seed, step, idx), dcfg.sample_count);
        target.samples = samples;
      }
      GmmParams params = model.Forward(ex.features);
      LossAndGradient lg =
          StudentLossAndGradient(params, target, ex.gt_future, dcfg);
      model.Backward(ex.features, lg.gradient, scale, gradient);
      batch_loss.distill_nll += scale * lg.loss.distill_nll;
      batch_loss.gt_loss += scale * lg.loss.gt_loss;
      batch_loss.total += scale * lg.loss.total;
    }
    if (!std::isfinite(batch_loss.total)) {
      throw NumericalError("training diverged at step " +
                           std::to_string(step) + ": loss is not finite");
    }
    ClipByGlobalNorm(gradient, cfg.grad_clip_norm);
    const double lr = LearningRate(cfg, step);
    optimizer.Step(model.parameters(), gradient, lr);
    result.curve.push_back({step, lr, batch_loss});
  }
  for (double p : model.parameters()) {
    if (!std::isfinite(p)) throw NumericalError("non-finite parameters");
  }
  return result;
}

}  // namespace

void ValidatePipeline(const PipelineConfig& cfg) {
  if (cfg.ensemble_size < 1 || cfg.teacher_modes < 1 ||
      cfg.teacher_nms_modes < 1 || cfg.student_modes < 1 ||
      cfg.student_nms_modes < 1) {
    throw std::invalid_argument("pipeline sizes must be positive");
  }
  if (cfg.teacher_nms_modes > cfg.ensemble_size * cfg.teacher_modes) {
    throw std::invalid_argument("M_T must not exceed K * N_T");
  }
  if (cfg.student_nms_modes > cfg.student_modes) {
    throw std::invalid_argument("M_S must not exceed N_S");
  }
}

double LearningRate(const TrainConfig& cfg, int step) {
  if (cfg.total_steps <= 0) return 0.0;
  const double frac = static_cast<double>(step) / cfg.total_steps;
  return cfg.learning_rate * std::max(0.0, 1.0 - frac);
}

TrainResult TrainTeacher(std::span<const AgentExample> dataset,
                         const ModelConfig& model_cfg, const TrainConfig& cfg,
                         uint64_t seed) {
  TrainConfig seeded = cfg;
  seeded.seed = seed;
  DistillConfig gt_only;
  gt_only.loss = DistillLoss::kNone;
  gt_only.w_gt = 1.0;
  return Train(dataset, {}, model_cfg, seeded, gt_only);
}

TrainResult TrainStudent(std::span<const AgentExample> dataset,
                         std::span<const GmmPrediction> targets,
                         const ModelConfig& model_cfg, const TrainConfig& cfg,
                         const DistillConfig& dcfg) {
  return Train(dataset, targets, model_cfg, cfg, dcfg);
}

GmmPrediction EnsemblePrediction(std::span<const StudentModel> teachers,
                                 std::span<const double> features,
                                 double temperature, const NmsConfig& nms) {
  std::vector<GmmPrediction> outputs;
  outputs.reserve(teachers.size());
  for (const StudentModel& t : teachers) outputs.push_back(t.Predict(features));
  const GmmPrediction mixture =
      Combine(EnsembleSpec::Uniform(std::move(outputs)), temperature);
  return NmsReduce(mixture, nms);
}

std::vector<GmmPrediction> BuildEnsembleTargets(
    std::span<const AgentExample> dataset,
    std::span<const StudentModel> teachers, const PipelineConfig& pipeline,
    double temperature, NmsConfig nms) {
  if (teachers.empty()) throw std::invalid_argument("no teachers");
  nms.target_modes = pipeline.teacher_nms_modes;
  std::vector<GmmPrediction> out;
  out.reserve(dataset.size());
  for (const AgentExample& ex : dataset) {
    out.push_back(EnsemblePrediction(teachers, ex.features, temperature, nms));
  }
  return out;
}

}  // namespace trajdistill
