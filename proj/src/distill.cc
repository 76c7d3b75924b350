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

#include "trajdistill/distill.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "trajdistill/errors.h"

namespace trajdistill {
namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178032973640562;

void CheckHorizon(int expected, size_t actual) {
  if (static_cast<size_t>(expected) != actual) {
    throw std::invalid_argument("horizon mismatch: expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(actual));
  }
}

double AverageDisplacement(const Trajectory& means, std::span<const Vec2> gt) {
  double sum = 0.0;
  for (size_t t = 0; t < gt.size(); ++t) sum += Norm(means[t] - gt[t]);
  return sum / static_cast<double>(gt.size());
}

// Evaluates losses and gradients directly on unconstrained parameters.
class ParamEvaluator {
 public:
  ParamEvaluator(const GmmParams& params, double w_var,
                 std::vector<double>* gradient)
      : params_(params),
        grad_(gradient),
        modes_(params.modes()),
        horizon_(params.horizon()),
        log_weights_(modes_),
        weights_(modes_),
        inv_var_(static_cast<size_t>(modes_) * 2 * horizon_),
        log_norm_(modes_, 0.0),
        scores_(modes_) {
    std::vector<double> logits(modes_);
    for (int n = 0; n < modes_; ++n) logits[n] = params.logit(n);
    const double lse = LogSumExp(logits);
    const double half_log_w = 0.5 * std::log(w_var);
    for (int n = 0; n < modes_; ++n) {
      log_weights_[n] = logits[n] - lse;
      weights_[n] = std::exp(log_weights_[n]);
      for (int t = 0; t < horizon_; ++t) {
        for (int a = 0; a < 2; ++a) {
          const double rho = params.log_std(n, t, a);
          inv_var_[Index(n, t, a)] = std::exp(-2.0 * rho) / w_var;
          log_norm_[n] -= kHalfLogTwoPi + rho + half_log_w;
        }
      }
    }
  }

  // Log-likelihood of `traj` under mode n, without the weight.
  double ModeLogLikelihood(int n, std::span<const Vec2> traj) const {
    double ll = log_norm_[n];
    for (int t = 0; t < horizon_; ++t) {
      const double dx = traj[t].x - params_.mean(n, t, 0);
      const double dy = traj[t].y - params_.mean(n, t, 1);
      ll -= 0.5 * (dx * dx * inv_var_[Index(n, t, 0)] +
                   dy * dy * inv_var_[Index(n, t, 1)]);
    }
    return ll;
  }

  // Returns -log p(traj); adds the gradient of -grad_scale * log p(traj).
  double MixtureNll(std::span<const Vec2> traj, double grad_scale) {
    for (int n = 0; n < modes_; ++n) {
      scores_[n] = log_weights_[n] + ModeLogLikelihood(n, traj);
    }
    const double lse = LogSumExp(scores_);
    if (grad_ != nullptr) {
      for (int n = 0; n < modes_; ++n) {
        const double resp = std::exp(scores_[n] - lse);
        (*grad_)[LogitIndex(n)] += grad_scale * (weights_[n] - resp);
        if (resp > 0.0) AddModeGradient(n, traj, grad_scale * resp);
      }
    }
    return -lse;
  }

  // Returns -log N(traj | mode n); adds grad_scale times its gradient.
  double ModeNll(int n, std::span<const Vec2> traj, double grad_scale) {
    if (grad_ != nullptr) AddModeGradient(n, traj, grad_scale);
    return -ModeLogLikelihood(n, traj);
  }

  // Returns -sum_n target_n log pi_n; adds grad_scale times its gradient.
  double CrossEntropy(std::span<const double> target, double grad_scale) {
    double loss = 0.0;
    double target_sum = 0.0;
    for (int n = 0; n < modes_; ++n) {
      if (target[n] > 0.0) loss -= target[n] * log_weights_[n];
      target_sum += target[n];
    }
    if (grad_ != nullptr) {
      for (int n = 0; n < modes_; ++n) {
        (*grad_)[LogitIndex(n)] +=
            grad_scale * (weights_[n] * target_sum - target[n]);
      }
    }
    return loss;
  }

  int ClosestMode(std::span<const Vec2> gt) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int n = 0; n < modes_; ++n) {
      double sum = 0.0;
      for (int t = 0; t < horizon_; ++t) {
        sum += std::hypot(gt[t].x - params_.mean(n, t, 0),
                          gt[t].y - params_.mean(n, t, 1));
      }
      if (sum < best_d) {
        best_d = sum;
        best = n;
      }
    }
    return best;
  }

  double weight(int n) const { return weights_[n]; }

 private:
  size_t Index(int n, int t, int a) const {
    return (static_cast<size_t>(n) * horizon_ + t) * 2 + a;
  }
  size_t LogitIndex(int n) const {
    return static_cast<size_t>(n) * GmmParams::BlockSize(horizon_);
  }

  // d/dtheta of -scale * log N(traj | mode n).
  void AddModeGradient(int n, std::span<const Vec2> traj, double scale) {
    const size_t base = LogitIndex(n);
    const size_t mean_base = base + 1;
    const size_t std_base = base + 1 + 2 * horizon_;
    for (int t = 0; t < horizon_; ++t) {
      const double d[2] = {traj[t].x - params_.mean(n, t, 0),
                           traj[t].y - params_.mean(n, t, 1)};
      for (int a = 0; a < 2; ++a) {
        const double iv = inv_var_[Index(n, t, a)];
        (*grad_)[mean_base + 2 * t + a] -= scale * d[a] * iv;
        (*grad_)[std_base + 2 * t + a] += scale * (1.0 - d[a] * d[a] * iv);
      }
    }
  }

  const GmmParams& params_;
  std::vector<double>* grad_;
  int modes_;
  int horizon_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  std::vector<double> inv_var_;
  std::vector<double> log_norm_;
  std::vector<double> scores_;
};

}  // namespace

GmmPrediction GmmParams::ToPrediction() const {
  std::vector<double> logits(modes_);
  for (int n = 0; n < modes_; ++n) logits[n] = logit(n);
  const double lse = LogSumExp(logits);
  GmmPrediction pred;
  pred.modes.resize(modes_);
  for (int n = 0; n < modes_; ++n) {
    GaussianMode& m = pred.modes[n];
    m.weight = std::exp(logits[n] - lse);
    m.means.resize(horizon_);
    m.stds.resize(horizon_);
    for (int t = 0; t < horizon_; ++t) {
      m.means[t] = {mean(n, t, 0), mean(n, t, 1)};
      m.stds[t] = {std::exp(log_std(n, t, 0)), std::exp(log_std(n, t, 1))};
    }
  }
  return pred;
}

GmmParams GmmParams::FromPrediction(const GmmPrediction& pred) {
  GmmParams params(pred.NumModes(), pred.Horizon());
  for (int n = 0; n < pred.NumModes(); ++n) {
    const GaussianMode& m = pred.modes[n];
    params.logit(n) = std::log(std::max(m.weight, kWeightFloor));
    for (int t = 0; t < params.horizon(); ++t) {
      params.mean(n, t, 0) = m.means[t].x;
      params.mean(n, t, 1) = m.means[t].y;
      params.log_std(n, t, 0) = std::log(m.stds[t].x);
      params.log_std(n, t, 1) = std::log(m.stds[t].y);
    }
  }
  return params;
}

double DistillNllSampled(const GmmPrediction& student,
                         std::span<const Trajectory> samples,
                         const EvalConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  double loss = 0.0;
  for (const Trajectory& s : samples) loss -= LogProb(student, s, cfg);
  return loss;
}

double DistillNllEfficient(const GmmPrediction& student,
                           const GmmPrediction& teacher,
                           const EvalConfig& cfg) {
  CheckHorizon(student.Horizon(), static_cast<size_t>(teacher.Horizon()));
  double loss = 0.0;
  for (const GaussianMode& m : teacher.modes) {
    if (m.weight <= 0.0) continue;
    loss -= m.weight * LogProb(student, m.means, cfg);
  }
  return loss;
}

double BijectiveLoss(const GmmPrediction& student,
                     const GmmPrediction& teacher, const EvalConfig& cfg) {
  if (student.NumModes() != teacher.NumModes()) {
    throw std::invalid_argument(
        "bijective loss needs equal mode counts (student " +
        std::to_string(student.NumModes()) + ", teacher " +
        std::to_string(teacher.NumModes()) + ")");
  }
  CheckHorizon(student.Horizon(), static_cast<size_t>(teacher.Horizon()));
  double cross_entropy = 0.0;
  double trajectory = 0.0;
  for (int n = 0; n < teacher.NumModes(); ++n) {
    const double q = teacher.modes[n].weight;
    if (q <= 0.0) continue;
    cross_entropy -= q * std::log(student.modes[n].weight);
    trajectory -= q * ModeLogLikelihood(student.modes[n],
                                        teacher.modes[n].means, cfg.w_var);
  }
  return cross_entropy + trajectory;
}

int ClosestMode(const GmmPrediction& pred, std::span<const Vec2> gt) {
  CheckHorizon(pred.Horizon(), gt.size());
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int n = 0; n < pred.NumModes(); ++n) {
    const double d = AverageDisplacement(pred.modes[n].means, gt);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

double GtLoss(const GmmPrediction& student, std::span<const Vec2> gt,
              const EvalConfig& cfg) {
  const int n = ClosestMode(student, gt);
  const GaussianMode& m = student.modes[n];
  return -std::log(m.weight) - ModeLogLikelihood(m, gt, cfg.w_var);
}

LossBreakdown TotalLoss(const GmmPrediction& student,
                        const DistillTarget& target, std::span<const Vec2> gt,
                        const DistillConfig& cfg) {
  const EvalConfig eval{kStudentWVar, 1.0};
  LossBreakdown out;
  switch (cfg.loss) {
    case DistillLoss::kNone:
      break;
    case DistillLoss::kEfficient:
      if (target.teacher == nullptr) throw std::invalid_argument("no teacher");
      out.distill_nll = DistillNllEfficient(student, *target.teacher, eval);
      break;
    case DistillLoss::kSampled:
      out.distill_nll = DistillNllSampled(student, target.samples, eval) /
                        static_cast<double>(target.samples.size());
      break;
    case DistillLoss::kBijective:
      if (target.teacher == nullptr) throw std::invalid_argument("no teacher");
      out.distill_nll = BijectiveLoss(student, *target.teacher, eval);
      break;
  }
  if (cfg.w_gt != 0.0) out.gt_loss = GtLoss(student, gt, eval);
  out.total = out.distill_nll + cfg.w_gt * out.gt_loss;
  return out;
}

LossAndGradient StudentLossAndGradient(const GmmParams& params,
                                       const DistillTarget& target,
                                       std::span<const Vec2> gt,
                                       const DistillConfig& cfg) {
  LossAndGradient out;
  out.gradient.assign(params.values().size(), 0.0);
  ParamEvaluator eval(params, kStudentWVar, &out.gradient);
  const int horizon = params.horizon();

  switch (cfg.loss) {
    case DistillLoss::kNone:
      break;
    case DistillLoss::kEfficient: {
      if (target.teacher == nullptr) throw std::invalid_argument("no teacher");
      CheckHorizon(horizon, static_cast<size_t>(target.teacher->Horizon()));
      for (const GaussianMode& m : target.teacher->modes) {
        if (m.weight <= 0.0) continue;
        out.loss.distill_nll += m.weight * eval.MixtureNll(m.means, m.weight);
      }
      break;
    }
    case DistillLoss::kSampled: {
      if (target.samples.empty()) {
        throw std::invalid_argument("empty sample set");
      }
      const double scale = 1.0 / static_cast<double>(target.samples.size());
      for (const Trajectory& s : target.samples) {
        CheckHorizon(horizon, s.size());
        out.loss.distill_nll += eval.MixtureNll(s, scale);
      }
      out.loss.distill_nll *= scale;
      break;
    }
    case DistillLoss::kBijective: {
      if (target.teacher == nullptr) throw std::invalid_argument("no teacher");
      const GmmPrediction& teacher = *target.teacher;
      if (teacher.NumModes() != params.modes()) {
        throw std::invalid_argument("bijective loss needs equal mode counts");
      }
      CheckHorizon(horizon, static_cast<size_t>(teacher.Horizon()));
      const std::vector<double> q = teacher.Weights();
      out.loss.distill_nll += eval.CrossEntropy(q, 1.0);
      for (int n = 0; n < teacher.NumModes(); ++n) {
        if (q[n] <= 0.0) continue;
        out.loss.distill_nll +=
            q[n] * eval.ModeNll(n, teacher.modes[n].means, q[n]);
      }
      break;
    }
  }

  if (cfg.w_gt != 0.0) {
    CheckHorizon(horizon, gt.size());
    const int n = eval.ClosestMode(gt);
    std::vector<double> one_hot(params.modes(), 0.0);
    one_hot[n] = 1.0;
    out.loss.gt_loss = eval.CrossEntropy(one_hot, cfg.w_gt) +
                       eval.ModeNll(n, gt, cfg.w_gt);
  }
  out.loss.total = out.loss.distill_nll + cfg.w_gt * out.loss.gt_loss;
  if (!std::isfinite(out.loss.total)) {
    throw NumericalError("non-finite student loss");
  }
  for (double g : out.gradient) {
    if (!std::isfinite(g)) throw NumericalError("non-finite student gradient");
  }
  return out;
}

}  // namespace trajdistill
