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

// Distillation losses between a student GMM and a teacher GMM (or samples
// drawn from it), the ground-truth loss, and their analytic gradients with
// respect to the student's unconstrained parameters.

#ifndef TRAJDISTILL_DISTILL_H_
#define TRAJDISTILL_DISTILL_H_

#include <span>
#include <vector>

#include "trajdistill/gmm.h"

namespace trajdistill {

// Unconstrained student parameters. Mode n occupies the contiguous block
// [logit, mean_x(0), mean_y(0), ..., mean_x(T-1), mean_y(T-1),
//  log_std_x(0), log_std_y(0), ..., log_std_x(T-1), log_std_y(T-1)].
class GmmParams {
 public:
  GmmParams() = default;
  GmmParams(int modes, int horizon)
      : modes_(modes),
        horizon_(horizon),
        values_(static_cast<size_t>(modes) * BlockSize(horizon), 0.0) {}

  static constexpr int BlockSize(int horizon) { return 1 + 4 * horizon; }

  int modes() const { return modes_; }
  int horizon() const { return horizon_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& logit(int n) { return values_[Offset(n)]; }
  double logit(int n) const { return values_[Offset(n)]; }
  // axis: 0 for x, 1 for y.
  double& mean(int n, int t, int axis) {
    return values_[Offset(n) + 1 + 2 * t + axis];
  }
  double mean(int n, int t, int axis) const {
    return values_[Offset(n) + 1 + 2 * t + axis];
  }
  double& log_std(int n, int t, int axis) {
    return values_[Offset(n) + 1 + 2 * horizon_ + 2 * t + axis];
  }
  double log_std(int n, int t, int axis) const {
    return values_[Offset(n) + 1 + 2 * horizon_ + 2 * t + axis];
  }

  // Softmax weights, exponentiated stds.
  GmmPrediction ToPrediction() const;
  // Inverse of ToPrediction (weights floored at kWeightFloor).
  static GmmParams FromPrediction(const GmmPrediction& pred);

 private:
  size_t Offset(int n) const {
    return static_cast<size_t>(n) * BlockSize(horizon_);
  }

  int modes_ = 0;
  int horizon_ = 0;
  std::vector<double> values_;
};

enum class DistillLoss {
  kNone,       // ground-truth loss only
  kEfficient,  // teacher mode means weighted by teacher probabilities
  kSampled,    // trajectories sampled from the teacher
  kBijective,  // index-paired modes plus cross entropy on weights
};

struct DistillConfig {
  double temperature = 8.0;
  double w_gt = 0.4;
  // Teacher variance scale used when sampling teacher trajectories.
  double w_var = 0.5;
  int sample_count = 32;
  DistillLoss loss = DistillLoss::kEfficient;
};

struct LossBreakdown {
  double distill_nll = 0.0;
  double gt_loss = 0.0;
  double total = 0.0;
};

// Variance scale used for every student-side density evaluation.
inline constexpr double kStudentWVar = 1.0;

// -sum_j log p(samples_j | student).
double DistillNllSampled(const GmmPrediction& student,
                         std::span<const Trajectory> samples,
                         const EvalConfig& cfg);

// -sum_n pi_teacher^n log p(mu_teacher^n | student): the zero teacher
// variance limit of the sampled loss, in expectation.
double DistillNllEfficient(const GmmPrediction& student,
                           const GmmPrediction& teacher,
                           const EvalConfig& cfg);

// Cross entropy between index-paired teacher and student weights plus the
// teacher-weighted NLL of each teacher mean under the paired student mode.
// Requires equal mode counts.
double BijectiveLoss(const GmmPrediction& student,
                     const GmmPrediction& teacher, const EvalConfig& cfg);

// Index of the mode whose mean trajectory has the smallest average
// displacement from `gt` (lowest index on ties).
int ClosestMode(const GmmPrediction& pred, std::span<const Vec2> gt);

// Hard-assignment NLL: -log pi_n* - log N(gt | mode n*) for the closest mode.
double GtLoss(const GmmPrediction& student, std::span<const Vec2> gt,
              const EvalConfig& cfg);

// What the student is distilled from. `teacher` is used by the efficient and
// bijective losses, `samples` by the sampled loss.
struct DistillTarget {
  const GmmPrediction* teacher = nullptr;
  std::span<const Trajectory> samples;
};

// distill + w_gt * gt. The sampled distill term is averaged over samples so
// that w_gt has the same meaning for every loss kind.
LossBreakdown TotalLoss(const GmmPrediction& student,
                        const DistillTarget& target, std::span<const Vec2> gt,
                        const DistillConfig& cfg);

struct LossAndGradient {
  LossBreakdown loss;
  // Same layout as GmmParams::values().
  std::vector<double> gradient;
};

// TotalLoss evaluated at ToPrediction(params) with student w_var fixed at
// kStudentWVar, together with its exact gradient. Throws NumericalError on a
// non-finite result.
LossAndGradient StudentLossAndGradient(const GmmParams& params,
                                       const DistillTarget& target,
                                       std::span<const Vec2> gt,
                                       const DistillConfig& cfg);

}  // namespace trajdistill

#endif  // TRAJDISTILL_DISTILL_H_
