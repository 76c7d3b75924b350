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

// Trajectory Gaussian mixture models: every mode is a sequence of
// axis-aligned 2-D Gaussians, one per timestep, independent across time, with
// a single mixing weight shared by all timesteps.

#ifndef TRAJDISTILL_GMM_H_
#define TRAJDISTILL_GMM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "trajdistill/trajectory.h"

namespace trajdistill {

struct GaussianMode {
  double weight = 1.0;
  Trajectory means;
  // Per-axis standard deviations, strictly positive.
  Trajectory stds;
};

struct GmmPrediction {
  std::vector<GaussianMode> modes;

  int NumModes() const { return static_cast<int>(modes.size()); }
  int Horizon() const {
    return modes.empty() ? 0 : static_cast<int>(modes.front().means.size());
  }
  std::vector<double> Weights() const;
};

struct EvalConfig {
  // Scale applied to every per-step variance. Zero is only meaningful for
  // sampling (it collapses each mode to its mean trajectory).
  double w_var = 1.0;
  double temperature = 1.0;
};

// Weights within this distance of summing to one are renormalized.
inline constexpr double kWeightSumTolerance = 1e-6;
// Floor applied to mixing weights before taking their logarithm.
inline constexpr double kWeightFloor = 1e-12;

// Checks every structural invariant and returns the prediction with its
// weights renormalized to sum to one. Throws std::invalid_argument on
// negative weights, non-positive or non-finite stds, non-finite means,
// mismatched horizons, or a weight sum off by more than kWeightSumTolerance.
GmmPrediction Validate(GmmPrediction pred);

// log of sum_n pi_n prod_t N(traj_t | mu_t^n, w_var * Sigma_t^n), evaluated
// with a max-shifted log-sum-exp over modes. Requires w_var > 0.
double LogProb(const GmmPrediction& pred, std::span<const Vec2> traj,
               const EvalConfig& cfg);

// log prod_t N(traj_t | mu_t, w_var * Sigma_t) for a single mode, ignoring
// its weight.
double ModeLogLikelihood(const GaussianMode& mode, std::span<const Vec2> traj,
                         double w_var);

// Sharpens (temperature < 1) or flattens (temperature > 1) the mixing
// weights: pi_n <- softmax(log(pi_n) / temperature). Weights are floored at
// kWeightFloor and renormalized first. Means and stds are untouched.
GmmPrediction ApplyTemperature(const GmmPrediction& pred, double temperature);

// Draws `count` trajectories: a mode by its weight, then an independent
// Gaussian draw per step with variance scaled by cfg.w_var. With w_var = 0
// the selected mode's mean trajectory is returned exactly.
std::vector<Trajectory> Sample(const GmmPrediction& pred,
                               const EvalConfig& cfg, uint64_t seed,
                               int count);

// Numerically stable log(sum(exp(values))). Returns -inf for an empty span or
// when every value is -inf.
double LogSumExp(std::span<const double> values);

// Shannon entropy in nats; zero-probability entries contribute nothing.
double Entropy(std::span<const double> probs);

}  // namespace trajdistill

#endif  // TRAJDISTILL_GMM_H_
