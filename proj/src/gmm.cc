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

#include "trajdistill/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace trajdistill {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

bool IsFinite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

void CheckTrajectoryLength(const GmmPrediction& pred,
                           std::span<const Vec2> traj) {
  if (static_cast<int>(traj.size()) != pred.Horizon()) {
    throw std::invalid_argument(
        "trajectory length " + std::to_string(traj.size()) +
        " does not match prediction horizon " +
        std::to_string(pred.Horizon()));
  }
}

}  // namespace

std::vector<double> GmmPrediction::Weights() const {
  std::vector<double> w;
  w.reserve(modes.size());
  for (const GaussianMode& m : modes) w.push_back(m.weight);
  return w;
}

GmmPrediction Validate(GmmPrediction pred) {
  if (pred.modes.empty()) {
    throw std::invalid_argument("prediction has no modes");
  }
  const size_t horizon = pred.modes.front().means.size();
  if (horizon == 0) throw std::invalid_argument("empty trajectory horizon");
  double sum = 0.0;
  for (const GaussianMode& m : pred.modes) {
    if (m.means.size() != horizon || m.stds.size() != horizon) {
      throw std::invalid_argument("mismatched horizon across modes");
    }
    if (!std::isfinite(m.weight) || m.weight < 0.0) {
      throw std::invalid_argument("negative weight");
    }
    for (size_t t = 0; t < horizon; ++t) {
      if (!IsFinite(m.means[t])) {
        throw std::invalid_argument("non-finite mean");
      }
      const Vec2 s = m.stds[t];
      if (!(s.x > 0.0) || !(s.y > 0.0) || !IsFinite(s)) {
        throw std::invalid_argument("non-positive std");
      }
    }
    sum += m.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("weights sum to " + std::to_string(sum) +
                                ", not 1");
  }
  for (GaussianMode& m : pred.modes) m.weight /= sum;
  return pred;
}

double ModeLogLikelihood(const GaussianMode& mode, std::span<const Vec2> traj,
                         double w_var) {
  const double log_w_var = std::log(w_var);
  double ll = 0.0;
  for (size_t t = 0; t < traj.size(); ++t) {
    const Vec2 s = mode.stds[t];
    const double zx = (traj[t].x - mode.means[t].x) / s.x;
    const double zy = (traj[t].y - mode.means[t].y) / s.y;
    ll -= kLogTwoPi + std::log(s.x) + std::log(s.y) + log_w_var +
          0.5 * (zx * zx + zy * zy) / w_var;
  }
  return ll;
}

double LogProb(const GmmPrediction& pred, std::span<const Vec2> traj,
               const EvalConfig& cfg) {
  CheckTrajectoryLength(pred, traj);
  if (!(cfg.w_var > 0.0)) {
    throw std::invalid_argument("log_prob requires w_var > 0");
  }
  std::vector<double> terms;
  terms.reserve(pred.modes.size());
  for (const GaussianMode& m : pred.modes) {
    if (m.weight <= 0.0) continue;
    terms.push_back(std::log(m.weight) + ModeLogLikelihood(m, traj, cfg.w_var));
  }
  return LogSumExp(terms);
}

GmmPrediction ApplyTemperature(const GmmPrediction& pred, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive");
  }
  std::vector<double> floored = pred.Weights();
  double sum = 0.0;
  for (double& w : floored) {
    w = std::max(w, kWeightFloor);
    sum += w;
  }
  std::vector<double> scaled(floored.size());
  for (size_t n = 0; n < floored.size(); ++n) {
    scaled[n] = std::log(floored[n] / sum) / temperature;
  }
  const double norm = LogSumExp(scaled);
  GmmPrediction out = pred;
  for (size_t n = 0; n < out.modes.size(); ++n) {
    out.modes[n].weight = std::exp(scaled[n] - norm);
  }
  return out;
}

std::vector<Trajectory> Sample(const GmmPrediction& pred,
                               const EvalConfig& cfg, uint64_t seed,
                               int count) {
  if (count <= 0) throw std::invalid_argument("sample count must be positive");
  if (!(cfg.w_var >= 0.0)) throw std::invalid_argument("w_var must be >= 0");
  const std::vector<double> weights = pred.Weights();
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(cfg.w_var);

  std::vector<Trajectory> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    const GaussianMode& m = pred.modes[pick(rng)];
    Trajectory traj = m.means;
    if (scale > 0.0) {
      for (size_t t = 0; t < traj.size(); ++t) {
        traj[t].x += scale * m.stds[t].x * normal(rng);
        traj[t].y += scale * m.stds[t].y * normal(rng);
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

double LogSumExp(std::span<const double> values) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : values) max = std::max(max, v);
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

double Entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace trajdistill
