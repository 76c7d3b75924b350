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

#include "trajdistill/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace trajdistill {

StudentModel::StudentModel(int feature_dim, int modes, int horizon,
                           double mean_scale, double min_std)
    : feature_dim_(feature_dim),
      modes_(modes),
      horizon_(horizon),
      mean_scale_(mean_scale),
      min_std_(min_std) {
  if (feature_dim < 1 || modes < 1 || horizon < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (!(mean_scale > 0.0)) {
    throw std::invalid_argument("mean_scale must be positive");
  }
  if (!(min_std >= 0.0)) throw std::invalid_argument("min_std must be >= 0");
  parameters_.assign(static_cast<size_t>(OutputDim()) * (feature_dim + 1),
                     0.0);
}

StudentModel StudentModel::Initialize(int feature_dim, int horizon,
                                      const ModelConfig& cfg, uint64_t seed,
                                      std::span<const Trajectory> anchors) {
  if (!anchors.empty() && static_cast<int>(anchors.size()) != cfg.modes) {
    throw std::invalid_argument("one anchor per mode required");
  }
  StudentModel model(feature_dim, cfg.modes, horizon, cfg.mean_scale,
                     cfg.min_std);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int out = model.OutputDim();
  double* weights = model.parameters_.data();
  double* bias = weights + static_cast<size_t>(out) * feature_dim;
  for (int o = 0; o < out; ++o) {
    for (int f = 0; f < feature_dim; ++f) {
      weights[o * feature_dim + f] = cfg.init_weight_std * normal(rng);
    }
  }
  const int block = GmmParams::BlockSize(horizon);
  const double log_std = std::log(cfg.init_std);
  for (int n = 0; n < cfg.modes; ++n) {
    double* b = bias + n * block;
    b[0] = 0.0;
    // One random offset per mode and axis, grown linearly over the horizon
    // so that initial modes fan out rather than jitter per step.
    const double dx = cfg.init_mean_std * normal(rng);
    const double dy = cfg.init_mean_std * normal(rng);
    for (int t = 0; t < horizon; ++t) {
      const double frac = static_cast<double>(t + 1) / horizon;
      b[1 + 2 * t] = frac * dx;
      b[2 + 2 * t] = frac * dy;
      if (!anchors.empty()) {
        b[1 + 2 * t] += anchors[n][t].x / cfg.mean_scale;
        b[2 + 2 * t] += anchors[n][t].y / cfg.mean_scale;
      }
      b[1 + 2 * horizon + 2 * t] = log_std;
      b[2 + 2 * horizon + 2 * t] = log_std;
    }
  }
  return model;
}

bool StudentModel::IsMeanOutput(int output) const {
  const int block = GmmParams::BlockSize(horizon_);
  const int local = output % block;
  return local >= 1 && local <= 2 * horizon_;
}

bool StudentModel::IsLogStdOutput(int output) const {
  const int local = output % GmmParams::BlockSize(horizon_);
  return local > 2 * horizon_;
}

double StudentModel::RawOutput(std::span<const double> features,
                               int output) const {
  const int out_dim = OutputDim();
  const double* row =
      parameters_.data() + static_cast<size_t>(output) * feature_dim_;
  double acc = parameters_[static_cast<size_t>(out_dim) * feature_dim_ + output];
  for (int f = 0; f < feature_dim_; ++f) acc += row[f] * features[f];
  return acc;
}

GmmParams StudentModel::Forward(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim_) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  GmmParams params(modes_, horizon_);
  std::span<double> out = params.values();
  const double floor = MinLogStd();
  for (int o = 0; o < OutputDim(); ++o) {
    const double acc = RawOutput(features, o);
    if (IsMeanOutput(o)) {
      out[o] = mean_scale_ * acc;
    } else if (IsLogStdOutput(o)) {
      out[o] = std::max(acc, floor);
    } else {
      out[o] = acc;
    }
  }
  return params;
}

void StudentModel::Backward(std::span<const double> features,
                            std::span<const double> output_gradient,
                            double scale,
                            std::span<double> parameter_gradient) const {
  const int out_dim = OutputDim();
  double* weights = parameter_gradient.data();
  double* bias = weights + static_cast<size_t>(out_dim) * feature_dim_;
  const double floor = MinLogStd();
  for (int o = 0; o < out_dim; ++o) {
    double g = output_gradient[o];
    if (g == 0.0) continue;
    if (IsLogStdOutput(o) && RawOutput(features, o) < floor) continue;
    g *= IsMeanOutput(o) ? scale * mean_scale_ : scale;
    double* row = weights + static_cast<size_t>(o) * feature_dim_;
    for (int f = 0; f < feature_dim_; ++f) row[f] += g * features[f];
    bias[o] += g;
  }
}

double StudentModel::MinLogStd() const {
  return min_std_ > 0.0 ? std::log(min_std_)
                        : -std::numeric_limits<double>::infinity();
}

int64_t StudentModel::FlopsPerInference() const {
  const int64_t out = OutputDim();
  return 2 * out * feature_dim_ + out;
}

AdamW::AdamW(size_t size, const AdamWConfig& cfg)
    : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void AdamW::Step(std::span<double> params, std::span<const double> gradient,
                 double learning_rate) {
  ++step_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * gradient[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * gradient[i] * gradient[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= learning_rate * (m_hat / (std::sqrt(v_hat) + cfg_.epsilon) +
                                  cfg_.weight_decay * params[i]);
  }
}

}  // namespace trajdistill
