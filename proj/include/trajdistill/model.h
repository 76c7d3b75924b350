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

#ifndef TRAJDISTILL_MODEL_H_
#define TRAJDISTILL_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "trajdistill/distill.h"
#include "trajdistill/gmm.h"

namespace trajdistill {

struct ModelConfig {
  int modes = 6;
  // Mean outputs are multiplied by this many meters.
  double mean_scale = 10.0;
  // Initialization: mean-bias spread (in units of mean_scale), weight spread,
  // and the initial per-axis std in meters.
  double init_mean_std = 0.0;
  double init_weight_std = 0.1;
  double init_std = 3.0;
  // Predicted per-axis stds never drop below this many meters. Zero
  // disables the floor.
  double min_std = 0.3;
  // Offset mode means by k-means anchors of the training futures (clustered
  // by shape after dividing out speed) instead of fanning out from the origin.
  bool anchor_init = true;
};

// Affine map from an example's feature vector to the unconstrained GMM
// parameters (logits, means, log-stds) of `modes` trajectory modes. Serves
// as both teacher and student architecture.
class StudentModel {
 public:
  StudentModel() = default;
  StudentModel(int feature_dim, int modes, int horizon, double mean_scale,
               double min_std = 0.0);

  // Fresh model with random weights and mean biases drawn from `seed`. When
  // `anchors` is non-empty it holds one trajectory per mode and replaces the
  // random mean biases.
  static StudentModel Initialize(int feature_dim, int horizon,
                                 const ModelConfig& cfg, uint64_t seed,
                                 std::span<const Trajectory> anchors = {});

  int feature_dim() const { return feature_dim_; }
  int modes() const { return modes_; }
  int horizon() const { return horizon_; }
  double mean_scale() const { return mean_scale_; }
  double min_std() const { return min_std_; }
  int OutputDim() const { return modes_ * GmmParams::BlockSize(horizon_); }

  // Row-major OutputDim() x feature_dim() weights followed by OutputDim()
  // biases.
  std::span<double> parameters() { return parameters_; }
  std::span<const double> parameters() const { return parameters_; }

  GmmParams Forward(std::span<const double> features) const;
  GmmPrediction Predict(std::span<const double> features) const {
    return Forward(features).ToPrediction();
  }

  // Adds `scale` times the gradient with respect to parameters() given the
  // gradient with respect to Forward(features).values(). Log-stds held at
  // the floor pass no gradient.
  void Backward(std::span<const double> features,
                std::span<const double> output_gradient, double scale,
                std::span<double> parameter_gradient) const;

  // Floating point operations for one Forward(): a multiply and an add per
  // weight plus one add per bias.
  int64_t FlopsPerInference() const;

 private:
  bool IsMeanOutput(int output) const;
  bool IsLogStdOutput(int output) const;
  double RawOutput(std::span<const double> features, int output) const;
  double MinLogStd() const;

  int feature_dim_ = 0;
  int modes_ = 0;
  int horizon_ = 0;
  double mean_scale_ = 1.0;
  double min_std_ = 0.0;
  std::vector<double> parameters_;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(size_t size, const AdamWConfig& cfg);

  void Step(std::span<double> params, std::span<const double> gradient,
            double learning_rate);

  int64_t steps() const { return step_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  int64_t step_ = 0;
};

}  // namespace trajdistill

#endif  // TRAJDISTILL_MODEL_H_
