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

// Ensembles of trajectory GMMs and their reduction to a fixed number of
// modes with non-maximal suppression.

#ifndef TRAJDISTILL_ENSEMBLE_H_
#define TRAJDISTILL_ENSEMBLE_H_

#include <vector>

#include "trajdistill/gmm.h"

namespace trajdistill {

struct EnsembleSpec {
  std::vector<GmmPrediction> teachers;
  // One non-negative weight per teacher, summing to one.
  std::vector<double> weights;

  static EnsembleSpec Uniform(std::vector<GmmPrediction> teachers);
};

// Flat mixture over the union of all teacher modes. Each teacher's weights
// are tempered independently first, then mode n of teacher k gets weight
// w_k * pi_k^n. Teachers may have different mode counts but must share the
// horizon.
GmmPrediction Combine(const EnsembleSpec& spec, double temperature);

enum class DistanceKind { kFinalPoint, kMeanOverTime };

struct NmsConfig {
  int target_modes = 6;
  // Meters; a mode covers every mode whose mean trajectory is this close.
  double coverage_radius = 2.0;
  int refine_iters = 10;
  DistanceKind distance = DistanceKind::kMeanOverTime;
};

// Distance between two mean trajectories. kMeanOverTime is the root mean
// square of the per-step displacement, kFinalPoint the displacement of the
// last step.
double TrajectoryDistance(const Trajectory& a, const Trajectory& b,
                          DistanceKind kind);

// Optional diagnostics from NmsReduce.
struct NmsTrace {
  std::vector<int> greedy_picks;
  // Sum of centroid weights after each refinement iteration.
  std::vector<double> mass_per_iteration;
  // Weighted sum of squared mode-to-centroid distances, evaluated after each
  // assignment step and once more against the final centroids.
  std::vector<double> objective;
  int iterations_run = 0;
};

// Reduces `mixture` to exactly cfg.target_modes modes: greedy selection of
// the modes covering the most uncovered weight, then k-means style
// refinement of the selected centroids with moment-matched stds.
GmmPrediction NmsReduce(const GmmPrediction& mixture, const NmsConfig& cfg,
                        NmsTrace* trace = nullptr);

}  // namespace trajdistill

#endif  // TRAJDISTILL_ENSEMBLE_H_
