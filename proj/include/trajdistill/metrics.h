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

// Motion forecasting metrics over sets of k predicted trajectories.
//
// Conventions: displacement metrics use the mode means; a prediction is a
// miss when its final displacement exceeds a fixed threshold; average
// precision is 11-point interpolated and averaged over non-empty maneuver
// buckets; overlap is a circle test against other agents' ground truth.

#ifndef TRAJDISTILL_METRICS_H_
#define TRAJDISTILL_METRICS_H_

#include <span>
#include <vector>

#include "trajdistill/gmm.h"
#include "trajdistill/trajectory.h"

namespace trajdistill {

struct PredictionSet {
  std::vector<Trajectory> trajectories;
  // One per trajectory, on the simplex.
  std::vector<double> confidences;
};

// Mode means with their weights as confidences, in mode order.
PredictionSet ToPredictionSet(const GmmPrediction& pred);

inline constexpr double kMissThreshold = 2.0;
inline constexpr double kAgentRadius = 1.0;

double AverageDisplacementError(const Trajectory& pred, const Trajectory& gt);
double FinalDisplacementError(const Trajectory& pred, const Trajectory& gt);

double MinAde(const PredictionSet& pred, const Trajectory& gt);
double MinFde(const PredictionSet& pred, const Trajectory& gt);
// Index of the trajectory attaining MinFde (lowest index on ties).
int ArgMinFde(const PredictionSet& pred, const Trajectory& gt);
// MinFde plus the squared confidence shortfall of the argmin trajectory.
double BrierMinFde(const PredictionSet& pred, const Trajectory& gt);

// Fraction of examples whose MinFde exceeds `threshold`.
double MissRate(std::span<const PredictionSet> preds,
                std::span<const Trajectory> gts,
                double threshold = kMissThreshold);

struct MapResult {
  double map = 0.0;
  double soft_map = 0.0;
};

// 11-point interpolated average precision of a ranked detection list.
// `true_positive[i]` refers to the i-th entry in descending confidence
// order; `num_positives` is the recall denominator.
double InterpolatedAveragePrecision(std::span<const char> true_positive,
                                    int num_positives);

// Per bucket, every trajectory of every example is ranked by confidence.
// The highest-confidence trajectory of an example within `threshold` final
// displacement is a true positive. Other trajectories are false positives
// for mAP; for soft-mAP, further matching trajectories are dropped instead.
// Equal confidences rank false positives first.
MapResult MeanAveragePrecision(std::span<const PredictionSet> preds,
                               std::span<const Trajectory> gts,
                               std::span<const Maneuver> buckets,
                               double threshold = kMissThreshold);

// Fraction of examples whose highest-confidence trajectory comes closer than
// 2 * agent_radius to another agent's ground truth at the same timestep.
double Overlap(std::span<const PredictionSet> preds,
               std::span<const std::vector<Trajectory>> other_agents,
               double agent_radius = kAgentRadius);

struct MetricsReport {
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  double map = 0.0;
  double soft_map = 0.0;
  double overlap = 0.0;
  double brier_min_fde = 0.0;
  int num_examples = 0;
};

struct EvaluationInput {
  std::span<const PredictionSet> preds;
  std::span<const Trajectory> gts;
  std::span<const Maneuver> buckets;
  std::span<const std::vector<Trajectory>> other_agents;
};

// All metrics, with per-example quantities averaged over the dataset.
MetricsReport ComputeMetrics(const EvaluationInput& input,
                             double threshold = kMissThreshold,
                             double agent_radius = kAgentRadius);

}  // namespace trajdistill

#endif  // TRAJDISTILL_METRICS_H_
