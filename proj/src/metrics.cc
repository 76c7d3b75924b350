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

#include "trajdistill/metrics.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace trajdistill {
namespace {

void CheckSet(const PredictionSet& pred, const Trajectory& gt) {
  if (pred.trajectories.empty()) {
    throw std::invalid_argument("prediction set is empty");
  }
  if (pred.confidences.size() != pred.trajectories.size()) {
    throw std::invalid_argument("one confidence per trajectory required");
  }
  for (const Trajectory& t : pred.trajectories) {
    if (t.size() != gt.size() || gt.empty()) {
      throw std::invalid_argument("trajectory length mismatch");
    }
  }
}

void CheckSizes(size_t a, size_t b) {
  if (a != b) throw std::invalid_argument("dataset size mismatch");
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

struct Detection {
  double confidence;
  bool true_positive;
};

double BucketAveragePrecision(std::vector<Detection> detections,
                              int num_positives) {
  std::stable_sort(detections.begin(), detections.end(),
                   [](const Detection& a, const Detection& b) {
                     if (a.confidence != b.confidence) {
                       return a.confidence > b.confidence;
                     }
                     return !a.true_positive && b.true_positive;
                   });
  std::vector<char> tp(detections.size());
  for (size_t i = 0; i < detections.size(); ++i) {
    tp[i] = detections[i].true_positive;
  }
  return InterpolatedAveragePrecision(tp, num_positives);
}

}  // namespace

PredictionSet ToPredictionSet(const GmmPrediction& pred) {
  PredictionSet set;
  for (const GaussianMode& m : pred.modes) {
    set.trajectories.push_back(m.means);
    set.confidences.push_back(m.weight);
  }
  return set;
}

double AverageDisplacementError(const Trajectory& pred, const Trajectory& gt) {
  double sum = 0.0;
  for (size_t t = 0; t < gt.size(); ++t) sum += Norm(pred[t] - gt[t]);
  return sum / static_cast<double>(gt.size());
}

double FinalDisplacementError(const Trajectory& pred, const Trajectory& gt) {
  return Norm(pred.back() - gt.back());
}

double MinAde(const PredictionSet& pred, const Trajectory& gt) {
  CheckSet(pred, gt);
  double best = std::numeric_limits<double>::infinity();
  for (const Trajectory& t : pred.trajectories) {
    best = std::min(best, AverageDisplacementError(t, gt));
  }
  return best;
}

int ArgMinFde(const PredictionSet& pred, const Trajectory& gt) {
  CheckSet(pred, gt);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pred.trajectories.size(); ++i) {
    const double d = FinalDisplacementError(pred.trajectories[i], gt);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double MinFde(const PredictionSet& pred, const Trajectory& gt) {
  return FinalDisplacementError(pred.trajectories[ArgMinFde(pred, gt)], gt);
}

double BrierMinFde(const PredictionSet& pred, const Trajectory& gt) {
  const int best = ArgMinFde(pred, gt);
  const double shortfall = 1.0 - pred.confidences[best];
  return FinalDisplacementError(pred.trajectories[best], gt) +
         shortfall * shortfall;
}

double MissRate(std::span<const PredictionSet> preds,
                std::span<const Trajectory> gts, double threshold) {
  CheckSizes(preds.size(), gts.size());
  if (preds.empty()) throw std::invalid_argument("empty dataset");
  int misses = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (MinFde(preds[i], gts[i]) > threshold) ++misses;
  }
  return static_cast<double>(misses) / static_cast<double>(preds.size());
}

double InterpolatedAveragePrecision(std::span<const char> true_positive,
                                    int num_positives) {
  if (num_positives <= 0) return 0.0;
  // Best precision reachable at or beyond each rank, scanned from the back.
  const size_t n = true_positive.size();
  std::vector<double> recall(n);
  std::vector<double> precision(n);
  int hits = 0;
  for (size_t i = 0; i < n; ++i) {
    hits += true_positive[i] ? 1 : 0;
    recall[i] = static_cast<double>(hits) / num_positives;
    precision[i] = static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  for (size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  size_t cursor = 0;
  for (int level = 0; level <= 10; ++level) {
    const double r = level / 10.0;
    while (cursor < n && recall[cursor] < r - 1e-12) ++cursor;
    if (cursor < n) ap += precision[cursor];
  }
  return ap / 11.0;
}

MapResult MeanAveragePrecision(std::span<const PredictionSet> preds,
                               std::span<const Trajectory> gts,
                               std::span<const Maneuver> buckets,
                               double threshold) {
  CheckSizes(preds.size(), gts.size());
  CheckSizes(preds.size(), buckets.size());
  if (preds.empty()) throw std::invalid_argument("empty dataset");

  std::vector<std::vector<Detection>> hard(kNumManeuvers);
  std::vector<std::vector<Detection>> soft(kNumManeuvers);
  std::vector<int> positives(kNumManeuvers, 0);
  for (size_t i = 0; i < preds.size(); ++i) {
    const PredictionSet& set = preds[i];
    CheckSet(set, gts[i]);
    const int b = static_cast<int>(buckets[i]);
    ++positives[b];
    // Highest-confidence matching trajectory; lowest index on ties.
    int first_match = -1;
    for (size_t j = 0; j < set.trajectories.size(); ++j) {
      if (FinalDisplacementError(set.trajectories[j], gts[i]) > threshold) {
        continue;
      }
      if (first_match < 0 ||
          set.confidences[j] > set.confidences[first_match]) {
        first_match = static_cast<int>(j);
      }
    }
    for (size_t j = 0; j < set.trajectories.size(); ++j) {
      const bool tp = static_cast<int>(j) == first_match;
      const bool match =
          FinalDisplacementError(set.trajectories[j], gts[i]) <= threshold;
      hard[b].push_back({set.confidences[j], tp});
      if (tp || !match) soft[b].push_back({set.confidences[j], tp});
    }
  }

  MapResult result;
  int nonempty = 0;
  for (int b = 0; b < kNumManeuvers; ++b) {
    if (positives[b] == 0) continue;
    ++nonempty;
    result.map += BucketAveragePrecision(std::move(hard[b]), positives[b]);
    result.soft_map += BucketAveragePrecision(std::move(soft[b]), positives[b]);
  }
  result.map /= nonempty;
  result.soft_map /= nonempty;
  return result;
}

double Overlap(std::span<const PredictionSet> preds,
               std::span<const std::vector<Trajectory>> other_agents,
               double agent_radius) {
  CheckSizes(preds.size(), other_agents.size());
  if (preds.empty()) throw std::invalid_argument("empty dataset");
  const double limit = 2.0 * agent_radius;
  int overlaps = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const PredictionSet& set = preds[i];
    const Trajectory& top = set.trajectories[ArgMax(set.confidences)];
    bool hit = false;
    for (const Trajectory& other : other_agents[i]) {
      const size_t steps = std::min(other.size(), top.size());
      for (size_t t = 0; t < steps && !hit; ++t) {
        hit = Norm(top[t] - other[t]) < limit;
      }
      if (hit) break;
    }
    overlaps += hit ? 1 : 0;
  }
  return static_cast<double>(overlaps) / static_cast<double>(preds.size());
}

MetricsReport ComputeMetrics(const EvaluationInput& input, double threshold,
                             double agent_radius) {
  const size_t n = input.preds.size();
  CheckSizes(n, input.gts.size());
  if (n == 0) throw std::invalid_argument("empty dataset");
  MetricsReport report;
  report.num_examples = static_cast<int>(n);
  for (size_t i = 0; i < n; ++i) {
    report.min_ade += MinAde(input.preds[i], input.gts[i]);
    report.min_fde += MinFde(input.preds[i], input.gts[i]);
    report.brier_min_fde += BrierMinFde(input.preds[i], input.gts[i]);
  }
  report.min_ade /= static_cast<double>(n);
  report.min_fde /= static_cast<double>(n);
  report.brier_min_fde /= static_cast<double>(n);
  report.miss_rate = MissRate(input.preds, input.gts, threshold);
  const MapResult ap =
      MeanAveragePrecision(input.preds, input.gts, input.buckets, threshold);
  report.map = ap.map;
  report.soft_map = ap.soft_map;
  if (!input.other_agents.empty()) {
    report.overlap = Overlap(input.preds, input.other_agents, agent_radius);
  }
  return report;
}

}  // namespace trajdistill
