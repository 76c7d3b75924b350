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

// Average precision computed by enumerating every rank cut-off of the pooled
// detections, independent of the library's incremental sweep.

#ifndef TRAJDISTILL_TESTS_MAP_ORACLE_H_
#define TRAJDISTILL_TESTS_MAP_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "trajdistill/metrics.h"

namespace trajdistill::testing {

struct OracleDetection {
  double confidence;
  bool tp;
};

// Interpolated precision at recall r is the best precision over all cut-offs
// reaching recall r; the 11 levels are averaged.
inline double OracleAp(std::vector<OracleDetection> dets, int positives) {
  if (positives == 0) return 0.0;
  // Descending confidence; ties put false positives first.
  std::sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.tp < b.tp;
  });
  double ap = 0.0;
  for (int level = 0; level <= 10; ++level) {
    double best = 0.0;
    for (size_t cut = 1; cut <= dets.size(); ++cut) {
      int hits = 0;
      for (size_t i = 0; i < cut; ++i) hits += dets[i].tp;
      const double recall = static_cast<double>(hits) / positives;
      if (recall * 10.0 + 1e-9 >= level) {
        best = std::max(best, static_cast<double>(hits) / cut);
      }
    }
    ap += best / 11.0;
  }
  return ap;
}

inline MapResult OracleMap(const std::vector<PredictionSet>& preds,
                           const std::vector<Trajectory>& gts,
                           const std::vector<Maneuver>& buckets,
                           double threshold = kMissThreshold) {
  MapResult r;
  int nonempty = 0;
  for (int b = 0; b < kNumManeuvers; ++b) {
    std::vector<OracleDetection> hard;
    std::vector<OracleDetection> soft;
    int positives = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
      if (static_cast<int>(buckets[i]) != b) continue;
      ++positives;
      const PredictionSet& s = preds[i];
      std::vector<bool> match(s.trajectories.size());
      for (size_t j = 0; j < match.size(); ++j) {
        const Vec2 d = s.trajectories[j].back() - gts[i].back();
        match[j] = std::hypot(d.x, d.y) <= threshold;
      }
      // The matching trajectory of highest confidence, earliest on ties.
      int tp = -1;
      for (size_t j = 0; j < match.size(); ++j) {
        if (match[j] && (tp < 0 || s.confidences[j] > s.confidences[tp])) {
          tp = static_cast<int>(j);
        }
      }
      for (size_t j = 0; j < match.size(); ++j) {
        const bool is_tp = static_cast<int>(j) == tp;
        hard.push_back({s.confidences[j], is_tp});
        if (is_tp || !match[j]) soft.push_back({s.confidences[j], is_tp});
      }
    }
    if (positives == 0) continue;
    ++nonempty;
    r.map += OracleAp(hard, positives);
    r.soft_map += OracleAp(soft, positives);
  }
  r.map /= nonempty;
  r.soft_map /= nonempty;
  return r;
}

// A dataset of up to `max_examples` examples with k in [1, 3] trajectories
// whose final points straddle the miss threshold. Confidences are drawn from
// a coarse grid so that ties occur.
struct SmallDataset {
  std::vector<PredictionSet> preds;
  std::vector<Trajectory> gts;
  std::vector<Maneuver> buckets;
};

inline SmallDataset RandomSmallDataset(int max_examples, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, max_examples);
  std::uniform_int_distribution<int> modes(1, 3);
  std::uniform_int_distribution<int> bucket(0, 1);
  std::uniform_int_distribution<int> grid(1, 4);
  std::uniform_real_distribution<double> radius(0.0, 4.0);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::normal_distribution<double> n(0.0, 3.0);
  SmallDataset d;
  const int examples = count(rng);
  constexpr int kHorizon = 3;
  for (int i = 0; i < examples; ++i) {
    Trajectory gt;
    for (int t = 0; t < kHorizon; ++t) gt.push_back({n(rng), n(rng)});
    PredictionSet s;
    const int k = modes(rng);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      Trajectory traj = gt;
      const double r = radius(rng);
      const double a = angle(rng);
      for (Vec2& p : traj) p = p + Vec2{r * std::cos(a), r * std::sin(a)};
      s.trajectories.push_back(traj);
      s.confidences.push_back(grid(rng));
      total += s.confidences.back();
    }
    for (double& c : s.confidences) c /= total;
    d.preds.push_back(s);
    d.gts.push_back(gt);
    d.buckets.push_back(static_cast<Maneuver>(bucket(rng)));
  }
  return d;
}

}  // namespace trajdistill::testing

#endif  // TRAJDISTILL_TESTS_MAP_ORACLE_H_
