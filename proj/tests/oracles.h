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

// Independent reference computations shared by the unit tests and the
// acceptance suite.

#ifndef TRAJDISTILL_TESTS_ORACLES_H_
#define TRAJDISTILL_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "test_util.h"
#include "trajdistill/distill.h"
#include "trajdistill/ensemble.h"

namespace trajdistill::testing {

inline GmmParams RandomParams(int modes, int horizon, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GmmParams p(modes, horizon);
  for (int k = 0; k < modes; ++k) {
    p.logit(k) = n(rng);
    for (int t = 0; t < horizon; ++t) {
      for (int a = 0; a < 2; ++a) {
        p.mean(k, t, a) = 2.0 * n(rng);
        p.log_std(k, t, a) = 0.3 * n(rng);
      }
    }
  }
  return p;
}

inline double Loss(const GmmParams& p, const DistillTarget& target,
                   const Trajectory& gt, const DistillConfig& cfg) {
  return TotalLoss(p.ToPrediction(), target, gt, cfg).total;
}

// Largest |analytic - central difference| / max(1, |analytic|, |numeric|).
inline double MaxGradientError(GmmParams p, const DistillTarget& target,
                               const Trajectory& gt, const DistillConfig& cfg) {
  const LossAndGradient lg = StudentLossAndGradient(p, target, gt, cfg);
  const double h = 1e-5;
  double worst = 0.0;
  for (size_t i = 0; i < p.values().size(); ++i) {
    const double x = p.values()[i];
    p.values()[i] = x + h;
    const double up = Loss(p, target, gt, cfg);
    p.values()[i] = x - h;
    const double down = Loss(p, target, gt, cfg);
    p.values()[i] = x;
    const double numeric = (up - down) / (2.0 * h);
    const double a = lg.gradient[i];
    worst = std::max(worst, std::abs(a - numeric) /
                                std::max({1.0, std::abs(a), std::abs(numeric)}));
  }
  return worst;
}

struct Clustering {
  std::vector<GaussianMode> centroids;
  double objective = std::numeric_limits<double>::infinity();
};

inline double MeanSquared(const Trajectory& a, const Trajectory& b) {
  double s = 0.0;
  for (size_t t = 0; t < a.size(); ++t) s += SquaredNorm(a[t] - b[t]);
  return s / a.size();
}

// Every assignment of modes to m nonempty clusters; keeps the one with the
// smallest weighted squared distance to the weighted cluster means.
inline Clustering BruteForceClustering(const GmmPrediction& g, int m) {
  const int n = g.NumModes();
  const size_t horizon = g.Horizon();
  Clustering best;
  std::vector<int> a(n, 0);
  while (true) {
    std::vector<double> mass(m, 0.0);
    for (int i = 0; i < n; ++i) mass[a[i]] += g.modes[i].weight;
    if (std::all_of(mass.begin(), mass.end(), [](double w) { return w > 0; })) {
      std::vector<GaussianMode> c(m);
      for (int k = 0; k < m; ++k) {
        c[k].weight = mass[k];
        c[k].means.assign(horizon, {0, 0});
        c[k].stds.assign(horizon, {0, 0});
      }
      for (int i = 0; i < n; ++i) {
        const double w = g.modes[i].weight / mass[a[i]];
        for (size_t t = 0; t < horizon; ++t) {
          c[a[i]].means[t] = c[a[i]].means[t] + w * g.modes[i].means[t];
        }
      }
      double objective = 0.0;
      for (int i = 0; i < n; ++i) {
        objective += g.modes[i].weight * MeanSquared(g.modes[i].means,
                                                     c[a[i]].means);
        const double w = g.modes[i].weight / mass[a[i]];
        for (size_t t = 0; t < horizon; ++t) {
          const Vec2 d = g.modes[i].means[t] - c[a[i]].means[t];
          const Vec2 s = g.modes[i].stds[t];
          c[a[i]].stds[t].x += w * (s.x * s.x + d.x * d.x);
          c[a[i]].stds[t].y += w * (s.y * s.y + d.y * d.y);
        }
      }
      if (objective < best.objective) {
        for (GaussianMode& k : c) {
          for (Vec2& v : k.stds) v = {std::sqrt(v.x), std::sqrt(v.y)};
        }
        best.objective = objective;
        best.centroids = std::move(c);
      }
    }
    int i = 0;
    while (i < n && ++a[i] == m) a[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// Mixture of m well separated groups with up to `n` modes in total.
inline GmmPrediction ClusteredMixture(int n, int m, std::mt19937_64& rng) {
  const int horizon = 3;
  std::vector<Trajectory> centers;
  for (int k = 0; k < m; ++k) {
    Trajectory c = RandomTrajectory(horizon, 1.0, rng);
    for (Vec2& p : c) p = p + Vec2{40.0 * k, 0.0};
    centers.push_back(c);
  }
  const std::vector<double> w = RandomSimplex(n, rng);
  GmmPrediction g;
  for (int i = 0; i < n; ++i) {
    GaussianMode mode = RandomMode(centers[i % m], 0.3, 0.3, 1.5, rng);
    mode.weight = w[i];
    g.modes.push_back(mode);
  }
  return g;
}

}  // namespace trajdistill::testing

#endif  // TRAJDISTILL_TESTS_ORACLES_H_
