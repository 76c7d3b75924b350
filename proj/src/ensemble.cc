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

#include "trajdistill/ensemble.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trajdistill {
namespace {

// Squared form of TrajectoryDistance; the refinement objective is expressed
// in it so that the weighted-mean update minimizes it exactly.
double SquaredDistance(const Trajectory& a, const Trajectory& b,
                       DistanceKind kind) {
  if (kind == DistanceKind::kFinalPoint) {
    return SquaredNorm(a.back() - b.back());
  }
  double sum = 0.0;
  for (size_t t = 0; t < a.size(); ++t) sum += SquaredNorm(a[t] - b[t]);
  return sum / static_cast<double>(a.size());
}

// Index of the nearest centroid; the lowest index wins ties.
int Nearest(const Trajectory& means, const std::vector<GaussianMode>& centroids,
            DistanceKind kind, double* squared_distance) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.size(); ++c) {
    const double d = SquaredDistance(means, centroids[c].means, kind);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  *squared_distance = best_d;
  return best;
}

}  // namespace

EnsembleSpec EnsembleSpec::Uniform(std::vector<GmmPrediction> teachers) {
  EnsembleSpec spec;
  const double w = 1.0 / static_cast<double>(teachers.size());
  spec.weights.assign(teachers.size(), w);
  spec.teachers = std::move(teachers);
  return spec;
}

GmmPrediction Combine(const EnsembleSpec& spec, double temperature) {
  if (spec.teachers.empty()) throw std::invalid_argument("no teachers");
  if (spec.weights.size() != spec.teachers.size()) {
    throw std::invalid_argument("one weight per teacher required");
  }
  double sum = 0.0;
  for (double w : spec.weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative teacher weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("teacher weights must sum to 1");
  }
  const int horizon = spec.teachers.front().Horizon();
  GmmPrediction out;
  for (size_t k = 0; k < spec.teachers.size(); ++k) {
    if (spec.teachers[k].Horizon() != horizon) {
      throw std::invalid_argument("mismatched horizon across teachers");
    }
    const GmmPrediction tempered =
        ApplyTemperature(spec.teachers[k], temperature);
    for (const GaussianMode& m : tempered.modes) {
      GaussianMode scaled = m;
      scaled.weight *= spec.weights[k];
      out.modes.push_back(std::move(scaled));
    }
  }
  return out;
}

double TrajectoryDistance(const Trajectory& a, const Trajectory& b,
                          DistanceKind kind) {
  return std::sqrt(SquaredDistance(a, b, kind));
}

GmmPrediction NmsReduce(const GmmPrediction& mixture, const NmsConfig& cfg,
                        NmsTrace* trace) {
  const int n = mixture.NumModes();
  const int m = cfg.target_modes;
  if (m < 1) throw std::invalid_argument("target_modes must be >= 1");
  if (!(cfg.coverage_radius > 0.0)) {
    throw std::invalid_argument("coverage_radius must be positive");
  }
  if (cfg.refine_iters < 0) {
    throw std::invalid_argument("refine_iters must be >= 0");
  }
  if (m > n) {
    throw std::invalid_argument("target_modes " + std::to_string(m) +
                                " exceeds input mode count " +
                                std::to_string(n));
  }
  const std::vector<GaussianMode>& modes = mixture.modes;

  // Coverage relation, symmetric.
  const double r2 = cfg.coverage_radius * cfg.coverage_radius;
  std::vector<char> covers(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    covers[i * n + i] = 1;
    for (int j = i + 1; j < n; ++j) {
      const bool c =
          SquaredDistance(modes[i].means, modes[j].means, cfg.distance) <= r2;
      covers[i * n + j] = covers[j * n + i] = c;
    }
  }

  // Greedy selection.
  std::vector<char> covered(n, 0);
  std::vector<char> picked(n, 0);
  std::vector<int> picks;
  int remaining = n;
  while (static_cast<int>(picks.size()) < m && remaining > 0) {
    int best = -1;
    double best_mass = -1.0;
    for (int i = 0; i < n; ++i) {
      if (covered[i]) continue;
      double mass = 0.0;
      for (int j = 0; j < n; ++j) {
        if (!covered[j] && covers[i * n + j]) mass += modes[j].weight;
      }
      if (mass > best_mass) {
        best_mass = mass;
        best = i;
      }
    }
    picks.push_back(best);
    picked[best] = 1;
    for (int j = 0; j < n; ++j) {
      if (!covered[j] && covers[best * n + j]) {
        covered[j] = 1;
        --remaining;
      }
    }
  }
  // Everything is covered but more modes are wanted: take the mode with the
  // largest weighted squared distance to its nearest pick, then the
  // heaviest.
  while (static_cast<int>(picks.size()) < m) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < n; ++i) {
      if (picked[i]) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (int p : picks) {
        nearest = std::min(
            nearest,
            SquaredDistance(modes[i].means, modes[p].means, cfg.distance));
      }
      const double score = modes[i].weight * nearest;
      if (score > best_score ||
          (score == best_score && modes[i].weight > modes[best].weight)) {
        best_score = score;
        best = i;
      }
    }
    picks.push_back(best);
    picked[best] = 1;
  }
  if (trace != nullptr) trace->greedy_picks = picks;

  std::vector<GaussianMode> centroids;
  centroids.reserve(m);
  for (int p : picks) centroids.push_back(modes[p]);

  // Refinement.
  const size_t horizon = static_cast<size_t>(mixture.Horizon());
  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < cfg.refine_iters; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
      double d2 = 0.0;
      const int c = Nearest(modes[i].means, centroids, cfg.distance, &d2);
      objective += modes[i].weight * d2;
      if (c != assignment[i]) changed = true;
      assignment[i] = c;
    }
    if (trace != nullptr) trace->objective.push_back(objective);
    if (!changed) break;

    for (int c = 0; c < m; ++c) {
      double mass = 0.0;
      Trajectory mean(horizon);
      for (int i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        mass += modes[i].weight;
        for (size_t t = 0; t < horizon; ++t) {
          mean[t] = mean[t] + modes[i].weight * modes[i].means[t];
        }
      }
      GaussianMode& centroid = centroids[c];
      if (!(mass > 0.0)) {
        // Empty cluster keeps its parameters and drops its weight.
        centroid.weight = 0.0;
        continue;
      }
      for (Vec2& v : mean) v = (1.0 / mass) * v;
      // Law of total variance: mean member variance plus variance of the
      // member means.
      Trajectory var(horizon);
      for (int i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        const double w = modes[i].weight / mass;
        for (size_t t = 0; t < horizon; ++t) {
          const Vec2 sd = modes[i].stds[t];
          const Vec2 d = modes[i].means[t] - mean[t];
          var[t].x += w * (sd.x * sd.x + d.x * d.x);
          var[t].y += w * (sd.y * sd.y + d.y * d.y);
        }
      }
      centroid.weight = mass;
      centroid.means = std::move(mean);
      for (size_t t = 0; t < horizon; ++t) {
        centroid.stds[t] = {std::sqrt(var[t].x), std::sqrt(var[t].y)};
      }
    }
    if (trace != nullptr) {
      double total = 0.0;
      for (const GaussianMode& c : centroids) total += c.weight;
      trace->mass_per_iteration.push_back(total);
    }
    if (trace != nullptr) ++trace->iterations_run;
  }
  if (trace != nullptr) {
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
      double d2 = 0.0;
      Nearest(modes[i].means, centroids, cfg.distance, &d2);
      objective += modes[i].weight * d2;
    }
    trace->objective.push_back(objective);
  }

  double total = 0.0;
  for (const GaussianMode& c : centroids) total += c.weight;
  if (!(total > 0.0)) {
    throw std::invalid_argument("mixture has no positive weight");
  }
  GmmPrediction out;
  out.modes = std::move(centroids);
  for (GaussianMode& c : out.modes) c.weight /= total;
  return out;
}

}  // namespace trajdistill
