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

// Synthetic multimodal driving scenarios. Each agent drives straight during
// its observed history; its future follows one of five maneuvers, so the
// observed features never reveal which one was taken.

#ifndef TRAJDISTILL_SCENARIO_H_
#define TRAJDISTILL_SCENARIO_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "trajdistill/trajectory.h"

namespace trajdistill {

struct AgentExample {
  int64_t example_id = 0;
  int64_t scene_id = 0;
  std::vector<double> features;
  // Observed positions before the current time, oldest first, in the
  // agent frame (current position at the origin, heading along +x).
  Trajectory history;
  Trajectory gt_future;
  Maneuver bucket = Maneuver::kStraight;
  // Ground-truth futures of the other agents in the scene, same frame.
  std::vector<Trajectory> other_agents;

  friend bool operator==(const AgentExample&, const AgentExample&) = default;
};

struct ScenarioGenConfig {
  int example_count = 1000;
  int horizon = 16;
  int history = 4;
  double dt = 0.5;
  // Over straight, left, right, u-turn, stationary.
  std::array<double, kNumManeuvers> maneuver_priors = {0.4, 0.2, 0.2, 0.1,
                                                       0.1};
  // Acceleration noise in m/s^2; the yaw-rate noise is a tenth of it in
  // rad/s.
  double noise_std = 0.1;
  // When set, straight driving splits evenly into cruising and accelerating,
  // so the future has one more distinct mode than there are buckets.
  bool maneuver_variants = true;
  double min_speed = 4.0;
  double max_speed = 12.0;
  int other_agents = 2;
  uint64_t seed = 0;
};

// Throws std::invalid_argument when the config violates its invariants.
void ValidateConfig(const ScenarioGenConfig& cfg);

std::vector<AgentExample> Generate(const ScenarioGenConfig& cfg);

// History positions, the last observed velocity, and its heading, scaled to
// order one. Length FeatureDim(history.size()).
std::vector<double> ExtractFeatures(std::span<const Vec2> history, double dt);
inline constexpr int FeatureDim(int history) { return 2 * history + 3; }

}  // namespace trajdistill

#endif  // TRAJDISTILL_SCENARIO_H_
