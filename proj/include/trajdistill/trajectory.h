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

#ifndef TRAJDISTILL_TRAJECTORY_H_
#define TRAJDISTILL_TRAJECTORY_H_

#include <array>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

namespace trajdistill {

// A 2-D position (or per-axis standard deviation) in meters.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double Norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double SquaredNorm(Vec2 a) { return a.x * a.x + a.y * a.y; }

// A fixed-horizon sequence of positions, one per timestep.
using Trajectory = std::vector<Vec2>;

// Maneuver category used to stratify average precision.
enum class Maneuver { kStraight = 0, kLeft, kRight, kUTurn, kStationary };

inline constexpr int kNumManeuvers = 5;

inline constexpr std::array<std::string_view, kNumManeuvers> kManeuverNames = {
    "straight", "left", "right", "u-turn", "stationary"};

inline std::string_view ManeuverName(Maneuver m) {
  return kManeuverNames[static_cast<int>(m)];
}

inline std::optional<Maneuver> ParseManeuver(std::string_view name) {
  for (int i = 0; i < kNumManeuvers; ++i) {
    if (kManeuverNames[i] == name) return static_cast<Maneuver>(i);
  }
  return std::nullopt;
}

// Rotates `p` by `angle` radians about the origin.
inline Vec2 Rotate(Vec2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

}  // namespace trajdistill

#endif  // TRAJDISTILL_TRAJECTORY_H_
