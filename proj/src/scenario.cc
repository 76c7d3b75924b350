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

#include "trajdistill/scenario.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

namespace trajdistill {
namespace {

constexpr double kFeatureScale = 0.1;
constexpr double kTurnDuration = 3.0;   // s, for a quarter turn
constexpr double kUTurnDuration = 4.0;  // s, for a half turn
constexpr double kStopDuration = 3.0;   // s, from current speed to rest
constexpr double kYawNoiseRatio = 0.1;
constexpr double kVariantAccel = 1.0;  // m/s^2

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct UnicycleState {
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
};

class Rollout {
 public:
  Rollout(std::mt19937_64* rng, double noise_std, double dt)
      : rng_(rng), noise_std_(noise_std), dt_(dt) {}

  // Euler step under commanded acceleration and yaw rate plus noise.
  void Step(UnicycleState* s, double accel, double yaw_rate) {
    if (noise_std_ > 0.0) {
      accel += noise_std_ * normal_(*rng_);
      yaw_rate += kYawNoiseRatio * noise_std_ * normal_(*rng_);
    }
    s->position.x += s->speed * std::cos(s->heading) * dt_;
    s->position.y += s->speed * std::sin(s->heading) * dt_;
    s->heading += yaw_rate * dt_;
    s->speed = std::max(0.0, s->speed + accel * dt_);
  }

 private:
  std::mt19937_64* rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double noise_std_;
  double dt_;
};

Maneuver DrawManeuver(const std::array<double, kNumManeuvers>& priors,
                      std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (int m = 0; m < kNumManeuvers; ++m) {
    cumulative += priors[m];
    if (u < cumulative) return static_cast<Maneuver>(m);
  }
  for (int m = kNumManeuvers - 1; m >= 0; --m) {
    if (priors[m] > 0.0) return static_cast<Maneuver>(m);
  }
  return Maneuver::kStraight;
}

struct ManeuverVariant {
  double turn_scale = 1.0;
  double accel = 0.0;
};

ManeuverVariant DrawVariant(Maneuver m, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  ManeuverVariant v;
  switch (m) {
    case Maneuver::kStraight:
      if (u < 0.5) v.accel = kVariantAccel;
      break;
    case Maneuver::kLeft:
    case Maneuver::kRight:
    case Maneuver::kUTurn:
    case Maneuver::kStationary:
      break;
  }
  return v;
}

// Commanded (acceleration, yaw rate) at future time `time` (s) for an agent
// that started the future at `initial_speed`.
std::pair<double, double> Control(Maneuver m, const ManeuverVariant& v,
                                  double time, double initial_speed) {
  constexpr double kPi = std::numbers::pi;
  const double turn = v.turn_scale;
  switch (m) {
    case Maneuver::kStraight:
      return {v.accel, 0.0};
    case Maneuver::kLeft:
      return {0.0,
              time < kTurnDuration ? turn * 0.5 * kPi / kTurnDuration : 0.0};
    case Maneuver::kRight:
      return {0.0,
              time < kTurnDuration ? -turn * 0.5 * kPi / kTurnDuration : 0.0};
    case Maneuver::kUTurn:
      return {0.0, time < kUTurnDuration ? turn * kPi / kUTurnDuration : 0.0};
    case Maneuver::kStationary:
      return {-initial_speed / kStopDuration, 0.0};
  }
  return {0.0, 0.0};
}

AgentExample GenerateOne(const ScenarioGenConfig& cfg, int64_t index) {
  std::mt19937_64 rng(SplitMix64(cfg.seed ^ static_cast<uint64_t>(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Rollout rollout(&rng, cfg.noise_std, cfg.dt);

  AgentExample ex;
  ex.example_id = index;
  ex.scene_id = index;
  ex.bucket = DrawManeuver(cfg.maneuver_priors, rng);
  const double speed =
      cfg.min_speed + (cfg.max_speed - cfg.min_speed) * unit(rng);
  const ManeuverVariant variant =
      cfg.maneuver_variants ? DrawVariant(ex.bucket, rng) : ManeuverVariant{};

  // History: constant speed, straight, in a world frame.
  UnicycleState state{{0.0, 0.0}, 0.0, speed};
  Trajectory world_history;
  for (int k = 0; k < cfg.history; ++k) {
    world_history.push_back(state.position);
    rollout.Step(&state, 0.0, 0.0);
  }
  // Re-express everything in the frame of the current pose.
  const Vec2 origin = state.position;
  const double heading = state.heading;
  for (Vec2 p : world_history) {
    ex.history.push_back(Rotate(p - origin, -heading));
  }

  UnicycleState future{{0.0, 0.0}, 0.0, state.speed};
  const double initial_speed = state.speed;
  for (int t = 0; t < cfg.horizon; ++t) {
    const auto [accel, yaw_rate] =
        Control(ex.bucket, variant, t * cfg.dt, initial_speed);
    rollout.Step(&future, accel, yaw_rate);
    ex.gt_future.push_back(future.position);
  }

  for (int a = 0; a < cfg.other_agents; ++a) {
    const double range = 5.0 + 25.0 * unit(rng);
    const double bearing = 2.0 * std::numbers::pi * unit(rng);
    UnicycleState other{{range * std::cos(bearing), range * std::sin(bearing)},
                        2.0 * std::numbers::pi * unit(rng),
                        cfg.max_speed * unit(rng)};
    Trajectory traj;
    for (int t = 0; t < cfg.horizon; ++t) {
      rollout.Step(&other, 0.0, 0.0);
      traj.push_back(other.position);
    }
    ex.other_agents.push_back(std::move(traj));
  }
  ex.features = ExtractFeatures(ex.history, cfg.dt);
  return ex;
}

}  // namespace

void ValidateConfig(const ScenarioGenConfig& cfg) {
  if (cfg.example_count < 0) {
    throw std::invalid_argument("example_count must be >= 0");
  }
  if (cfg.horizon < 1 || cfg.history < 1) {
    throw std::invalid_argument("horizon and history must be >= 1");
  }
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  double sum = 0.0;
  for (double p : cfg.maneuver_priors) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative maneuver prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("maneuver priors must sum to 1");
  }
  if (!(cfg.noise_std >= 0.0)) {
    throw std::invalid_argument("noise_std must be >= 0");
  }
  if (!(cfg.min_speed >= 0.0) || cfg.max_speed < cfg.min_speed) {
    throw std::invalid_argument("invalid speed range");
  }
  if (cfg.other_agents < 0) {
    throw std::invalid_argument("other_agents must be >= 0");
  }
}

std::vector<AgentExample> Generate(const ScenarioGenConfig& cfg) {
  ValidateConfig(cfg);
  std::vector<AgentExample> out;
  out.reserve(cfg.example_count);
  for (int64_t i = 0; i < cfg.example_count; ++i) {
    out.push_back(GenerateOne(cfg, i));
  }
  return out;
}

std::vector<double> ExtractFeatures(std::span<const Vec2> history, double dt) {
  if (history.empty()) throw std::invalid_argument("empty history");
  std::vector<double> f;
  f.reserve(FeatureDim(static_cast<int>(history.size())));
  for (Vec2 p : history) {
    f.push_back(kFeatureScale * p.x);
    f.push_back(kFeatureScale * p.y);
  }
  // The current position is the origin of the frame.
  const Vec2 velocity = (1.0 / dt) * (Vec2{0.0, 0.0} - history.back());
  f.push_back(kFeatureScale * velocity.x);
  f.push_back(kFeatureScale * velocity.y);
  f.push_back(std::atan2(velocity.y, velocity.x));
  return f;
}

}  // namespace trajdistill
