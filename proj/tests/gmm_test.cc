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

#include "trajdistill/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace trajdistill {
namespace {

using testing::DirectDensity;
using testing::MakeMode;
using testing::RandomGmm;
using testing::RandomSimplex;
using testing::RandomTrajectory;

const double kLog2Pi = std::log(2.0 * M_PI);

GmmPrediction StandardMode() {
  GmmPrediction g;
  g.modes.push_back(MakeMode(1.0, {{0.0, 0.0}}, 1.0));
  return g;
}

TEST(ValidateTest, AcceptsSingleModeUnchanged) {
  GmmPrediction g = StandardMode();
  const GmmPrediction v = Validate(g);
  EXPECT_EQ(v.modes[0].weight, 1.0);
  EXPECT_EQ(v.modes[0].means, g.modes[0].means);
  EXPECT_EQ(v.modes[0].stds, g.modes[0].stds);
}

TEST(ValidateTest, RenormalizesWithinTolerance) {
  GmmPrediction g;
  g.modes.push_back(MakeMode(0.5000004, {{0, 0}}, 1.0));
  g.modes.push_back(MakeMode(0.5, {{1, 0}}, 1.0));
  const GmmPrediction v = Validate(g);
  EXPECT_NEAR(v.modes[0].weight + v.modes[1].weight, 1.0, 1e-15);
}

TEST(ValidateTest, RejectsWeightSumOutsideTolerance) {
  GmmPrediction g;
  g.modes.push_back(MakeMode(0.6, {{0, 0}}, 1.0));
  g.modes.push_back(MakeMode(0.5, {{1, 0}}, 1.0));
  EXPECT_THROW(Validate(g), std::invalid_argument);
}

TEST(ValidateTest, RejectsZeroStd) {
  GmmPrediction g = StandardMode();
  g.modes[0].stds[0].x = 0.0;
  try {
    Validate(g);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "non-positive std");
  }
}

TEST(ValidateTest, RejectsStructuralProblems) {
  EXPECT_THROW(Validate(GmmPrediction{}), std::invalid_argument);
  GmmPrediction negative = StandardMode();
  negative.modes[0].weight = -1.0;
  EXPECT_THROW(Validate(negative), std::invalid_argument);
  GmmPrediction nan_mean = StandardMode();
  nan_mean.modes[0].means[0].x = std::nan("");
  EXPECT_THROW(Validate(nan_mean), std::invalid_argument);
  GmmPrediction ragged = StandardMode();
  ragged.modes.push_back(MakeMode(0.0, {{0, 0}, {1, 1}}, 1.0));
  EXPECT_THROW(Validate(ragged), std::invalid_argument);
}

TEST(LogProbTest, StandardNormalAtMean) {
  EXPECT_NEAR(LogProb(StandardMode(), Trajectory{{0, 0}}, {}), -kLog2Pi,
              1e-12);
  EXPECT_NEAR(-kLog2Pi, -1.837877, 1e-6);
}

TEST(LogProbTest, StandardNormalOffset) {
  EXPECT_NEAR(LogProb(StandardMode(), Trajectory{{3, 4}}, {}),
              -kLog2Pi - 12.5, 1e-12);
}

TEST(LogProbTest, IdenticalModesMatchSingleMode) {
  GmmPrediction two;
  two.modes.push_back(MakeMode(0.5, {{0, 0}}, 1.0));
  two.modes.push_back(MakeMode(0.5, {{0, 0}}, 1.0));
  for (Vec2 s : {Vec2{0, 0}, Vec2{1, -2}, Vec2{3, 4}}) {
    EXPECT_NEAR(LogProb(two, Trajectory{s}, {}),
                LogProb(StandardMode(), Trajectory{s}, {}), 1e-12);
  }
}

TEST(LogProbTest, MatchesDirectDensity) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const GmmPrediction g = RandomGmm(3, 4, rng);
    const Trajectory s = RandomTrajectory(4, 1.5, rng);
    for (double w_var : {0.5, 1.0, 2.0}) {
      const double direct = DirectDensity(g, s, w_var);
      EXPECT_NEAR(std::exp(LogProb(g, s, {w_var, 1.0})) / direct, 1.0, 1e-10);
    }
  }
}

TEST(LogProbTest, SingleModeClosedForm) {
  GmmPrediction g;
  GaussianMode m;
  m.means = {{1.5, -0.5}};
  m.stds = {{0.7, 2.0}};
  g.modes.push_back(m);
  const Vec2 s{2.0, 1.0};
  const double zx = (s.x - 1.5) / 0.7;
  const double zy = (s.y + 0.5) / 2.0;
  const double density =
      std::exp(-0.5 * (zx * zx + zy * zy)) / (2.0 * M_PI * 0.7 * 2.0);
  EXPECT_NEAR(std::exp(LogProb(g, Trajectory{s}, {})) / density, 1.0, 1e-10);
}

TEST(LogProbTest, PermutationInvariant) {
  std::mt19937_64 rng(8);
  GmmPrediction g = RandomGmm(5, 3, rng);
  const Trajectory s = RandomTrajectory(3, 1.0, rng);
  const double before = LogProb(g, s, {});
  std::reverse(g.modes.begin(), g.modes.end());
  EXPECT_NEAR(LogProb(g, s, {}), before, 1e-12);
}

TEST(LogProbTest, VarianceScaleAtPeak) {
  const GmmPrediction g = StandardMode();
  for (double c : {0.25, 2.0, 10.0}) {
    EXPECT_NEAR(LogProb(g, Trajectory{{0, 0}}, {c, 1.0}),
                LogProb(g, Trajectory{{0, 0}}, {}) - std::log(c), 1e-12);
  }
}

TEST(LogProbTest, LongHorizonDoesNotUnderflow) {
  GmmPrediction g;
  g.modes.push_back(MakeMode(0.5, Trajectory(80, {0, 0}), 0.1));
  g.modes.push_back(MakeMode(0.5, Trajectory(80, {5, 5}), 0.1));
  const double lp = LogProb(g, Trajectory(80, {2, 2}), {});
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LT(lp, -1e4);
}

TEST(LogProbTest, Errors) {
  EXPECT_THROW(LogProb(StandardMode(), Trajectory{{0, 0}, {0, 0}}, {}),
               std::invalid_argument);
  EXPECT_THROW(LogProb(StandardMode(), Trajectory{{0, 0}}, {0.0, 1.0}),
               std::invalid_argument);
}

GmmPrediction WithWeights(const std::vector<double>& w) {
  GmmPrediction g;
  for (size_t n = 0; n < w.size(); ++n) {
    g.modes.push_back(MakeMode(w[n], {{static_cast<double>(n), 0}}, 1.0));
  }
  return g;
}

TEST(ApplyTemperatureTest, HandExamples) {
  const GmmPrediction a = ApplyTemperature(WithWeights({0.8, 0.2}), 1.0);
  EXPECT_NEAR(a.modes[0].weight, 0.8, 1e-12);
  EXPECT_NEAR(a.modes[1].weight, 0.2, 1e-12);
  const GmmPrediction b = ApplyTemperature(WithWeights({0.5, 0.5}), 7.3);
  EXPECT_NEAR(b.modes[0].weight, 0.5, 1e-12);
  const GmmPrediction c = ApplyTemperature(WithWeights({0.8, 0.2}), 2.0);
  EXPECT_NEAR(c.modes[0].weight, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(c.modes[1].weight, 1.0 / 3.0, 1e-12);
}

TEST(ApplyTemperatureTest, LeavesMeansAndStds) {
  std::mt19937_64 rng(3);
  const GmmPrediction g = RandomGmm(4, 3, rng);
  const GmmPrediction t = ApplyTemperature(g, 3.0);
  for (int n = 0; n < 4; ++n) {
    EXPECT_EQ(t.modes[n].means, g.modes[n].means);
    EXPECT_EQ(t.modes[n].stds, g.modes[n].stds);
  }
}

TEST(ApplyTemperatureTest, ZeroWeightIsFloored) {
  const GmmPrediction t = ApplyTemperature(WithWeights({1.0, 0.0}), 2.0);
  // Floor 1e-12, then sqrt: 1e-6 relative to 1.
  EXPECT_NEAR(t.modes[1].weight, 1e-6 / (1.0 + 1e-6), 1e-15);
}

TEST(ApplyTemperatureTest, RejectsNonPositive) {
  EXPECT_THROW(ApplyTemperature(WithWeights({1.0}), 0.0),
               std::invalid_argument);
  EXPECT_THROW(ApplyTemperature(WithWeights({1.0}), -1.0),
               std::invalid_argument);
}

TEST(ApplyTemperatureTest, Invariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> w = RandomSimplex(6, rng);
    const GmmPrediction g = WithWeights(w);
    const std::vector<double> id = ApplyTemperature(g, 1.0).Weights();
    for (int n = 0; n < 6; ++n) EXPECT_NEAR(id[n], w[n], 1e-12);

    double last_entropy = -1.0;
    for (double tau : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      const std::vector<double> t = ApplyTemperature(g, tau).Weights();
      double sum = 0.0;
      for (double v : t) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          if (w[i] < w[j]) {
            EXPECT_LT(t[i], t[j]);
          }
        }
      }
      const double h = Entropy(t);
      EXPECT_GE(h, last_entropy);
      last_entropy = h;
    }
  }
}

TEST(ApplyTemperatureTest, FlattensAtHighTemperature) {
  const std::vector<double> t =
      ApplyTemperature(WithWeights({0.9, 0.09, 0.01}), 1e6).Weights();
  EXPECT_LT(*std::max_element(t.begin(), t.end()) -
                *std::min_element(t.begin(), t.end()),
            1e-5);
}

TEST(SampleTest, ZeroVarianceReturnsMeans) {
  GmmPrediction g;
  g.modes.push_back(MakeMode(1.0, {{1, 2}, {3, 4}}, 0.5));
  const std::vector<Trajectory> s = Sample(g, {0.0, 1.0}, 5, 3);
  ASSERT_EQ(s.size(), 3u);
  for (const Trajectory& t : s) EXPECT_EQ(t, g.modes[0].means);
}

TEST(SampleTest, ModeFrequencies) {
  GmmPrediction g;
  g.modes.push_back(MakeMode(0.9, {{0, 0}}, 1.0));
  g.modes.push_back(MakeMode(0.1, {{10, 0}}, 1.0));
  const std::vector<Trajectory> s = Sample(g, {0.0, 1.0}, 17, 10000);
  int first = 0;
  for (const Trajectory& t : s) first += t[0].x == 0.0;
  EXPECT_NEAR(first / 10000.0, 0.9, 0.02);
}

TEST(SampleTest, EmpiricalMean) {
  GmmPrediction g;
  GaussianMode m;
  m.means = {{2.0, -1.0}};
  m.stds = {{1.5, 0.5}};
  g.modes.push_back(m);
  const int count = 10000;
  const std::vector<Trajectory> s = Sample(g, {}, 23, count);
  double mx = 0.0;
  double my = 0.0;
  for (const Trajectory& t : s) {
    mx += t[0].x / count;
    my += t[0].y / count;
  }
  EXPECT_NEAR(mx, 2.0, 3.0 * 1.5 / std::sqrt(count));
  EXPECT_NEAR(my, -1.0, 3.0 * 0.5 / std::sqrt(count));
}

TEST(SampleTest, DeterministicPerSeed) {
  std::mt19937_64 rng(1);
  const GmmPrediction g = RandomGmm(3, 5, rng);
  EXPECT_EQ(Sample(g, {}, 99, 20), Sample(g, {}, 99, 20));
  EXPECT_NE(Sample(g, {}, 99, 20), Sample(g, {}, 100, 20));
}

TEST(SampleTest, Errors) {
  EXPECT_THROW(Sample(StandardMode(), {}, 0, 0), std::invalid_argument);
  EXPECT_THROW(Sample(StandardMode(), {-1.0, 1.0}, 0, 1),
               std::invalid_argument);
}

TEST(LogSumExpTest, EdgeCases) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(LogSumExp({}), -inf);
  const std::vector<double> all_neg_inf = {-inf, -inf};
  EXPECT_EQ(LogSumExp(all_neg_inf), -inf);
  const std::vector<double> big = {1000.0, 1000.0};
  EXPECT_NEAR(LogSumExp(big), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> mixed = {-inf, 0.0};
  EXPECT_EQ(LogSumExp(mixed), 0.0);
}

TEST(EntropyTest, Values) {
  const std::vector<double> uniform = {0.25, 0.25, 0.25, 0.25};
  EXPECT_NEAR(Entropy(uniform), std::log(4.0), 1e-15);
  const std::vector<double> point = {1.0, 0.0};
  EXPECT_EQ(Entropy(point), 0.0);
}

}  // namespace
}  // namespace trajdistill
