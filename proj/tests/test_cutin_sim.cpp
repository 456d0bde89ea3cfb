// Copyright 2026 The fewshot Authors
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


#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "fewshot/config.hpp"
#include "fewshot/cutin_sim.hpp"
#include "fewshot/error.hpp"
#include "test_support.hpp"

namespace fewshot {
namespace {

IdmParams reference_params() {
  IdmParams p;
  p.v0 = 33.3;
  p.T = 1.6;
  p.a_max = 0.73;
  p.b = 1.67;
  p.s0 = 2.0;
  p.delta = 4.0;
  return p;
}

TEST(IdmAcceleration, EquilibriumAtDesiredSpeed) {
  const IdmParams p = reference_params();
  EXPECT_NEAR(idm_acceleration(p.v0, p.v0, 1e12, p), 0.0, 1e-12);
}

TEST(IdmAcceleration, StandstillAtJamDistance) {
  const IdmParams p = reference_params();
  EXPECT_DOUBLE_EQ(idm_acceleration(0.0, 0.0, p.s0, p), 0.0);
}

TEST(IdmAcceleration, HandEvaluatedClosingCase) {
  // s* = 2 + 20*1.6 + 20*5 / (2*sqrt(0.73*1.67)) = 79.28457943140674
  // a  = 0.73 * (1 - (20/33.3)^4 - (s*/30)^2)
  EXPECT_NEAR(idm_acceleration(20.0, 15.0, 30.0, reference_params()), -4.463667947752124, 1e-9);
}

TEST(IdmAcceleration, ClampedAtBrakingCapability) {
  IdmParams p = reference_params();
  EXPECT_DOUBLE_EQ(idm_acceleration(20.0, 0.0, 0.5, p), -kMaxBraking);
  p.b_max = 3.5;
  EXPECT_DOUBLE_EQ(idm_acceleration(20.0, 0.0, 0.5, p), -3.5);
}

TEST(IdmAcceleration, OpeningGapDoesNotShrinkDesiredGapBelowJam) {
  const IdmParams p = reference_params();
  // Fast leader: v*T + v*dv/(2*sqrt(a*b)) = 16 - 90.6 < 0, so s* = s0.
  const double a = idm_acceleration(10.0, 30.0, 20.0, p);
  const double s_star = p.s0;
  EXPECT_NEAR(a, p.a_max * (1.0 - std::pow(10.0 / p.v0, 4) - std::pow(s_star / 20.0, 2)), 1e-12);
}

TEST(IdmAcceleration, RejectsNonPositiveGap) {
  EXPECT_THROW(idm_acceleration(10.0, 10.0, 0.0, reference_params()), std::invalid_argument);
  EXPECT_THROW(idm_acceleration(10.0, 10.0, -1.0, reference_params()), std::invalid_argument);
}

TEST(IdmParams, ValidateRejectsNonPositive) {
  IdmParams p = reference_params();
  p.T = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = reference_params();
  p.b_max = 12.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(SimulateCutin, FarOpeningIsSafe) {
  const ProjectConfig cfg = default_config();
  for (const auto& m : cfg.surrogates) EXPECT_FALSE(simulate_cutin({89, 9}, m, cfg.sim).crash);
  EXPECT_FALSE(simulate_cutin({89, 9}, cfg.av, cfg.sim).crash);
}

TEST(SimulateCutin, CloseFastClosingCrashesForEveryModel) {
  const ProjectConfig cfg = default_config();
  const Scenario s{0.5, -19.5};
  // Stopping-distance oracle: even braking at 9.8 m/s^2 from the first
  // instant, closing 19.5 m/s needs 19.5^2 / (2 * 9.8) m of gap.
  const double needed = 19.5 * 19.5 / (2.0 * kMaxBraking);
  ASSERT_GT(needed, s.r);
  for (const auto& m : cfg.surrogates) EXPECT_TRUE(simulate_cutin(s, m, cfg.sim).crash) << m.name;
  EXPECT_TRUE(simulate_cutin(s, cfg.av, cfg.sim).crash);
}

TEST(SimulateCutin, StationaryLeaderFloorsAtZeroSpeed) {
  const ProjectConfig cfg = default_config();
  // r_dot = -20 puts the leader at rest; the outcome is still well defined.
  const CutinOutcome far = simulate_cutin({90, -20}, cfg.av, cfg.sim);
  EXPECT_FALSE(far.crash);
  EXPECT_GT(far.min_gap, 0.0);
}

TEST(SimulateCutin, MinGapNeverExceedsInitialRange) {
  const ProjectConfig cfg = default_config();
  const CutinOutcome o = simulate_cutin({40, -5}, cfg.av, cfg.sim);
  EXPECT_LE(o.min_gap, 40.0);
}

TEST(CrashMap, BinaryAndDeterministic) {
  const ProjectConfig cfg = default_config();
  const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
  const CrashMap a = compute_crash_map(cfg.av, grid, cfg.sim);
  const CrashMap b = compute_crash_map(cfg.av, grid, cfg.sim);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    ASSERT_TRUE(a[c] == 0.0 || a[c] == 1.0);
    ASSERT_EQ(a[c], b[c]);
  }
}

TEST(CrashMap, RejectsOutOfRangeValues) {
  const ScenarioGrid grid = build_grid({{0, 2}, {0, 2}}, {1, 1});
  EXPECT_THROW(CrashMap(grid, {0, 0, 1.5, 0}), ConfigError);
  EXPECT_THROW(CrashMap(grid, {0, 0, 1}), ConfigError);
}

TEST(CrashMap, TimidModelIsSafeOnBenignRegion) {
  const ProjectConfig cfg = default_config();
  const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
  IdmParams timid = reference_params();
  timid.T = 2.0;
  timid.b = 3.0;
  timid.a_max = 2.0;
  const CrashMap map = compute_crash_map(timid, grid, cfg.sim);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (grid.center(c).r_dot >= 0.0) ASSERT_EQ(map[c], 0.0);
  }
}

TEST(CrashMap, EachRowIsAPrefixInRange) {
  const World& w = testing::default_world();
  std::vector<const CrashMap*> maps;
  for (const auto& v : w.surrogates.vertices()) maps.push_back(&v);
  maps.push_back(&w.av_map);
  for (const CrashMap* m : maps) {
    for (std::size_t row = 0; row < w.grid.r_dot_cells(); ++row) {
      bool seen_safe = false;
      for (std::size_t col = 0; col < w.grid.r_cells(); ++col) {
        const bool crash = (*m)[w.grid.index(col, row)] == 1.0;
        ASSERT_FALSE(crash && seen_safe) << "row " << row << " col " << col;
        seen_safe = seen_safe || !crash;
      }
    }
  }
}

TEST(CrashMap, VertexCrashSetsAreNested) {
  const World& w = testing::default_world();
  const auto v = w.surrogates.vertices();
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    for (std::size_t c = 0; c < w.grid.size(); ++c) ASSERT_LE(v[k][c], v[k + 1][c]);
  }
}

TEST(CrashRate, TrivialMaps) {
  const World& w = testing::default_world();
  EXPECT_EQ(crash_rate(CrashMap(w.grid, std::vector<double>(w.grid.size(), 0.0)), w.pmf), 0.0);
  EXPECT_NEAR(crash_rate(CrashMap(w.grid, std::vector<double>(w.grid.size(), 1.0)), w.pmf), 1.0,
              1e-12);
}

TEST(CrashRate, GridMismatchThrows) {
  const World& w = testing::default_world();
  const ScenarioGrid other = build_grid({{0, 2}, {0, 2}}, {1, 1});
  EXPECT_THROW(crash_rate(CrashMap(other, {0, 0, 0, 0}), w.pmf), ConfigError);
}

TEST(CrashRate, DefaultCalibration) {
  const World& w = testing::default_world();
  double prev = 0.0;
  for (const auto& v : w.surrogates.vertices()) {
    const double mu = crash_rate(v, w.pmf);
    EXPECT_GE(mu, 4.6e-4);
    EXPECT_LE(mu, 4.9e-3);
    EXPECT_GT(mu, prev);
    prev = mu;
  }
  EXPECT_GE(w.av_mu, 1e-4);
  EXPECT_LE(w.av_mu, 1e-3);
}

TEST(ConvexCombine, VertexAndConsensus) {
  const World& w = testing::default_world();
  const std::vector<double> e1{1, 0, 0, 0};
  const CrashMap m1 = convex_combine(w.surrogates, e1);
  const auto v = w.surrogates.vertices();
  for (std::size_t c = 0; c < w.grid.size(); ++c) ASSERT_EQ(m1[c], v[0][c]);

  const std::vector<double> quarter{0.25, 0.25, 0.25, 0.25};
  const CrashMap avg = convex_combine(w.surrogates, quarter);
  for (std::size_t c = 0; c < w.grid.size(); ++c) {
    if (v[0][c] == v[3][c]) ASSERT_EQ(avg[c], v[0][c]);
  }
}

TEST(ConvexCombine, RejectsInvalidWeights) {
  const World& w = testing::default_world();
  const std::vector<double> neg{1.2, -0.2, 0, 0};
  const std::vector<double> short_sum{0.5, 0.2, 0, 0};
  const std::vector<double> wrong_len{1.0};
  EXPECT_THROW(convex_combine(w.surrogates, neg), ConfigError);
  EXPECT_THROW(convex_combine(w.surrogates, short_sum), ConfigError);
  EXPECT_THROW(convex_combine(w.surrogates, wrong_len), ConfigError);
}

TEST(ConvexCombine, CrashRateIsLinear) {
  const World& w = testing::default_world();
  Rng rng(3);
  std::vector<double> mu;
  for (const auto& v : w.surrogates.vertices()) mu.push_back(crash_rate(v, w.pmf));
  for (int k = 0; k < 200; ++k) {
    const auto c = testing::random_simplex(rng, mu.size());
    double expect = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) expect += c[i] * mu[i];
    ASSERT_NEAR(crash_rate(convex_combine(w.surrogates, c), w.pmf), expect, 1e-12);
  }
}

TEST(SurrogateSet, RejectsMixedGrids) {
  const ScenarioGrid a = build_grid({{0, 2}, {0, 2}}, {1, 1});
  const ScenarioGrid b = build_grid({{0, 4}, {0, 1}}, {1, 1});
  EXPECT_THROW(SurrogateSet({CrashMap(a, {0, 0, 0, 0}), CrashMap(b, {0, 0, 0, 0})}), ConfigError);
  EXPECT_THROW(SurrogateSet({}), ConfigError);
}

}  // namespace
}  // namespace fewshot
