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

#include "fewshot/baselines.hpp"
#include "fewshot/error.hpp"
#include "test_support.hpp"

namespace fewshot {
namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

template <typename Draw>
Moments repeat(int draws, Draw&& draw) {
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double x = draw(static_cast<std::uint64_t>(k));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / draws;
  return {mean, sum2 / draws - mean * mean};
}

TEST(RadicalInverse, Examples) {
  EXPECT_EQ(radical_inverse(0, 2), 0.0);
  EXPECT_EQ(radical_inverse(1, 2), 0.5);
  EXPECT_EQ(radical_inverse(2, 2), 0.25);
  EXPECT_EQ(radical_inverse(3, 2), 0.75);
  EXPECT_NEAR(radical_inverse(1, 3), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(radical_inverse(5, 3), 7.0 / 9.0, 1e-15);
}

TEST(Halton, StartsAtIndexOne) {
  const auto pts = halton_2d(3);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].u, 0.5);
  EXPECT_NEAR(pts[0].v, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(pts[2].u, 0.75);
  EXPECT_NEAR(pts[2].v, 1.0 / 9.0, 1e-15);
}

TEST(StarDiscrepancy, SinglePoint) {
  const std::vector<UnitPoint> one{{0.5, 0.5}};
  EXPECT_DOUBLE_EQ(star_discrepancy(one), 0.75);
}

TEST(StarDiscrepancy, HaltonBeatsIidUniform) {
  for (std::size_t n : {5u, 10u, 20u}) {
    const double halton = star_discrepancy(halton_2d(n));
    Rng rng(n);
    double iid = 0.0;
    const int sets = 200;
    for (int k = 0; k < sets; ++k) {
      std::vector<UnitPoint> pts(n);
      for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
      iid += star_discrepancy(pts);
    }
    EXPECT_LT(halton, iid / sets) << "n = " << n;
  }
}

TEST(CmcSample, PointMassPmfRepeatsOneCell) {
  const ScenarioGrid grid = build_grid({{0, 2}, {0, 2}}, {1, 1});
  const ExposurePmf pmf(grid, {0, 0, 1, 0});
  const BaselineDraw d = cmc_sample(6, pmf, 3);
  for (const auto& p : d.test_set.points) EXPECT_EQ(p, grid.center(2));
}

TEST(CmcSample, WeightsAreUniform) {
  const World& w = testing::default_world();
  const BaselineDraw d = cmc_sample(4, w.pmf, 1);
  const CrashMap ones(w.grid, std::vector<double>(w.grid.size(), 1.0));
  EXPECT_EQ(d.estimate(ones), 1.0);
  for (double x : d.weights) EXPECT_EQ(x, 0.25);
  EXPECT_EQ(d.method, BaselineMethod::kCmc);
}

TEST(CmcSample, DeterministicForASeed) {
  const World& w = testing::default_world();
  const BaselineDraw a = cmc_sample(10, w.pmf, 77);
  const BaselineDraw b = cmc_sample(10, w.pmf, 77);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.test_set.points[i], b.test_set.points[i]);
}

TEST(CmcSample, RejectsEmptyDraw) {
  const World& w = testing::default_world();
  EXPECT_THROW(cmc_sample(0, w.pmf, 1), ConfigError);
  EXPECT_THROW(rqmc_sample(0, w.pmf, 1), ConfigError);
}

TEST(CmcSample, UnbiasedOnFirstVertex) {
  const World& w = testing::default_world();
  const CrashMap& m1 = w.surrogates.vertices()[0];
  const double mu = crash_rate(m1, w.pmf);
  const int draws = 10000;
  const Moments mom = repeat(draws, [&](std::uint64_t s) { return cmc_sample(20, w.pmf, 1000 + s).estimate(m1); });
  const double se = std::sqrt(mom.variance / draws);
  ASSERT_GT(se, 0.0);
  EXPECT_LE(std::abs(mom.mean - mu), 3.0 * se);
}

TEST(RqmcSample, SinglePointHasUnitWeight) {
  const World& w = testing::default_world();
  const BaselineDraw d = rqmc_sample(1, w.pmf, 9);
  ASSERT_EQ(d.test_set.size(), 1u);
  EXPECT_EQ(d.weights[0], 1.0);
  EXPECT_TRUE(w.grid.contains(d.test_set.points[0]));
}

TEST(RqmcSample, ConstantMapIsReproduced) {
  const World& w = testing::default_world();
  const CrashMap half(w.grid, std::vector<double>(w.grid.size(), 0.5));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_NEAR(rqmc_sample(10, w.pmf, seed).estimate(half), 0.5, 1e-15);
  }
}

TEST(RqmcSample, WeightsFollowExposure) {
  const World& w = testing::default_world();
  const BaselineDraw d = rqmc_sample(10, w.pmf, 4);
  double total = 0.0;
  for (double x : d.weights) total += x;
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 1; i < 10; ++i) {
    const double ratio = d.weights[i] / d.weights[0];
    EXPECT_NEAR(ratio, w.pmf[w.grid.cell_of(d.test_set.points[i])] / w.pmf[w.grid.cell_of(d.test_set.points[0])],
                1e-9);
  }
}

TEST(RqmcSample, ShiftedPointsAreSpreadOut) {
  const World& w = testing::default_world();
  const BaselineDraw d = rqmc_sample(20, w.pmf, 12);
  std::vector<UnitPoint> pts;
  for (const auto& p : d.test_set.points) pts.push_back(normalize(p, w.grid));
  // A toroidal shift keeps the low discrepancy of the Halton prefix up to a constant.
  EXPECT_LT(star_discrepancy(pts), 4.0 * star_discrepancy(halton_2d(20)));
}

TEST(RqmcSample, NearOracleWithSmallerVarianceThanCmc) {
  const World& w = testing::default_world();
  const CrashMap& m1 = w.surrogates.vertices()[0];
  const double mu = crash_rate(m1, w.pmf);
  const int draws = 10000;
  const Moments rqmc = repeat(draws, [&](std::uint64_t s) { return rqmc_sample(20, w.pmf, s).estimate(m1); });
  const Moments cmc = repeat(draws, [&](std::uint64_t s) { return cmc_sample(20, w.pmf, s).estimate(m1); });
  EXPECT_LT(std::abs(rqmc.mean - mu), 0.5 * mu);
  EXPECT_LT(rqmc.variance, cmc.variance);
}

}  // namespace
}  // namespace fewshot
