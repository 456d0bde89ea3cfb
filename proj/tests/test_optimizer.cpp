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

#include <algorithm>
#include <cmath>

#include "fewshot/error.hpp"
#include "fewshot/optimizer.hpp"
#include "test_support.hpp"

namespace fewshot {
namespace {

struct OracleObjective {
  double worst_gap = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

// Step-by-step recomputation: nearest-point ownership, exposure weights,
// vertex estimates and gaps, capped-similarity fluctuation maxed over vertices.
OracleObjective oracle_objective(const TestSet& ts, const SurrogateSet& set, const ExposurePmf& pmf,
                                 double w_m) {
  const ScenarioGrid& g = pmf.grid();
  const double sr = g.bounds().r.span();
  const double sd = g.bounds().r_dot.span();
  const double cap = 1.0 / (0.5 * std::hypot(g.steps().r / sr, g.steps().r_dot / sd));
  const std::size_t n = ts.size();

  std::vector<std::size_t> owner(g.size());
  std::vector<double> w(n, 0.0);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Scenario x = g.center(c);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::hypot((x.r - ts.points[j].r) / sr, (x.r_dot - ts.points[j].r_dot) / sd);
      if (d < best) {
        best = d;
        owner[c] = j;
      }
    }
    w[owner[c]] += pmf[c];
  }

  OracleObjective out;
  std::vector<double> f(n, 0.0);
  for (const CrashMap& m : set.vertices()) {
    double est = 0.0, truth = 0.0;
    for (std::size_t i = 0; i < n; ++i) est += m.at(ts.points[i]) * w[i];
    for (std::size_t c = 0; c < g.size(); ++c) truth += m[c] * pmf[c];
    out.worst_gap = std::max(out.worst_gap, std::abs(est - truth));
    for (std::size_t i = 0; i < n; ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < g.size(); ++c) {
        if (owner[c] != i) continue;
        const Scenario x = g.center(c);
        const double d = std::hypot((x.r - ts.points[i].r) / sr, (x.r_dot - ts.points[i].r_dot) / sd);
        const double s = d > 0 ? std::min(1.0 / d, cap) : cap;
        num += (m[c] - m.at(ts.points[i])) * pmf[c] * s;
        den += pmf[c] * s;
      }
      if (den > 0) f[i] = std::max(f[i], std::abs(num) / den);
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.penalty += f[i] * w[i];
  out.total = std::isinf(w_m) ? out.worst_gap : w_m * out.worst_gap + out.penalty;
  return out;
}

OptimizerConfig quick_config(std::size_t n, std::uint64_t seed, double w_m) {
  OptimizerConfig oc;
  oc.n = n;
  oc.seed = seed;
  oc.w_m = w_m;
  oc.restarts = 4;
  return oc;
}

const TestSet kFivePoints{{{4.23, -14.07}, {12.31, -8.61}, {30.17, -2.13}, {55.42, 1.09}, {80.77, 6.31}}};

TEST(CombineObjective, InfiniteConfidenceIsWorstGap) {
  EXPECT_EQ(combine_objective(2e-4, 5e-3, kInfiniteConfidence), 2e-4);
  EXPECT_DOUBLE_EQ(combine_objective(2e-4, 5e-3, 1.0), 5.2e-3);
  EXPECT_DOUBLE_EQ(combine_objective(2e-4, 5e-3, 0.0), 5e-3);
}

TEST(Objective, ZeroGapWhenEveryVertexIsConstant) {
  const World& w = testing::default_world();
  const SurrogateSet flat({CrashMap(w.grid, std::vector<double>(w.grid.size(), 0.0)),
                           CrashMap(w.grid, std::vector<double>(w.grid.size(), 1.0))});
  const ObjectiveReport r = objective(kFivePoints, flat, w.pmf, 1.0);
  EXPECT_LE(r.worst_gap, 1e-15);
  EXPECT_EQ(r.penalty, 0.0);
}

TEST(Objective, MatchesIndependentRecomputation) {
  const World& w = testing::default_world();
  for (double w_m : {1.0, 0.25, kInfiniteConfidence}) {
    const ObjectiveReport r = objective(kFivePoints, w.surrogates, w.pmf, w_m);
    const OracleObjective o = oracle_objective(kFivePoints, w.surrogates, w.pmf, w_m);
    EXPECT_NEAR(r.worst_gap, o.worst_gap, 1e-12);
    EXPECT_NEAR(r.penalty, o.penalty, 1e-12);
    EXPECT_NEAR(r.total_j, o.total, 1e-12);
    EXPECT_NEAR(r.total_j, combine_objective(r.worst_gap, r.penalty, w_m), 1e-12);
  }
}

TEST(Objective, ReportComponentsAreConsistent) {
  const World& w = testing::default_world();
  const ObjectiveReport r = objective(kFivePoints, w.surrogates, w.pmf, 1.0);
  ASSERT_EQ(r.per_vertex_gap.size(), 4u);
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_GE(r.per_vertex_gap[k], 0.0);
    EXPECT_DOUBLE_EQ(r.per_vertex_gap[k], std::abs(r.per_vertex_estimate[k] - r.per_vertex_truth[k]));
    EXPECT_NEAR(r.per_vertex_truth[k], crash_rate(w.surrogates.vertices()[k], w.pmf), 1e-15);
    worst = std::max(worst, r.per_vertex_gap[k]);
  }
  EXPECT_EQ(r.worst_gap, worst);
  EXPECT_GE(r.penalty, 0.0);
  EXPECT_TRUE(std::isnan(r.estimation_error_e));
}

TEST(Objective, HullMembersAreDominatedByWorstVertex) {
  const World& w = testing::default_world();
  Rng rng(99);
  for (int s = 0; s < 5; ++s) {
    const TestSet ts = testing::random_test_set(rng, 10, w.grid);
    const ObjectiveReport r = objective(ts, w.surrogates, w.pmf, kInfiniteConfidence);
    for (int k = 0; k < 200; ++k) {
      const CrashMap m = convex_combine(w.surrogates, testing::random_simplex(rng, 4));
      const double gap = std::abs(estimate_mu(partition(ts, w.pmf), responses_at(ts, m)) -
                                  crash_rate(m, w.pmf));
      ASSERT_LE(gap, r.worst_gap + 1e-12);
    }
  }
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig oc;
  EXPECT_NO_THROW(oc.validate());
  oc.n = 0;
  EXPECT_THROW(oc.validate(), ConfigError);
  oc = {};
  oc.restarts = 0;
  EXPECT_THROW(oc.validate(), ConfigError);
  oc = {};
  oc.min_step = oc.init_step;
  EXPECT_THROW(oc.validate(), ConfigError);
  oc = {};
  oc.w_m = -1.0;
  EXPECT_THROW(oc.validate(), ConfigError);
}

TEST(Synthesize, ConstantSingleVertexGivesZeroGap) {
  const World& w = testing::default_world();
  const SurrogateSet flat({CrashMap(w.grid, std::vector<double>(w.grid.size(), 1.0))});
  const SynthesisResult res = synthesize(quick_config(3, 1, 1.0), flat, w.pmf);
  EXPECT_LE(res.report.worst_gap, 1e-15);
  EXPECT_EQ(res.test_set.size(), 3u);
}

TEST(Synthesize, ReportEqualsObjectiveOfReturnedSet) {
  const World& w = testing::default_world();
  for (double w_m : {1.0, kInfiniteConfidence}) {
    const SynthesisResult res = synthesize(quick_config(6, 42, w_m), w.surrogates, w.pmf);
    const ObjectiveReport r = objective(res.test_set, w.surrogates, w.pmf, w_m);
    EXPECT_EQ(res.report.total_j, r.total_j);
    EXPECT_EQ(res.report.worst_gap, r.worst_gap);
    EXPECT_EQ(res.report.penalty, r.penalty);
  }
}

TEST(Synthesize, DeterministicForASeed) {
  const World& w = testing::default_world();
  const SynthesisResult a = synthesize(quick_config(5, 7, 1.0), w.surrogates, w.pmf);
  const SynthesisResult b = synthesize(quick_config(5, 7, 1.0), w.surrogates, w.pmf);
  ASSERT_EQ(a.test_set.size(), b.test_set.size());
  for (std::size_t i = 0; i < a.test_set.size(); ++i) EXPECT_EQ(a.test_set.points[i], b.test_set.points[i]);
  EXPECT_EQ(a.report.total_j, b.report.total_j);
}

TEST(Synthesize, PointsStayInsideTheBox) {
  const World& w = testing::default_world();
  const SynthesisResult res = synthesize(quick_config(8, 3, 1.0), w.surrogates, w.pmf);
  for (const auto& p : res.test_set.points) EXPECT_TRUE(w.grid.contains(p));
}

TEST(Synthesize, TraceIsMonotoneWithinEachRestart) {
  const World& w = testing::default_world();
  const SynthesisResult res = synthesize(quick_config(5, 11, 1.0), w.surrogates, w.pmf, true);
  ASSERT_FALSE(res.trace.empty());
  for (std::size_t k = 1; k < res.trace.size(); ++k) {
    if (res.trace[k].restart != res.trace[k - 1].restart) continue;
    EXPECT_LE(res.trace[k].total_j, res.trace[k - 1].total_j);
    EXPECT_LE(res.trace[k].step, res.trace[k - 1].step);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : res.trace) best = std::min(best, row.total_j);
  EXPECT_EQ(best, res.report.total_j);
}

TEST(Synthesize, InfiniteConfidenceBoundHoldsInsideTheHull) {
  const World& w = testing::default_world();
  Rng rng(5);
  const SynthesisResult res = synthesize(quick_config(10, 8, kInfiniteConfidence), w.surrogates, w.pmf);
  EXPECT_EQ(res.report.total_j, res.report.worst_gap);
  const AvEvaluation m1 = evaluate_av(res.test_set, w.surrogates.vertices()[0], w.pmf);
  EXPECT_LE(m1.realized_error, res.report.worst_gap);
  for (int k = 0; k < 200; ++k) {
    const CrashMap av = convex_combine(w.surrogates, testing::random_simplex(rng, 4));
    ASSERT_LE(evaluate_av(res.test_set, av, w.pmf).realized_error, res.report.worst_gap + 1e-12);
  }
}

TEST(Synthesize, SingleThresholdModelWithTwoPoints) {
  const World& w = testing::default_world();
  std::vector<double> values(w.grid.size());
  for (std::size_t c = 0; c < w.grid.size(); ++c) values[c] = w.grid.center(c).r < 22.0 ? 1.0 : 0.0;
  const SurrogateSet single({CrashMap(w.grid, values)});
  // Exposure of the cells on the coarse 5 m column that straddles r = 22.
  double straddle = 0.0;
  for (std::size_t c = 0; c < w.grid.size(); ++c) {
    const double r = w.grid.center(c).r;
    if (r > 20.0 && r < 25.0) straddle += w.pmf[c];
  }
  OptimizerConfig oc = quick_config(2, 1, kInfiniteConfidence);
  oc.restarts = 8;
  const SynthesisResult res = synthesize(oc, single, w.pmf);
  EXPECT_LE(res.report.worst_gap, straddle);
}

TEST(Synthesize, DefaultPointsConcentrateWhereVerticesDisagree) {
  const World& w = testing::default_world();
  OptimizerConfig oc = default_config().optimizer;
  oc.n = 20;
  oc.seed = 2;
  const SynthesisResult res = synthesize(oc, w.surrogates, w.pmf);
  const CoveragePartition part = partition(res.test_set, w.pmf);
  const auto v = w.surrogates.vertices();
  // Disagreement region: cells where the most conservative and most
  // aggressive vertices differ, grown by a few cells so that it also holds
  // points sitting right at a boundary.
  auto near_disagreement = [&](const Scenario& s) {
    const std::size_t c = w.grid.cell_of(s);
    const long col = static_cast<long>(w.grid.col_of(c));
    const long row = static_cast<long>(w.grid.row_of(c));
    for (long dr = -3; dr <= 3; ++dr) {
      for (long dc = -3; dc <= 3; ++dc) {
        const long cc = col + dc, rr = row + dr;
        if (cc < 0 || rr < 0 || cc >= static_cast<long>(w.grid.r_cells()) ||
            rr >= static_cast<long>(w.grid.r_dot_cells())) {
          continue;
        }
        const std::size_t k = w.grid.index(static_cast<std::size_t>(cc), static_cast<std::size_t>(rr));
        if (v.front()[k] != v.back()[k]) return true;
      }
    }
    return false;
  };
  double in_mass = 0.0, out_mass = 0.0;
  std::size_t in_count = 0, out_count = 0;
  for (std::size_t i = 0; i < res.test_set.size(); ++i) {
    if (near_disagreement(res.test_set.points[i])) {
      in_mass += part.weights[i];
      ++in_count;
    } else {
      out_mass += part.weights[i];
      ++out_count;
    }
  }
  ASSERT_GT(in_count, 0u);
  ASSERT_GT(out_count, 0u);
  EXPECT_LT(in_mass / in_count, out_mass / out_count);
}

TEST(EvaluateWeighted, UsesTheGivenWeights) {
  const World& w = testing::default_world();
  const TestSet ts{{{2.5, -15.25}, {50.5, 0.25}}};
  const std::vector<double> weights{0.25, 0.75};
  const AvEvaluation ev = evaluate_weighted(ts, weights, w.av_map, w.pmf);
  EXPECT_DOUBLE_EQ(ev.mu_hat, 0.25 * w.av_map.at(ts.points[0]) + 0.75 * w.av_map.at(ts.points[1]));
  EXPECT_EQ(ev.mu_true, w.av_mu);
  EXPECT_EQ(ev.realized_error, std::abs(ev.mu_hat - ev.mu_true));
}

}  // namespace
}  // namespace fewshot
