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

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "fewshot/cutin_sim.hpp"
#include "fewshot/estimator.hpp"
#include "fewshot/scenario_space.hpp"

namespace fewshot {

/// Confidence weight meaning "trust the surrogate family completely":
/// the objective reduces to the worst vertex gap.
inline constexpr double kInfiniteConfidence = std::numeric_limits<double>::infinity();

struct ObjectiveReport {
  std::vector<double> per_vertex_estimate;  ///< coverage-weighted estimate per vertex
  std::vector<double> per_vertex_truth;     ///< full-grid crash rate per vertex
  std::vector<double> per_vertex_gap;       ///< |estimate - truth| per vertex
  double worst_gap = 0.0;
  double penalty = 0.0;  ///< sum_i F_i * w_i, F_i maximized over vertices
  double w_m = 1.0;
  double total_j = 0.0;
  /// Realized |mu_hat - mu| on an evaluated vehicle; NaN until one is evaluated.
  double estimation_error_e = std::numeric_limits<double>::quiet_NaN();
};

/// Combines the worst vertex gap and the fluctuation penalty. With
/// w_m == kInfiniteConfidence the total equals the worst gap.
double combine_objective(double worst_gap, double penalty, double w_m);

/// Evaluates the objective on a fixed test set by composing partition(),
/// estimate_mu() and fluctuation(). The worst case over the convex hull of
/// the vertices is attained at a vertex, so only vertices are scanned.
ObjectiveReport objective(const TestSet& ts, const SurrogateSet& set, const ExposurePmf& pmf,
                          double w_m);

struct OptimizerConfig {
  std::size_t n = 10;
  std::size_t restarts = 16;
  std::size_t max_iters = 200;  ///< sweeps per restart
  double init_step = 0.25;      ///< fraction of each box span
  double min_step = 0.005;      ///< fraction of each box span
  std::uint64_t seed = 0;
  double w_m = 1.0;
  double uniform_init_fraction = 0.5;

  void validate() const;
};

struct TraceRow {
  std::size_t iter = 0;
  std::size_t restart = 0;
  double total_j = 0.0;
  double worst_gap = 0.0;
  double penalty = 0.0;
  double step = 0.0;
};

struct SynthesisResult {
  TestSet test_set;
  ObjectiveReport report;
  std::size_t best_restart = 0;
  std::vector<TraceRow> trace;  ///< filled only when requested
};

/// Multi-start compass search over the n point coordinates.
///
/// Each restart draws its initial points from the exposure pmf (mixed with a
/// uniform draw over the box) and then sweeps the points in index order,
/// trying +r, -r, +r_dot, -r_dot moves of the current step and keeping the
/// first move that strictly lowers total_j. A sweep without improvement
/// halves the step. The best restart wins; ties go to the earlier restart.
SynthesisResult synthesize(const OptimizerConfig& cfg, const SurrogateSet& set,
                           const ExposurePmf& pmf, bool record_trace = false);

struct AvEvaluation {
  double mu_hat = 0.0;
  double mu_true = 0.0;
  double realized_error = 0.0;
};

/// Tests a vehicle on a fixed test set: coverage-weighted estimate from the
/// vehicle's responses at the test points versus its full-grid crash rate.
AvEvaluation evaluate_av(const TestSet& ts, const CrashMap& av_map, const ExposurePmf& pmf);

/// Same, with explicit per-point weights (used for the sampling baselines).
AvEvaluation evaluate_weighted(const TestSet& ts, std::span<const double> weights,
                               const CrashMap& av_map, const ExposurePmf& pmf);

}  // namespace fewshot
