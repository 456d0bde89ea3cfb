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
#include <limits>
#include <span>
#include <vector>

#include "fewshot/cutin_sim.hpp"
#include "fewshot/scenario_space.hpp"

namespace fewshot {

/// Ordered test scenarios. Order matters: ties in coverage go to the lower index.
struct TestSet {
  std::vector<Scenario> points;

  std::size_t size() const { return points.size(); }
};

/// Dynamic neighborhood coverage: every grid cell belongs to the test point
/// most similar to its center; a point's weight is the exposure mass it owns.
struct CoveragePartition {
  std::vector<std::size_t> owner;  ///< per grid cell
  std::vector<double> weights;     ///< per test point
};

/// Returned by similarity() for coincident points.
inline constexpr double kInfiniteSimilarity = std::numeric_limits<double>::infinity();

/// Inverse Euclidean distance between the normalized points.
double similarity(const Scenario& a, const Scenario& b, const ScenarioGrid& grid);

/// Upper bound applied to similarity inside the fluctuation estimator:
/// one over half the normalized cell diagonal.
double similarity_cap(const ScenarioGrid& grid);

/// Assigns each cell to the most similar test point (lowest index on ties)
/// and accumulates exposure mass per point. Requires a nonempty test set.
CoveragePartition partition(const TestSet& ts, const ExposurePmf& pmf);

/// Coverage-weighted estimate sum_i responses[i] * weights[i].
double estimate_mu(const CoveragePartition& part, std::span<const double> responses);

/// Reads each test point's response from the crash map (cell containing the point).
std::vector<double> responses_at(const TestSet& ts, const CrashMap& map);

/// Coverage fluctuation per test point: the similarity- and exposure-weighted
/// mean deviation of the map over the point's coverage set from the map value
/// at the point itself, in absolute value. Similarities are capped at
/// similarity_cap(). A point owning no mass gets 0.
std::vector<double> fluctuation(const TestSet& ts, const CoveragePartition& part,
                                const CrashMap& map, const ExposurePmf& pmf);

}  // namespace fewshot
