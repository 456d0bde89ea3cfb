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

#include "fewshot/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "fewshot/error.hpp"

namespace fewshot {

double similarity(const Scenario& a, const Scenario& b, const ScenarioGrid& grid) {
  const UnitPoint pa = normalize(a, grid);
  const UnitPoint pb = normalize(b, grid);
  const double d = std::hypot(pa.u - pb.u, pa.v - pb.v);
  return d > 0.0 ? 1.0 / d : kInfiniteSimilarity;
}

double similarity_cap(const ScenarioGrid& grid) {
  return 1.0 / (0.5 * grid.normalized_cell_diagonal());
}

CoveragePartition partition(const TestSet& ts, const ExposurePmf& pmf) {
  if (ts.points.empty()) throw ConfigError("test set must contain at least one point");
  const ScenarioGrid& grid = pmf.grid();

  std::vector<UnitPoint> pts;
  pts.reserve(ts.size());
  for (const auto& p : ts.points) pts.push_back(normalize(p, grid));

  CoveragePartition out;
  out.owner.resize(grid.size());
  out.weights.assign(ts.size(), 0.0);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const UnitPoint x = normalize(grid.center(c), grid);
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double du = x.u - pts[j].u;
      const double dv = x.v - pts[j].v;
      const double d2 = du * du + dv * dv;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    out.owner[c] = best;
    out.weights[best] += pmf[c];
  }
  return out;
}

double estimate_mu(const CoveragePartition& part, std::span<const double> responses) {
  if (responses.size() != part.weights.size()) {
    throw ConfigError("estimate_mu: expected " + std::to_string(part.weights.size()) +
                      " responses, got " + std::to_string(responses.size()));
  }
  double mu = 0.0;
  for (std::size_t i = 0; i < responses.size(); ++i) mu += responses[i] * part.weights[i];
  return std::clamp(mu, 0.0, 1.0);
}

std::vector<double> responses_at(const TestSet& ts, const CrashMap& map) {
  std::vector<double> out;
  out.reserve(ts.size());
  for (const auto& p : ts.points) out.push_back(map.at(p));
  return out;
}

std::vector<double> fluctuation(const TestSet& ts, const CoveragePartition& part,
                                const CrashMap& map, const ExposurePmf& pmf) {
  const ScenarioGrid& grid = pmf.grid();
  if (!(map.grid() == grid)) throw ConfigError("fluctuation: crash map and exposure grids differ");
  if (part.owner.size() != grid.size() || part.weights.size() != ts.size()) {
    throw ConfigError("fluctuation: partition does not match test set and grid");
  }
  const double cap = similarity_cap(grid);
  const std::vector<double> at_point = responses_at(ts, map);

  std::vector<UnitPoint> pts;
  pts.reserve(ts.size());
  for (const auto& p : ts.points) pts.push_back(normalize(p, grid));

  std::vector<double> num(ts.size(), 0.0);
  std::vector<double> den(ts.size(), 0.0);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const std::size_t i = part.owner[c];
    const UnitPoint x = normalize(grid.center(c), grid);
    const double du = x.u - pts[i].u;
    const double dv = x.v - pts[i].v;
    const double d = std::sqrt(du * du + dv * dv);
    const double s = d > 0.0 ? std::min(1.0 / d, cap) : cap;
    const double ps = pmf[c] * s;
    num[i] += (map[c] - at_point[i]) * ps;
    den[i] += ps;
  }

  std::vector<double> out(ts.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (den[i] > 0.0) out[i] = std::abs(num[i]) / den[i];
  }
  return out;
}

}  // namespace fewshot
