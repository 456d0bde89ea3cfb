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

#include "fewshot/cutin_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fewshot/error.hpp"

namespace fewshot {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void IdmParams::validate() const {
  if (!positive(v0) || !positive(T) || !positive(a_max) || !positive(b) || !positive(s0) ||
      !positive(delta) || !positive(b_max) || b_max > kMaxBraking) {
    throw ConfigError("IDM parameters of model '" + name + "' must all be positive");
  }
}

void SimConfig::validate() const {
  if (!positive(dt)) throw ConfigError("sim.dt must be positive");
  if (!(horizon >= 1.0) || !std::isfinite(horizon)) throw ConfigError("sim.horizon must be >= 1 s");
  if (!positive(v_av0)) throw ConfigError("sim.v_av0 must be positive");
  if (!std::isfinite(d_th)) throw ConfigError("sim.d_th must be finite");
}

double idm_acceleration(double v, double v_lead, double gap, const IdmParams& p) {
  if (!(gap > 0.0)) throw std::invalid_argument("idm_acceleration: gap must be positive");
  const double dynamic = v * p.T + v * (v - v_lead) / (2.0 * std::sqrt(p.a_max * p.b));
  const double s_star = p.s0 + std::max(0.0, dynamic);
  const double ratio = s_star / gap;
  const double a = p.a_max * (1.0 - std::pow(v / p.v0, p.delta) - ratio * ratio);
  return std::max(a, -p.b_max);
}

CutinOutcome simulate_cutin(const Scenario& s, const IdmParams& av, const SimConfig& cfg) {
  const double v_bv = std::max(0.0, cfg.v_av0 + s.r_dot);
  double v = cfg.v_av0;
  double gap = s.r;
  CutinOutcome out{gap < cfg.d_th || !(gap > 0.0), gap};

  const auto steps = static_cast<long>(std::llround(cfg.horizon / cfg.dt));
  for (long k = 0; k < steps && !out.crash; ++k) {
    const double a = idm_acceleration(v, v_bv, gap, av);
    gap += (v_bv - v) * cfg.dt;
    v = std::max(0.0, v + a * cfg.dt);
    out.min_gap = std::min(out.min_gap, gap);
    out.crash = gap < cfg.d_th || !(gap > 0.0);
  }
  return out;
}

CrashMap::CrashMap(ScenarioGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ConfigError("crash map does not match grid size");
  for (double x : values_) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("crash map values must lie in [0, 1]");
  }
}

CrashMap compute_crash_map(const IdmParams& model, const ScenarioGrid& grid, const SimConfig& cfg) {
  model.validate();
  cfg.validate();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = simulate_cutin(grid.center(i), model, cfg).crash ? 1.0 : 0.0;
  }
  return CrashMap(grid, std::move(values));
}

SurrogateSet::SurrogateSet(std::vector<CrashMap> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw ConfigError("surrogate set needs at least one vertex");
  for (const auto& m : vertices_) {
    if (!(m.grid() == vertices_.front().grid())) {
      throw ConfigError("surrogate vertices must share one grid");
    }
  }
}

CrashMap convex_combine(const SurrogateSet& set, std::span<const double> c) {
  if (c.size() != set.size()) throw ConfigError("convex weights must match the vertex count");
  double total = 0.0;
  for (double ci : c) {
    if (!(ci >= 0.0) || !std::isfinite(ci)) throw ConfigError("convex weights must be nonnegative");
    total += ci;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("convex weights must sum to one");

  std::vector<double> values(set.grid().size(), 0.0);
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto vertex = set.vertices()[k].values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += c[k] * vertex[i];
  }
  // Rounding can push a consensus value a hair past 1.
  for (double& x : values) x = std::clamp(x, 0.0, 1.0);
  return CrashMap(set.grid(), std::move(values));
}

double crash_rate(const CrashMap& map, const ExposurePmf& pmf) {
  if (!(map.grid() == pmf.grid())) throw ConfigError("crash map and exposure use different grids");
  double mu = 0.0;
  for (std::size_t i = 0; i < map.size(); ++i) mu += map[i] * pmf[i];
  return mu;
}

}  // namespace fewshot
