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

#include "fewshot/scenario_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fewshot/error.hpp"

namespace fewshot {

namespace {

std::size_t cell_count(double span, double step, const char* axis) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ConfigError(std::string("grid.steps.") + axis + " must be positive");
  }
  if (!(span > 0.0) || !std::isfinite(span)) {
    throw ConfigError(std::string("grid.bounds.") + axis + " must have positive span");
  }
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw ConfigError(std::string("grid.steps.") + axis + " does not divide the span evenly");
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t axis_cell(double value, const Interval& axis, double step, std::size_t count) {
  const double k = std::ceil((value - axis.lo) / step) - 1.0;
  if (!(k > 0.0)) return 0;  // also catches NaN
  return std::min(static_cast<std::size_t>(k), count - 1);
}

}  // namespace

ScenarioGrid build_grid(const GridBounds& bounds, const GridSteps& steps) {
  ScenarioGrid grid;
  grid.nr_ = cell_count(bounds.r.span(), steps.r, "r");
  grid.nrd_ = cell_count(bounds.r_dot.span(), steps.r_dot, "rdot");
  grid.bounds_ = bounds;
  grid.steps_ = steps;
  return grid;
}

Scenario ScenarioGrid::center(std::size_t index) const {
  const auto col = static_cast<double>(col_of(index));
  const auto row = static_cast<double>(row_of(index));
  return {bounds_.r.lo + (col + 0.5) * steps_.r, bounds_.r_dot.lo + (row + 0.5) * steps_.r_dot};
}

std::size_t ScenarioGrid::cell_of(const Scenario& s) const {
  return index(axis_cell(s.r, bounds_.r, steps_.r, nr_),
               axis_cell(s.r_dot, bounds_.r_dot, steps_.r_dot, nrd_));
}

bool ScenarioGrid::contains(const Scenario& s) const {
  return s.r > bounds_.r.lo && s.r <= bounds_.r.hi && s.r_dot >= bounds_.r_dot.lo &&
         s.r_dot <= bounds_.r_dot.hi;
}

Scenario ScenarioGrid::clamp(const Scenario& s) const {
  Scenario out = s;
  if (!(out.r > bounds_.r.lo)) out.r = std::nextafter(bounds_.r.lo, bounds_.r.hi);
  out.r = std::min(out.r, bounds_.r.hi);
  out.r_dot = std::clamp(out.r_dot, bounds_.r_dot.lo, bounds_.r_dot.hi);
  return out;
}

double ScenarioGrid::normalized_cell_diagonal() const {
  const double du = steps_.r / bounds_.r.span();
  const double dv = steps_.r_dot / bounds_.r_dot.span();
  return std::hypot(du, dv);
}

ExposurePmf::ExposurePmf(ScenarioGrid grid, std::vector<double> mass)
    : grid_(std::move(grid)), mass_(std::move(mass)) {
  if (mass_.size() != grid_.size()) {
    throw ConfigError("exposure mass does not match grid size");
  }
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("exposure mass must be finite and >= 0");
  }
}

ExposurePmf build_exposure(const ScenarioGrid& grid, std::span<const MixtureComponent> mixture) {
  if (mixture.empty()) throw ConfigError("exposure.mixture must not be empty");
  for (const auto& c : mixture) {
    if (!(c.weight > 0.0)) throw ConfigError("exposure.mixture[].weight must be positive");
    if (!(c.sd_r > 0.0) || !(c.sd_r_dot > 0.0)) {
      throw ConfigError("exposure.mixture[] standard deviations must be positive");
    }
  }

  std::vector<double> mass(grid.size());
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const Scenario x = grid.center(i);
    double density = 0.0;
    for (const auto& c : mixture) {
      const double zr = (x.r - c.mean_r) / c.sd_r;
      const double zd = (x.r_dot - c.mean_r_dot) / c.sd_r_dot;
      density += c.weight * std::exp(-0.5 * (zr * zr + zd * zd)) / (c.sd_r * c.sd_r_dot);
    }
    mass[i] = density;
  }

  long double total = 0.0L;
  for (double m : mass) total += m;
  if (!(total > 0.0L)) throw ConfigError("exposure mixture has no mass inside the grid");
  for (double& m : mass) m = static_cast<double>(m / total);
  return ExposurePmf(grid, std::move(mass));
}

UnitPoint normalize(const Scenario& s, const ScenarioGrid& grid) {
  const auto& b = grid.bounds();
  return {(s.r - b.r.lo) / b.r.span(), (s.r_dot - b.r_dot.lo) / b.r_dot.span()};
}

Scenario denormalize(const UnitPoint& p, const ScenarioGrid& grid) {
  const auto& b = grid.bounds();
  return {b.r.lo + p.u * b.r.span(), b.r_dot.lo + p.v * b.r_dot.span()};
}

std::vector<MixtureComponent> default_mixture() {
  return {{0.7, 35.0, 0.0, 15.0, 3.0}, {0.3, 60.0, 2.0, 12.0, 2.0}};
}

}  // namespace fewshot
