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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace fewshot {

/// A cut-in scenario at the moment of lane change: range R [m] between the
/// background vehicle and the vehicle under test, and range rate dR/dt [m/s]
/// (lead speed minus follower speed).
struct Scenario {
  double r = 0.0;
  double r_dot = 0.0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// A point of the unit square obtained by min-max normalizing a Scenario.
struct UnitPoint {
  double u = 0.0;
  double v = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double span() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct GridBounds {
  Interval r{0.0, 90.0};
  Interval r_dot{-20.0, 10.0};

  friend bool operator==(const GridBounds&, const GridBounds&) = default;
};

struct GridSteps {
  double r = 1.0;
  double r_dot = 0.5;

  friend bool operator==(const GridSteps&, const GridSteps&) = default;
};

/// Regular tiling of the scenario box.
///
/// Cells are half-open on their low edge, (lo, hi], so the excluded boundary
/// R = 0 never belongs to a cell interior. Indexing is row-major with the
/// range coordinate varying fastest: index = row * r_cells() + col, where
/// row counts range-rate cells and col counts range cells.
class ScenarioGrid {
 public:
  ScenarioGrid() = default;

  const GridBounds& bounds() const { return bounds_; }
  const GridSteps& steps() const { return steps_; }
  std::size_t r_cells() const { return nr_; }
  std::size_t r_dot_cells() const { return nrd_; }
  std::size_t size() const { return nr_ * nrd_; }

  std::size_t index(std::size_t col, std::size_t row) const { return row * nr_ + col; }
  std::size_t col_of(std::size_t index) const { return index % nr_; }
  std::size_t row_of(std::size_t index) const { return index / nr_; }

  Scenario center(std::size_t index) const;

  /// Index of the cell containing `s`. Points outside the box are clamped
  /// onto the nearest boundary cell.
  std::size_t cell_of(const Scenario& s) const;

  bool contains(const Scenario& s) const;

  /// Nudges `s` into the box: r into (lo, hi], r_dot into [lo, hi].
  Scenario clamp(const Scenario& s) const;

  /// Smallest diagonal of a cell after min-max normalization.
  double normalized_cell_diagonal() const;

  friend bool operator==(const ScenarioGrid& a, const ScenarioGrid& b) {
    return a.bounds_ == b.bounds_ && a.steps_ == b.steps_;
  }

 private:
  friend ScenarioGrid build_grid(const GridBounds&, const GridSteps&);

  GridBounds bounds_{};
  GridSteps steps_{};
  std::size_t nr_ = 0;
  std::size_t nrd_ = 0;
};

/// Builds a grid whose steps tile `bounds` exactly.
/// Throws ConfigError when a step is non-positive or does not divide its span.
ScenarioGrid build_grid(const GridBounds& bounds, const GridSteps& steps);

/// One axis-aligned Gaussian component of the synthetic exposure model.
struct MixtureComponent {
  double weight = 1.0;
  double mean_r = 0.0;
  double mean_r_dot = 0.0;
  double sd_r = 1.0;
  double sd_r_dot = 1.0;
};

/// Per-cell exposure probability p(x), aligned with a ScenarioGrid.
class ExposurePmf {
 public:
  ExposurePmf() = default;
  ExposurePmf(ScenarioGrid grid, std::vector<double> mass);

  const ScenarioGrid& grid() const { return grid_; }
  std::span<const double> mass() const { return mass_; }
  double operator[](std::size_t cell) const { return mass_[cell]; }
  std::size_t size() const { return mass_.size(); }

 private:
  ScenarioGrid grid_{};
  std::vector<double> mass_;
};

/// Evaluates the mixture density at every cell center and renormalizes the
/// result to a probability mass function over the grid.
ExposurePmf build_exposure(const ScenarioGrid& grid, std::span<const MixtureComponent> mixture);

/// Affine map of the box onto the unit square.
UnitPoint normalize(const Scenario& s, const ScenarioGrid& grid);
Scenario denormalize(const UnitPoint& p, const ScenarioGrid& grid);

/// Default mixture: benign high-exposure regions around moderate range and
/// near-zero range rate.
std::vector<MixtureComponent> default_mixture();

}  // namespace fewshot
