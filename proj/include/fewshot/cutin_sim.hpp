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

#include <span>
#include <string>
#include <vector>

#include "fewshot/scenario_space.hpp"

namespace fewshot {

/// Intelligent Driver Model parameters.
struct IdmParams {
  std::string name;
  double v0 = 33.3;     ///< desired speed [m/s]
  double T = 1.6;       ///< desired time headway [s]
  double a_max = 0.73;  ///< maximum acceleration [m/s^2]
  double b = 1.67;      ///< comfortable deceleration [m/s^2]
  double s0 = 2.0;      ///< jam distance [m]
  double delta = 4.0;   ///< acceleration exponent
  double b_max = 9.8;   ///< braking capability; IDM output is clamped at -b_max [m/s^2]

  /// Throws ConfigError unless every parameter is finite and positive.
  void validate() const;
};

struct SimConfig {
  double dt = 0.1;       ///< integration step [s]
  double horizon = 10.0; ///< simulated duration [s]
  double v_av0 = 20.0;   ///< initial speed of the vehicle under test [m/s]
  double d_th = 0.0;     ///< crash when the gap drops below this [m]

  void validate() const;
};

/// Physical braking limit, the default for IdmParams::b_max [m/s^2].
inline constexpr double kMaxBraking = 9.8;

/// IDM acceleration for a follower at speed `v` behind a leader at `v_lead`
/// with bumper-to-bumper `gap`. Uses the standard desired gap
/// s* = s0 + max(0, v*T + v*(v - v_lead) / (2*sqrt(a_max*b))) and clamps the
/// result at -p.b_max. Throws std::invalid_argument if gap <= 0.
double idm_acceleration(double v, double v_lead, double gap, const IdmParams& p);

struct CutinOutcome {
  bool crash = false;
  double min_gap = 0.0;
};

/// Rolls out a cut-in: the background vehicle holds v_av0 + r_dot (floored at
/// zero) while the vehicle under test follows it with IDM, explicit Euler.
CutinOutcome simulate_cutin(const Scenario& s, const IdmParams& av, const SimConfig& cfg);

/// Per-cell crash probability P(A|x) over a grid.
class CrashMap {
 public:
  CrashMap() = default;
  CrashMap(ScenarioGrid grid, std::vector<double> values);

  const ScenarioGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }
  double at(const Scenario& s) const { return values_[grid_.cell_of(s)]; }
  std::size_t size() const { return values_.size(); }

 private:
  ScenarioGrid grid_{};
  std::vector<double> values_;
};

/// Simulates every cell center. The result is binary and deterministic.
CrashMap compute_crash_map(const IdmParams& model, const ScenarioGrid& grid, const SimConfig& cfg);

/// Vertex crash maps spanning the surrogate-model family by convex combination.
class SurrogateSet {
 public:
  explicit SurrogateSet(std::vector<CrashMap> vertices);

  std::span<const CrashMap> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const ScenarioGrid& grid() const { return vertices_.front().grid(); }

 private:
  std::vector<CrashMap> vertices_;
};

/// Pointwise convex combination of the vertex maps. `c` must be
/// nonnegative and sum to one within 1e-9.
CrashMap convex_combine(const SurrogateSet& set, std::span<const double> c);

/// Exposure-weighted crash probability, sum_x P(A|x) p(x).
double crash_rate(const CrashMap& map, const ExposurePmf& pmf);

}  // namespace fewshot
