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

#include "fewshot/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "fewshot/error.hpp"
#include "fewshot/random.hpp"

namespace fewshot {

std::string_view to_string(BaselineMethod m) {
  return m == BaselineMethod::kCmc ? "CMC" : "RQMC";
}

double BaselineDraw::estimate(const CrashMap& map) const {
  double mu = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) mu += map.at(test_set.points[i]) * weights[i];
  return std::clamp(mu, 0.0, 1.0);
}

BaselineDraw cmc_sample(std::size_t n, const ExposurePmf& pmf, std::uint64_t seed) {
  if (n < 1) throw ConfigError("baseline sample size must be >= 1");
  std::vector<double> cumulative(pmf.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < pmf.size(); ++c) cumulative[c] = (acc += pmf[c]);

  Rng rng(seed);
  BaselineDraw draw;
  draw.method = BaselineMethod::kCmc;
  for (std::size_t i = 0; i < n; ++i) {
    draw.test_set.points.push_back(pmf.grid().center(rng.from_cumulative(cumulative)));
  }
  draw.weights.assign(n, 1.0 / static_cast<double>(n));
  return draw;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv = 1.0 / base;
  double scale = inv;
  double out = 0.0;
  while (index > 0) {
    out += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return out;
}

std::vector<UnitPoint> halton_2d(std::size_t n) {
  std::vector<UnitPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) pts.push_back({radical_inverse(i, 2), radical_inverse(i, 3)});
  return pts;
}

BaselineDraw rqmc_sample(std::size_t n, const ExposurePmf& pmf, std::uint64_t seed) {
  if (n < 1) throw ConfigError("baseline sample size must be >= 1");
  const ScenarioGrid& grid = pmf.grid();
  Rng rng(seed);
  const double shift_u = rng.uniform();
  const double shift_v = rng.uniform();

  BaselineDraw draw;
  draw.method = BaselineMethod::kRqmc;
  double total = 0.0;
  for (const UnitPoint& h : halton_2d(n)) {
    double u = h.u + shift_u;
    double v = h.v + shift_v;
    u -= std::floor(u);
    v -= std::floor(v);
    const Scenario s = grid.clamp(denormalize({u, v}, grid));
    draw.test_set.points.push_back(s);
    draw.weights.push_back(pmf[grid.cell_of(s)]);
    total += draw.weights.back();
  }
  for (double& w : draw.weights) w = total > 0.0 ? w / total : 1.0 / static_cast<double>(n);
  return draw;
}

double star_discrepancy(std::span<const UnitPoint> pts) {
  // The supremum over anchored boxes [0,a)x[0,b) is attained with a and b
  // drawn from the point coordinates or 1; check both open and closed counts.
  std::vector<double> us{1.0}, vs{1.0};
  for (const auto& p : pts) {
    us.push_back(p.u);
    vs.push_back(p.v);
  }
  const double n = static_cast<double>(pts.size());
  double worst = 0.0;
  for (double a : us) {
    for (double b : vs) {
      std::size_t open = 0, closed = 0;
      for (const auto& p : pts) {
        if (p.u < a && p.v < b) ++open;
        if (p.u <= a && p.v <= b) ++closed;
      }
      const double vol = a * b;
      worst = std::max(worst, vol - static_cast<double>(open) / n);
      worst = std::max(worst, static_cast<double>(closed) / n - vol);
    }
  }
  return worst;
}

}  // namespace fewshot
