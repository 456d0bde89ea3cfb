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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fewshot/cutin_sim.hpp"
#include "fewshot/estimator.hpp"
#include "fewshot/scenario_space.hpp"

namespace fewshot {

enum class BaselineMethod { kCmc, kRqmc };

std::string_view to_string(BaselineMethod m);

/// A sampled test set with its estimator weights.
struct BaselineDraw {
  BaselineMethod method = BaselineMethod::kCmc;
  TestSet test_set;
  std::vector<double> weights;

  double estimate(const CrashMap& map) const;
};

/// Crude Monte Carlo in the naturalistic environment: n cells drawn i.i.d.
/// from the exposure pmf (with replacement), points at cell centers, weights 1/n.
BaselineDraw cmc_sample(std::size_t n, const ExposurePmf& pmf, std::uint64_t seed);

/// Radical inverse of `index` in `base`.
double radical_inverse(std::uint64_t index, unsigned base);

/// Halton points (bases 2 and 3) for indices 1..n in the unit square.
std::vector<UnitPoint> halton_2d(std::size_t n);

/// Randomized QMC: the Halton prefix with a seeded Cranley-Patterson shift,
/// mapped onto the box. Weights are the exposure masses of the sampled cells,
/// self-normalized to sum to one (uniform-proposal importance weights).
BaselineDraw rqmc_sample(std::size_t n, const ExposurePmf& pmf, std::uint64_t seed);

/// Exact star discrepancy of a small 2-D point set in the unit square.
double star_discrepancy(std::span<const UnitPoint> pts);

}  // namespace fewshot
