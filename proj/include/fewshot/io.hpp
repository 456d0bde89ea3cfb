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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewshot/cutin_sim.hpp"
#include "fewshot/estimator.hpp"
#include "fewshot/optimizer.hpp"

namespace fewshot {

/// `r,rdot,p_crash`, one row per cell in grid index order.
void write_crash_map_csv(std::ostream& out, const CrashMap& map);

/// `r,rdot,owner_index`, one row per cell in grid index order.
void write_partition_csv(std::ostream& out, const ScenarioGrid& grid, const CoveragePartition& part);

/// `iter,restart,total_j,worst_gap,penalty,step`.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

/// On-disk test set shared by FST and the sampling baselines. Baselines carry
/// explicit weights; FST sets leave them empty and are weighted by coverage.
struct TestSetFile {
  std::string method = "FST";
  TestSet test_set;
  std::vector<double> weights;
  std::uint64_t seed = 0;
  std::optional<double> objective;
  std::string config_hash;
};

nlohmann::json to_json(const TestSetFile& f);
TestSetFile test_set_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ObjectiveReport& r);

/// printf `%.*g` with the given number of significant digits.
std::string format_double(double x, int digits = 15);

}  // namespace fewshot
