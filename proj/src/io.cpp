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

#include "fewshot/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fewshot/config.hpp"
#include "fewshot/error.hpp"

namespace fewshot {

using nlohmann::json;

std::string format_double(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void write_crash_map_csv(std::ostream& out, const CrashMap& map) {
  out << "r,rdot,p_crash\n";
  for (std::size_t c = 0; c < map.size(); ++c) {
    const Scenario s = map.grid().center(c);
    out << format_double(s.r) << ',' << format_double(s.r_dot) << ',' << format_double(map[c]) << '\n';
  }
}

void write_partition_csv(std::ostream& out, const ScenarioGrid& grid, const CoveragePartition& part) {
  out << "r,rdot,owner_index\n";
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const Scenario s = grid.center(c);
    out << format_double(s.r) << ',' << format_double(s.r_dot) << ',' << part.owner[c] << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "iter,restart,total_j,worst_gap,penalty,step\n";
  for (const auto& t : trace) {
    out << t.iter << ',' << t.restart << ',' << format_double(t.total_j, 17) << ','
        << format_double(t.worst_gap, 17) << ',' << format_double(t.penalty, 17) << ','
        << format_double(t.step, 17) << '\n';
  }
}

json to_json(const TestSetFile& f) {
  json pts = json::array();
  for (const auto& p : f.test_set.points) pts.push_back({{"r", p.r}, {"rdot", p.r_dot}});
  json out{{"method", f.method}, {"n", f.test_set.size()}, {"points", pts}, {"seed", f.seed},
           {"config_hash", f.config_hash}};
  if (!f.weights.empty()) out["weights"] = f.weights;
  if (f.objective) out["objective"] = *f.objective;
  return out;
}

TestSetFile test_set_from_json(const json& j) {
  if (!j.is_object() || !j.contains("points") || !j.at("points").is_array()) {
    throw ConfigError("test set: key 'points' must be an array of {r, rdot}");
  }
  TestSetFile f;
  if (j.contains("method")) f.method = j.at("method").get<std::string>();
  const json& pts = j.at("points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const json& p = pts[i];
    if (!p.is_object() || !p.contains("r") || !p.contains("rdot") || !p.at("r").is_number() ||
        !p.at("rdot").is_number()) {
      throw ConfigError("test set: key 'points[" + std::to_string(i) + "]' needs numeric r and rdot");
    }
    f.test_set.points.push_back({p.at("r").get<double>(), p.at("rdot").get<double>()});
  }
  if (f.test_set.points.empty()) throw ConfigError("test set: key 'points' is empty");
  if (j.contains("weights")) {
    f.weights = j.at("weights").get<std::vector<double>>();
    if (f.weights.size() != f.test_set.size()) {
      throw ConfigError("test set: key 'weights' must have one entry per point");
    }
  }
  if (j.contains("seed")) f.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("objective")) f.objective = j.at("objective").get<double>();
  if (j.contains("config_hash")) f.config_hash = j.at("config_hash").get<std::string>();
  return f;
}

json to_json(const ObjectiveReport& r) {
  json out{{"per_vertex_estimate", r.per_vertex_estimate},
           {"per_vertex_truth", r.per_vertex_truth},
           {"per_vertex_gap", r.per_vertex_gap},
           {"worst_gap", r.worst_gap},
           {"penalty", r.penalty},
           {"w_m", confidence_to_json(r.w_m)},
           {"total_j", r.total_j}};
  out["estimation_error_e"] = std::isnan(r.estimation_error_e) ? json(nullptr) : json(r.estimation_error_e);
  return out;
}

}  // namespace fewshot
