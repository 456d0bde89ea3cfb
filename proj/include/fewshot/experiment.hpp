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
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fewshot/config.hpp"
#include "fewshot/cutin_sim.hpp"
#include "fewshot/scenario_space.hpp"

namespace fewshot {

/// Grid, exposure and simulated crash maps derived from a ProjectConfig.
struct World {
  ScenarioGrid grid;
  ExposurePmf pmf;
  SurrogateSet surrogates;
  CrashMap av_map;
  double av_mu = 0.0;  ///< full-grid oracle crash rate of the AV under test
};

World build_world(const ProjectConfig& cfg);

/// Oracle crash rate of a model: full crash map weighted by exposure.
double oracle_mu(const IdmParams& model, const ProjectConfig& cfg);

struct TrialRecord {
  Method method = Method::kNde;
  std::size_t n = 0;
  std::size_t trial = 0;
  double mu_hat = 0.0;
  double mu_true = 0.0;
  double abs_error = 0.0;
};

/// Independent, reproducible seed for one (method, n, trial) cell.
std::uint64_t trial_seed(std::uint64_t base_seed, Method method, std::size_t n, std::size_t trial);

TrialRecord run_trial(const World& world, const ProjectConfig& cfg, Method method, std::size_t n,
                      std::size_t trial);

using ProgressFn = std::function<void(const TrialRecord&)>;

/// Runs every (method, n, trial) combination. Records come back sorted by
/// (method, n, trial) whatever the execution order. Trials run on up to
/// `threads` workers (0 picks the hardware concurrency).
std::vector<TrialRecord> run_experiment(const ProjectConfig& cfg, const World& world,
                                        unsigned threads = 0, const ProgressFn& progress = {});

/// Header: method,n,trial,mu_hat,mu_true,abs_error. Values use 17 significant
/// digits, so abs_error recomputed from the printed columns is exact.
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);

/// Parses a trial CSV. Malformed rows raise ConfigError naming the line.
std::vector<TrialRecord> parse_trials_csv(std::istream& in);

struct SummaryRow {
  Method method = Method::kNde;
  std::size_t n = 0;
  double mean_abs_error = 0.0;
  double variance_mu_hat = 0.0;  ///< population variance across trials
  std::size_t trials = 0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

nlohmann::json summary_json(const std::vector<SummaryRow>& rows);

/// Methods as rows; average error (x1e-3) and variance (x1e-6) per n as columns.
std::string summary_table(const std::vector<SummaryRow>& rows);

}  // namespace fewshot
