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

#include "fewshot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "fewshot/baselines.hpp"
#include "fewshot/error.hpp"
#include "fewshot/io.hpp"
#include "fewshot/optimizer.hpp"
#include "fewshot/random.hpp"

namespace fewshot {

namespace {

SurrogateSet build_surrogates(const ProjectConfig& cfg, const ScenarioGrid& grid) {
  std::vector<CrashMap> maps;
  maps.reserve(cfg.surrogates.size());
  for (const auto& m : cfg.surrogates) maps.push_back(compute_crash_map(m, grid, cfg.sim));
  return SurrogateSet(std::move(maps));
}

struct Job {
  Method method;
  std::size_t n;
  std::size_t trial;
};

}  // namespace

World build_world(const ProjectConfig& cfg) {
  ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
  ExposurePmf pmf = build_exposure(grid, cfg.mixture);
  SurrogateSet set = build_surrogates(cfg, grid);
  CrashMap av = compute_crash_map(cfg.av, grid, cfg.sim);
  const double mu = crash_rate(av, pmf);
  return World{std::move(grid), std::move(pmf), std::move(set), std::move(av), mu};
}

double oracle_mu(const IdmParams& model, const ProjectConfig& cfg) {
  const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
  const ExposurePmf pmf = build_exposure(grid, cfg.mixture);
  return crash_rate(compute_crash_map(model, grid, cfg.sim), pmf);
}

std::uint64_t trial_seed(std::uint64_t base_seed, Method method, std::size_t n, std::size_t trial) {
  std::uint64_t s = combine_seed(base_seed, fnv1a64(to_string(method)));
  s = combine_seed(s, n);
  return combine_seed(s, trial);
}

TrialRecord run_trial(const World& world, const ProjectConfig& cfg, Method method, std::size_t n,
                      std::size_t trial) {
  const std::uint64_t seed = trial_seed(cfg.experiment.seed, method, n, trial);
  TrialRecord rec{method, n, trial, 0.0, world.av_mu, 0.0};
  switch (method) {
    case Method::kNde: rec.mu_hat = cmc_sample(n, world.pmf, seed).estimate(world.av_map); break;
    case Method::kUniform: rec.mu_hat = rqmc_sample(n, world.pmf, seed).estimate(world.av_map); break;
    case Method::kFst: {
      OptimizerConfig oc = cfg.optimizer;
      oc.n = n;
      oc.seed = seed;
      const SynthesisResult res = synthesize(oc, world.surrogates, world.pmf);
      rec.mu_hat = evaluate_av(res.test_set, world.av_map, world.pmf).mu_hat;
      break;
    }
  }
  rec.abs_error = std::abs(rec.mu_hat - rec.mu_true);
  return rec;
}

std::vector<TrialRecord> run_experiment(const ProjectConfig& cfg, const World& world, unsigned threads,
                                        const ProgressFn& progress) {
  cfg.experiment.validate();
  std::vector<Job> jobs;
  for (Method m : cfg.experiment.methods) {
    for (std::size_t n : cfg.experiment.n_values) {
      for (std::size_t t = 0; t < cfg.experiment.trials; ++t) jobs.push_back({m, n, t});
    }
  }

  std::vector<TrialRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  std::string failed_trial;

  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& job = jobs[k];
      try {
        records[k] = run_trial(world, cfg, job.method, job.n, job.trial);
        if (progress) {
          std::lock_guard lock(mu);
          progress(records[k]);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) {
          failure = std::current_exception();
          failed_trial = to_string(job.method) + " n=" + std::to_string(job.n) +
                         " trial=" + std::to_string(job.trial);
        }
        next = jobs.size();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      throw RuntimeFailure("trial " + failed_trial + " failed: " + e.what());
    }
  }

  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.n != b.n) return a.n < b.n;
    return a.trial < b.trial;
  });
  return records;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "method,n,trial,mu_hat,mu_true,abs_error\n";
  for (const auto& r : records) {
    out << to_string(r.method) << ',' << r.n << ',' << r.trial << ',' << format_double(r.mu_hat, 17) << ','
        << format_double(r.mu_true, 17) << ',' << format_double(r.abs_error, 17) << '\n';
  }
}

std::vector<TrialRecord> parse_trials_csv(std::istream& in) {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "method,n,trial,mu_hat,mu_true,abs_error") {
        throw ConfigError("line " + std::to_string(line_no) + ": unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    const auto fail = [&](const std::string& why) {
      return ConfigError("line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 6) throw fail("expected 6 fields, got " + std::to_string(fields.size()));

    TrialRecord r;
    try {
      r.method = parse_method(fields[0]);
      std::size_t pos = 0;
      r.n = std::stoul(fields[1], &pos);
      if (pos != fields[1].size()) throw fail("bad n '" + fields[1] + "'");
      r.trial = std::stoul(fields[2], &pos);
      if (pos != fields[2].size()) throw fail("bad trial '" + fields[2] + "'");
      double* dst[3] = {&r.mu_hat, &r.mu_true, &r.abs_error};
      for (int k = 0; k < 3; ++k) {
        *dst[k] = std::stod(fields[3 + k], &pos);
        if (pos != fields[3 + k].size() || !std::isfinite(*dst[k])) {
          throw fail("bad number '" + fields[3 + k] + "'");
        }
      }
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      throw fail(e.what());
    } catch (const std::exception&) {
      throw fail("malformed row '" + line + "'");
    }
    if (std::abs(r.abs_error - std::abs(r.mu_hat - r.mu_true)) > 1e-12) {
      throw fail("abs_error does not equal |mu_hat - mu_true|");
    }
    out.push_back(r);
  }
  if (!header_seen) throw ConfigError("line 1: missing header");
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::pair<Method, std::size_t>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) groups[{r.method, r.n}].push_back(&r);

  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    const double count = static_cast<double>(group.size());
    double err = 0.0;
    double mean = 0.0;
    for (const auto* r : group) {
      err += r->abs_error;
      mean += r->mu_hat;
    }
    mean /= count;
    double var = 0.0;
    for (const auto* r : group) var += (r->mu_hat - mean) * (r->mu_hat - mean);
    rows.push_back({key.first, key.second, err / count, var / count, group.size()});
  }
  return rows;
}

nlohmann::json summary_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"method", to_string(r.method)},
                   {"n", r.n},
                   {"mean_abs_error", r.mean_abs_error},
                   {"variance_mu_hat", r.variance_mu_hat},
                   {"trials", r.trials}});
  }
  return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::vector<std::size_t> ns;
  std::vector<Method> methods;
  for (const auto& r : rows) {
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  std::sort(ns.begin(), ns.end());

  const auto cell = [&](Method m, std::size_t n) -> const SummaryRow* {
    for (const auto& r : rows) {
      if (r.method == m && r.n == n) return &r;
    }
    return nullptr;
  };

  std::ostringstream os;
  char buf[64];
  os << "Method   | Average error (x1e-3)";
  os << std::string(ns.size() * 10 > 22 ? ns.size() * 10 - 22 : 0, ' ') << " | Variance (x1e-6)\n";
  os << "         |";
  for (std::size_t n : ns) {
    std::snprintf(buf, sizeof buf, " %9s", ("n=" + std::to_string(n)).c_str());
    os << buf;
  }
  os << " |";
  for (std::size_t n : ns) {
    std::snprintf(buf, sizeof buf, " %9s", ("n=" + std::to_string(n)).c_str());
    os << buf;
  }
  os << '\n';
  for (Method m : methods) {
    std::snprintf(buf, sizeof buf, "%-8s |", to_string(m).c_str());
    os << buf;
    for (std::size_t n : ns) {
      const SummaryRow* r = cell(m, n);
      if (r) std::snprintf(buf, sizeof buf, " %9.4g", r->mean_abs_error * 1e3);
      else std::snprintf(buf, sizeof buf, " %9s", "-");
      os << buf;
    }
    os << " |";
    for (std::size_t n : ns) {
      const SummaryRow* r = cell(m, n);
      if (r) std::snprintf(buf, sizeof buf, " %9.4g", r->variance_mu_hat * 1e6);
      else std::snprintf(buf, sizeof buf, " %9s", "-");
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace fewshot
