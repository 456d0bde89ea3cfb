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

// Command-line front end: crash maps, oracle crash rates, test-set synthesis,
// evaluation, sampling baselines and the repeated-trial experiment.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "fewshot/baselines.hpp"
#include "fewshot/config.hpp"
#include "fewshot/error.hpp"
#include "fewshot/experiment.hpp"
#include "fewshot/io.hpp"
#include "fewshot/optimizer.hpp"

namespace {

using namespace fewshot;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ProjectConfig load(const GlobalOptions& g) {
  return g.config_path.empty() ? default_config() : load_config(g.config_path);
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write " + out_path);
  f << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write " + path);
  f << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

double parse_confidence(const std::string& text) {
  if (text == "inf" || text == "INF" || text == "infinity") return kInfiniteConfidence;
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size() && v >= 0.0) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--w-m expects a nonnegative number or 'inf', got '" + text + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot scenario selection for crash-rate evaluation of a vehicle model"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config_path, "Configuration JSON (defaults when omitted)");
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for synthesis, baselines or the experiment");
  app.add_option("--out", g.out, "Output path (stdout when omitted)");
  app.fallthrough();

  // crashmap
  std::string model_name = "av";
  auto* crashmap = app.add_subcommand("crashmap", "Export the binary crash map of a model as CSV");
  crashmap->add_option("--model", model_name, "Model name (surrogate or av)");

  // oracle
  std::string oracle_model;
  auto* oracle = app.add_subcommand("oracle", "Full-grid crash rate of one or all models");
  oracle->add_option("--model", oracle_model, "Model name; all models when omitted");

  // synth
  std::size_t synth_n = 10;
  std::string w_m_text;
  std::string trace_path, report_path, partition_path;
  std::size_t restarts = 0;
  auto* synth = app.add_subcommand("synth", "Synthesize a few-shot test set");
  synth->add_option("--n", synth_n, "Number of test scenarios")->check(CLI::PositiveNumber);
  synth->add_option("--w-m", w_m_text, "Confidence weight on the surrogate bound (number or 'inf')");
  synth->add_option("--restarts", restarts, "Override optimizer.restarts");
  synth->add_option("--trace", trace_path, "Write per-iteration CSV");
  synth->add_option("--report", report_path, "Write the objective report JSON");
  synth->add_option("--partition", partition_path, "Write the coverage partition CSV");

  // eval
  std::string testset_path;
  std::string eval_model = "av";
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a fixed test set");
  eval->add_option("--testset", testset_path, "Test set JSON")->required();
  eval->add_option("--model", eval_model, "Model name (surrogate or av)");

  // baseline
  std::string method_text = "NDE";
  std::size_t baseline_n = 10;
  auto* baseline = app.add_subcommand("baseline", "Draw a sampling-baseline test set");
  baseline->add_option("--method", method_text, "NDE (crude Monte Carlo) or UNIFORM (randomized QMC)");
  baseline->add_option("--n", baseline_n, "Number of test scenarios")->check(CLI::PositiveNumber);

  // experiment
  std::size_t trials = 0;
  std::vector<std::size_t> n_values;
  std::vector<std::string> methods;
  std::string summary_path;
  unsigned threads = 0;
  auto* experiment = app.add_subcommand("experiment", "Repeated-trial comparison of FST and the baselines");
  experiment->add_option("--trials", trials, "Override experiment.trials");
  experiment->add_option("--n", n_values, "Override experiment.n_values");
  experiment->add_option("--methods", methods, "Override experiment.methods");
  experiment->add_option("--summary", summary_path, "Write the summary JSON");
  experiment->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  bool quiet = false;
  experiment->add_flag("--quiet", quiet, "Suppress progress output");

  // report
  std::string trials_path;
  auto* report = app.add_subcommand("report", "Summarize a trial CSV");
  report->add_option("--in", trials_path, "Trial CSV from `experiment`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (crashmap->parsed()) {
      const ProjectConfig cfg = load(g);
      const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
      std::ostringstream os;
      write_crash_map_csv(os, compute_crash_map(cfg.model(model_name), grid, cfg.sim));
      emit(g.out, os.str());
    } else if (oracle->parsed()) {
      const ProjectConfig cfg = load(g);
      std::vector<IdmParams> models;
      if (oracle_model.empty()) {
        models = cfg.surrogates;
        models.push_back(cfg.av);
      } else {
        models.push_back(cfg.model(oracle_model));
      }
      json out = json::array();
      for (const auto& m : models) {
        const double mu = oracle_mu(m, cfg);
        std::fprintf(stderr, "%-8s mu = %.6e\n", m.name.c_str(), mu);
        out.push_back({{"model", m.name}, {"mu", mu}});
      }
      emit(g.out, out.dump(2) + "\n");
    } else if (synth->parsed()) {
      const ProjectConfig cfg = load(g);
      const World world = build_world(cfg);
      OptimizerConfig oc = cfg.optimizer;
      oc.n = synth_n;
      oc.seed = g.seed.value_or(cfg.experiment.seed);
      if (!w_m_text.empty()) oc.w_m = parse_confidence(w_m_text);
      if (restarts > 0) oc.restarts = restarts;
      const SynthesisResult res = synthesize(oc, world.surrogates, world.pmf, !trace_path.empty());

      TestSetFile file;
      file.method = "FST";
      file.test_set = res.test_set;
      file.seed = oc.seed;
      file.objective = res.report.total_j;
      file.config_hash = config_hash(cfg);
      emit(g.out, to_json(file).dump(2) + "\n");
      if (!report_path.empty()) write_file(report_path, to_json(res.report).dump(2) + "\n");
      if (!trace_path.empty()) {
        std::ostringstream os;
        write_trace_csv(os, res.trace);
        write_file(trace_path, os.str());
      }
      if (!partition_path.empty()) {
        std::ostringstream os;
        write_partition_csv(os, world.grid, partition(res.test_set, world.pmf));
        write_file(partition_path, os.str());
      }
      std::fprintf(stderr, "J = %.6e  worst_gap = %.6e  penalty = %.6e  (restart %zu)\n",
                   res.report.total_j, res.report.worst_gap, res.report.penalty, res.best_restart);
    } else if (eval->parsed()) {
      const ProjectConfig cfg = load(g);
      const TestSetFile file = test_set_from_json(read_json(testset_path));
      const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
      const ExposurePmf pmf = build_exposure(grid, cfg.mixture);
      for (const auto& p : file.test_set.points) {
        if (!grid.contains(p)) throw ConfigError(testset_path + ": test point outside the scenario box");
      }
      const CrashMap map = compute_crash_map(cfg.model(eval_model), grid, cfg.sim);
      const AvEvaluation ev = file.weights.empty()
                                  ? evaluate_av(file.test_set, map, pmf)
                                  : evaluate_weighted(file.test_set, file.weights, map, pmf);
      const json out{{"method", file.method},
                     {"model", eval_model},
                     {"n", file.test_set.size()},
                     {"mu_hat", ev.mu_hat},
                     {"mu_true", ev.mu_true},
                     {"abs_error", ev.realized_error}};
      emit(g.out, out.dump(2) + "\n");
    } else if (baseline->parsed()) {
      const ProjectConfig cfg = load(g);
      const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
      const ExposurePmf pmf = build_exposure(grid, cfg.mixture);
      const Method m = parse_method(method_text);
      if (m == Method::kFst) throw ConfigError("--method must be NDE or UNIFORM; use `synth` for FST");
      const std::uint64_t seed = g.seed.value_or(cfg.experiment.seed);
      const BaselineDraw draw = m == Method::kNde ? cmc_sample(baseline_n, pmf, seed)
                                                  : rqmc_sample(baseline_n, pmf, seed);
      TestSetFile file;
      file.method = to_string(m);
      file.test_set = draw.test_set;
      file.weights = draw.weights;
      file.seed = seed;
      file.config_hash = config_hash(cfg);
      emit(g.out, to_json(file).dump(2) + "\n");
    } else if (experiment->parsed()) {
      ProjectConfig cfg = load(g);
      if (g.seed) cfg.experiment.seed = *g.seed;
      if (trials > 0) cfg.experiment.trials = trials;
      if (!n_values.empty()) cfg.experiment.n_values = n_values;
      if (!methods.empty()) {
        cfg.experiment.methods.clear();
        for (const auto& m : methods) cfg.experiment.methods.push_back(parse_method(m));
      }
      cfg.experiment.validate();
      const World world = build_world(cfg);
      std::size_t done = 0;
      const std::size_t total =
          cfg.experiment.methods.size() * cfg.experiment.n_values.size() * cfg.experiment.trials;
      const auto records = run_experiment(cfg, world, threads, [&](const TrialRecord&) {
        ++done;
        if (!quiet && (done % 50 == 0 || done == total)) {
          std::fprintf(stderr, "\r%zu/%zu trials", done, total);
          if (done == total) std::fputc('\n', stderr);
        }
      });
      std::ostringstream os;
      write_trials_csv(os, records);
      emit(g.out, os.str());
      const auto rows = summarize(records);
      if (!summary_path.empty()) write_file(summary_path, summary_json(rows).dump(2) + "\n");
      std::fprintf(stderr, "AV oracle mu = %.6e\n%s", world.av_mu, summary_table(rows).c_str());
    } else if (report->parsed()) {
      std::ifstream in(trials_path);
      if (!in) throw ConfigError(trials_path + ": cannot open file");
      std::vector<TrialRecord> records;
      try {
        records = parse_trials_csv(in);
      } catch (const ConfigError& e) {
        throw ConfigError(trials_path + ": " + e.what());
      }
      const auto rows = summarize(records);
      std::cout << summary_table(rows);
      if (!g.out.empty()) write_file(g.out, summary_json(rows).dump(2) + "\n");
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
