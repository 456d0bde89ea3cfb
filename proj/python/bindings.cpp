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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "fewshot/baselines.hpp"
#include "fewshot/config.hpp"
#include "fewshot/error.hpp"
#include "fewshot/experiment.hpp"
#include "fewshot/io.hpp"
#include "fewshot/optimizer.hpp"

namespace py = pybind11;
using namespace fewshot;

namespace {

using PointList = std::vector<std::pair<double, double>>;

TestSet to_test_set(const PointList& pts) {
  TestSet ts;
  for (const auto& [r, rd] : pts) ts.points.push_back({r, rd});
  return ts;
}

PointList to_points(const TestSet& ts) {
  PointList out;
  for (const auto& p : ts.points) out.emplace_back(p.r, p.r_dot);
  return out;
}

py::array_t<double> grid_array(const ScenarioGrid& grid, std::span<const double> values) {
  py::array_t<double> out({grid.r_dot_cells(), grid.r_cells()});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::dict report_dict(const ObjectiveReport& r) {
  py::dict d;
  d["per_vertex_estimate"] = r.per_vertex_estimate;
  d["per_vertex_truth"] = r.per_vertex_truth;
  d["per_vertex_gap"] = r.per_vertex_gap;
  d["worst_gap"] = r.worst_gap;
  d["penalty"] = r.penalty;
  d["w_m"] = r.w_m;
  d["total_j"] = r.total_j;
  return d;
}

py::dict record_dict(const TrialRecord& r) {
  py::dict d;
  d["method"] = to_string(r.method);
  d["n"] = r.n;
  d["trial"] = r.trial;
  d["mu_hat"] = r.mu_hat;
  d["mu_true"] = r.mu_true;
  d["abs_error"] = r.abs_error;
  return d;
}

// A configuration together with its simulated world.
class Project {
 public:
  explicit Project(const std::optional<std::string>& config_path)
      : cfg_(config_path ? load_config(*config_path) : default_config()), world_(build_world(cfg_)) {}

  std::string config_json() const { return to_json(cfg_).dump(2); }
  std::string config_hash() const { return fewshot::config_hash(cfg_); }
  std::vector<std::string> model_names() const {
    std::vector<std::string> out;
    for (const auto& m : cfg_.surrogates) out.push_back(m.name);
    out.push_back(cfg_.av.name);
    return out;
  }
  double oracle(const std::string& model) const { return oracle_mu(cfg_.model(model), cfg_); }
  double av_mu() const { return world_.av_mu; }

  py::array_t<double> crash_map(const std::string& model) const {
    const CrashMap map = compute_crash_map(cfg_.model(model), world_.grid, cfg_.sim);
    return grid_array(world_.grid, map.values());
  }
  py::array_t<double> exposure() const { return grid_array(world_.grid, world_.pmf.mass()); }

  py::dict synthesize(std::size_t n, std::uint64_t seed, double w_m, std::optional<std::size_t> restarts) const {
    OptimizerConfig oc = cfg_.optimizer;
    oc.n = n;
    oc.seed = seed;
    oc.w_m = w_m;
    if (restarts) oc.restarts = *restarts;
    SynthesisResult res;
    {
      py::gil_scoped_release release;
      res = fewshot::synthesize(oc, world_.surrogates, world_.pmf);
    }
    py::dict d = report_dict(res.report);
    d["points"] = to_points(res.test_set);
    d["best_restart"] = res.best_restart;
    return d;
  }

  py::dict objective(const PointList& pts, double w_m) const {
    return report_dict(fewshot::objective(to_test_set(pts), world_.surrogates, world_.pmf, w_m));
  }

  py::dict partition(const PointList& pts) const {
    const CoveragePartition part = fewshot::partition(to_test_set(pts), world_.pmf);
    py::array_t<std::size_t> owner({world_.grid.r_dot_cells(), world_.grid.r_cells()});
    std::copy(part.owner.begin(), part.owner.end(), owner.mutable_data());
    py::dict d;
    d["owner"] = owner;
    d["weights"] = part.weights;
    return d;
  }

  py::dict evaluate(const PointList& pts, const std::optional<std::vector<double>>& weights,
                    const std::string& model) const {
    const TestSet ts = to_test_set(pts);
    const CrashMap map = model == cfg_.av.name ? world_.av_map
                                               : compute_crash_map(cfg_.model(model), world_.grid, cfg_.sim);
    const AvEvaluation ev = weights ? evaluate_weighted(ts, *weights, map, world_.pmf)
                                    : evaluate_av(ts, map, world_.pmf);
    py::dict d;
    d["mu_hat"] = ev.mu_hat;
    d["mu_true"] = ev.mu_true;
    d["abs_error"] = ev.realized_error;
    return d;
  }

  py::dict baseline(const std::string& method, std::size_t n, std::uint64_t seed) const {
    const Method m = parse_method(method);
    if (m == Method::kFst) throw ConfigError("baseline method must be NDE or UNIFORM");
    const BaselineDraw draw = m == Method::kNde ? cmc_sample(n, world_.pmf, seed) : rqmc_sample(n, world_.pmf, seed);
    py::dict d;
    d["method"] = to_string(m);
    d["points"] = to_points(draw.test_set);
    d["weights"] = draw.weights;
    return d;
  }

  py::list run_experiment(std::optional<std::size_t> trials, std::optional<std::vector<std::size_t>> n_values,
                          std::optional<std::vector<std::string>> methods, std::optional<std::uint64_t> seed,
                          unsigned threads) const {
    ProjectConfig cfg = cfg_;
    if (trials) cfg.experiment.trials = *trials;
    if (n_values) cfg.experiment.n_values = *n_values;
    if (methods) {
      cfg.experiment.methods.clear();
      for (const auto& m : *methods) cfg.experiment.methods.push_back(parse_method(m));
    }
    if (seed) cfg.experiment.seed = *seed;
    cfg.experiment.validate();
    std::vector<TrialRecord> records;
    {
      py::gil_scoped_release release;
      records = fewshot::run_experiment(cfg, world_, threads);
    }
    py::list out;
    for (const auto& r : records) out.append(record_dict(r));
    return out;
  }

 private:
  ProjectConfig cfg_;
  World world_;
};

std::vector<TrialRecord> records_from(const py::list& rows) {
  std::vector<TrialRecord> out;
  for (const auto& item : rows) {
    const auto row = item.cast<py::dict>();
    TrialRecord r;
    r.method = parse_method(row["method"].cast<std::string>());
    r.n = row["n"].cast<std::size_t>();
    r.trial = row["trial"].cast<std::size_t>();
    r.mu_hat = row["mu_hat"].cast<double>();
    r.mu_true = row["mu_true"].cast<double>();
    r.abs_error = row["abs_error"].cast<double>();
    out.push_back(r);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Few-shot test-scenario selection for cut-in crash-rate evaluation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

  m.attr("INF") = kInfiniteConfidence;

  py::class_<Project>(m, "Project")
      .def(py::init<const std::optional<std::string>&>(), py::arg("config_path") = py::none())
      .def_property_readonly("config_json", &Project::config_json)
      .def_property_readonly("config_hash", &Project::config_hash)
      .def_property_readonly("model_names", &Project::model_names)
      .def_property_readonly("av_mu", &Project::av_mu)
      .def("oracle", &Project::oracle, py::arg("model"))
      .def("crash_map", &Project::crash_map, py::arg("model"),
           "Crash map as an (r_dot cells, r cells) array.")
      .def("exposure", &Project::exposure, "Exposure pmf as an (r_dot cells, r cells) array.")
      .def("synthesize", &Project::synthesize, py::arg("n"), py::arg("seed") = 0, py::arg("w_m") = 1.0,
           py::arg("restarts") = py::none())
      .def("objective", &Project::objective, py::arg("points"), py::arg("w_m") = 1.0)
      .def("partition", &Project::partition, py::arg("points"))
      .def("evaluate", &Project::evaluate, py::arg("points"), py::arg("weights") = py::none(),
           py::arg("model") = "av")
      .def("baseline", &Project::baseline, py::arg("method"), py::arg("n"), py::arg("seed") = 0)
      .def("run_experiment", &Project::run_experiment, py::arg("trials") = py::none(),
           py::arg("n_values") = py::none(), py::arg("methods") = py::none(), py::arg("seed") = py::none(),
           py::arg("threads") = 0);

  m.def(
      "idm_acceleration",
      [](double v, double v_lead, double gap, double v0, double T, double a_max, double b, double s0, double delta,
         double b_max) {
        IdmParams p;
        p.v0 = v0;
        p.T = T;
        p.a_max = a_max;
        p.b = b;
        p.s0 = s0;
        p.delta = delta;
        p.b_max = b_max;
        return fewshot::idm_acceleration(v, v_lead, gap, p);
      },
      py::arg("v"), py::arg("v_lead"), py::arg("gap"), py::arg("v0") = 33.3, py::arg("T") = 1.6,
      py::arg("a_max") = 0.73, py::arg("b") = 1.67, py::arg("s0") = 2.0, py::arg("delta") = 4.0,
      py::arg("b_max") = kMaxBraking);

  m.def(
      "halton_2d",
      [](std::size_t n) {
        PointList out;
        for (const auto& p : fewshot::halton_2d(n)) out.emplace_back(p.u, p.v);
        return out;
      },
      py::arg("n"));

  m.def(
      "summarize",
      [](const py::list& records) {
        py::list out;
        for (const auto& r : fewshot::summarize(records_from(records))) {
          py::dict d;
          d["method"] = to_string(r.method);
          d["n"] = r.n;
          d["mean_abs_error"] = r.mean_abs_error;
          d["variance_mu_hat"] = r.variance_mu_hat;
          d["trials"] = r.trials;
          out.append(d);
        }
        return out;
      },
      py::arg("records"));

  m.def(
      "trials_csv",
      [](const py::list& records) {
        std::ostringstream os;
        write_trials_csv(os, records_from(records));
        return os.str();
      },
      py::arg("records"));
}
