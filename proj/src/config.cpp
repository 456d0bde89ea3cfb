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

#include "fewshot/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fewshot/error.hpp"
#include "fewshot/random.hpp"

namespace fewshot {

using nlohmann::json;

namespace {

double number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("key '" + where + "." + key + "': expected a number");
  return v.get<double>();
}

std::uint64_t unsigned_number(const json& obj, const char* key, const std::string& where,
                              std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ConfigError("key '" + where + "." + key + "': expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

const json& object(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_object()) throw ConfigError("key '" + where + "." + key + "': expected an object");
  return v;
}

Interval interval(const json& obj, const char* key, const std::string& where, Interval fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError("key '" + where + "." + key + "': expected [lo, hi]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<IdmParams> model_list(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError("key '" + where + "': expected an array of models");
  std::vector<IdmParams> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(idm_from_json(arr[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void parse_models(const json& models, ProjectConfig& cfg) {
  if (!models.is_object()) throw ConfigError("key 'models': expected an object or a file path");
  if (models.contains("surrogates")) cfg.surrogates = model_list(models.at("surrogates"), "models.surrogates");
  if (models.contains("av")) cfg.av = idm_from_json(models.at("av"), "models.av");
}

IdmParams make_model(std::string name, double T, double a_max, double b, double s0, double b_max) {
  IdmParams p;
  p.name = std::move(name);
  p.v0 = 33.3;
  p.T = T;
  p.a_max = a_max;
  p.b = b;
  p.s0 = s0;
  p.delta = 4.0;
  p.b_max = b_max;
  return p;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kNde: return "NDE";
    case Method::kUniform: return "UNIFORM";
    case Method::kFst: return "FST";
  }
  return "?";
}

Method parse_method(const std::string& tag) {
  std::string up = tag;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "NDE" || up == "CMC") return Method::kNde;
  if (up == "UNIFORM" || up == "RQMC") return Method::kUniform;
  if (up == "FST") return Method::kFst;
  throw ConfigError("unknown method '" + tag + "' (expected NDE, UNIFORM or FST)");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("experiment.trials must be >= 1");
  if (n_values.empty()) throw ConfigError("experiment.n_values must not be empty");
  for (std::size_t n : n_values) {
    if (n < 1) throw ConfigError("experiment.n_values entries must be >= 1");
  }
  if (methods.empty()) throw ConfigError("experiment.methods must not be empty");
}

const IdmParams& ProjectConfig::model(const std::string& name) const {
  for (const auto& m : surrogates) {
    if (m.name == name) return m;
  }
  if (av.name == name) return av;
  throw ConfigError("unknown model '" + name + "'");
}

ProjectConfig default_config() {
  ProjectConfig cfg;
  // Calibrated with fewshot_calibrate; see config/default.json.
  cfg.surrogates = {
      make_model("m1", 2.0, 0.8, 1.2, 3.0, 7.5),
      make_model("m2", 1.6, 1.0, 1.67, 2.5, 5.0),
      make_model("m3", 1.2, 1.5, 2.2, 2.0, 3.5),
      make_model("m4", 0.9, 2.0, 3.0, 1.0, 2.2),
  };
  cfg.av = make_model("av", 1.5, 1.2, 2.0, 2.0, 9.8);
  return cfg;
}

IdmParams idm_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("key '" + where + "': expected a model object");
  IdmParams p;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("key '" + where + ".name': expected a string");
    p.name = j.at("name").get<std::string>();
  }
  p.v0 = number(j, "v0", where, p.v0);
  p.T = number(j, "T", where, p.T);
  p.a_max = number(j, "a_max", where, p.a_max);
  p.b = number(j, "b", where, p.b);
  p.s0 = number(j, "s0", where, p.s0);
  p.delta = number(j, "delta", where, p.delta);
  p.b_max = number(j, "b_max", where, p.b_max);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + where + "': " + e.what());
  }
  return p;
}

json to_json(const IdmParams& p) {
  return json{{"name", p.name}, {"v0", p.v0}, {"T", p.T},         {"a_max", p.a_max},
              {"b", p.b},       {"s0", p.s0}, {"delta", p.delta}, {"b_max", p.b_max}};
}

json confidence_to_json(double w_m) {
  if (std::isinf(w_m)) return "inf";
  return w_m;
}

double confidence_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "inf" || s == "infinity") return kInfiniteConfidence;
  } else if (j.is_number() && j.get<double>() >= 0.0) {
    return j.get<double>();
  }
  throw ConfigError("key '" + where + "': expected a nonnegative number or \"inf\"");
}

ProjectConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration root must be an object");
  ProjectConfig cfg = default_config();

  if (doc.contains("grid")) {
    const json& g = object(doc, "grid", "");
    if (g.contains("bounds")) {
      const json& b = object(g, "bounds", "grid");
      cfg.bounds.r = interval(b, "r", "grid.bounds", cfg.bounds.r);
      cfg.bounds.r_dot = interval(b, "rdot", "grid.bounds", cfg.bounds.r_dot);
    }
    if (g.contains("steps")) {
      const json& s = object(g, "steps", "grid");
      cfg.steps.r = number(s, "r", "grid.steps", cfg.steps.r);
      cfg.steps.r_dot = number(s, "rdot", "grid.steps", cfg.steps.r_dot);
    }
  }

  if (doc.contains("exposure")) {
    const json& e = object(doc, "exposure", "");
    if (e.contains("mixture")) {
      const json& arr = e.at("mixture");
      if (!arr.is_array()) throw ConfigError("key 'exposure.mixture': expected an array");
      cfg.mixture.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = "exposure.mixture[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) throw ConfigError("key '" + where + "': expected an object");
        MixtureComponent c;
        c.weight = number(arr[i], "weight", where, c.weight);
        c.mean_r = number(arr[i], "mean_r", where, c.mean_r);
        c.mean_r_dot = number(arr[i], "mean_rdot", where, c.mean_r_dot);
        c.sd_r = number(arr[i], "sd_r", where, c.sd_r);
        c.sd_r_dot = number(arr[i], "sd_rdot", where, c.sd_r_dot);
        if (!(c.weight > 0.0)) throw ConfigError("key '" + where + ".weight': must be positive");
        if (!(c.sd_r > 0.0)) throw ConfigError("key '" + where + ".sd_r': must be positive");
        if (!(c.sd_r_dot > 0.0)) throw ConfigError("key '" + where + ".sd_rdot': must be positive");
        cfg.mixture.push_back(c);
      }
    }
  }

  if (doc.contains("sim")) {
    const json& s = object(doc, "sim", "");
    cfg.sim.dt = number(s, "dt", "sim", cfg.sim.dt);
    cfg.sim.horizon = number(s, "horizon", "sim", cfg.sim.horizon);
    cfg.sim.v_av0 = number(s, "v_av0", "sim", cfg.sim.v_av0);
    cfg.sim.d_th = number(s, "d_th", "sim", cfg.sim.d_th);
  }

  if (doc.contains("models")) {
    const json& m = doc.at("models");
    if (m.is_string()) {
      const std::filesystem::path file = base_dir / m.get<std::string>();
      const json models = read_json_file(file);
      try {
        parse_models(models, cfg);
      } catch (const ConfigError& e) {
        throw ConfigError(file.string() + ": " + e.what());
      }
    } else {
      parse_models(m, cfg);
    }
  }

  if (doc.contains("optimizer")) {
    const json& o = object(doc, "optimizer", "");
    auto& opt = cfg.optimizer;
    opt.restarts = unsigned_number(o, "restarts", "optimizer", opt.restarts);
    opt.max_iters = unsigned_number(o, "max_iters", "optimizer", opt.max_iters);
    opt.init_step = number(o, "init_step", "optimizer", opt.init_step);
    opt.min_step = number(o, "min_step", "optimizer", opt.min_step);
    opt.uniform_init_fraction = number(o, "uniform_init_fraction", "optimizer", opt.uniform_init_fraction);
    if (o.contains("w_m")) opt.w_m = confidence_from_json(o.at("w_m"), "optimizer.w_m");
  }

  if (doc.contains("experiment")) {
    const json& e = object(doc, "experiment", "");
    auto& ex = cfg.experiment;
    if (e.contains("n_values")) {
      const json& arr = e.at("n_values");
      if (!arr.is_array()) throw ConfigError("key 'experiment.n_values': expected an array");
      ex.n_values.clear();
      for (const auto& v : arr) {
        if (!v.is_number_unsigned()) {
          throw ConfigError("key 'experiment.n_values': expected positive integers");
        }
        ex.n_values.push_back(v.get<std::size_t>());
      }
    }
    ex.trials = unsigned_number(e, "trials", "experiment", ex.trials);
    ex.seed = unsigned_number(e, "seed", "experiment", ex.seed);
    if (e.contains("methods")) {
      const json& arr = e.at("methods");
      if (!arr.is_array()) throw ConfigError("key 'experiment.methods': expected an array");
      ex.methods.clear();
      for (const auto& v : arr) {
        if (!v.is_string()) throw ConfigError("key 'experiment.methods': expected strings");
        ex.methods.push_back(parse_method(v.get<std::string>()));
      }
    }
  }

  // Validate everything up front so bad files fail before any work starts.
  build_grid(cfg.bounds, cfg.steps);
  if (cfg.mixture.empty()) throw ConfigError("key 'exposure.mixture': must not be empty");
  cfg.sim.validate();
  if (cfg.surrogates.empty()) throw ConfigError("key 'models.surrogates': must not be empty");
  cfg.optimizer.validate();
  cfg.experiment.validate();
  return cfg;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_config(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ProjectConfig& cfg) {
  json mixture = json::array();
  for (const auto& c : cfg.mixture) {
    mixture.push_back({{"weight", c.weight},
                       {"mean_r", c.mean_r},
                       {"mean_rdot", c.mean_r_dot},
                       {"sd_r", c.sd_r},
                       {"sd_rdot", c.sd_r_dot}});
  }
  json surrogates = json::array();
  for (const auto& m : cfg.surrogates) surrogates.push_back(to_json(m));
  json methods = json::array();
  for (Method m : cfg.experiment.methods) methods.push_back(to_string(m));

  return json{
      {"grid",
       {{"bounds",
         {{"r", {cfg.bounds.r.lo, cfg.bounds.r.hi}}, {"rdot", {cfg.bounds.r_dot.lo, cfg.bounds.r_dot.hi}}}},
        {"steps", {{"r", cfg.steps.r}, {"rdot", cfg.steps.r_dot}}}}},
      {"exposure", {{"mixture", mixture}}},
      {"sim",
       {{"dt", cfg.sim.dt}, {"horizon", cfg.sim.horizon}, {"v_av0", cfg.sim.v_av0}, {"d_th", cfg.sim.d_th}}},
      {"models", {{"surrogates", surrogates}, {"av", to_json(cfg.av)}}},
      {"optimizer",
       {{"restarts", cfg.optimizer.restarts},
        {"max_iters", cfg.optimizer.max_iters},
        {"init_step", cfg.optimizer.init_step},
        {"min_step", cfg.optimizer.min_step},
        {"uniform_init_fraction", cfg.optimizer.uniform_init_fraction},
        {"w_m", confidence_to_json(cfg.optimizer.w_m)}}},
      {"experiment",
       {{"n_values", cfg.experiment.n_values},
        {"trials", cfg.experiment.trials},
        {"methods", methods},
        {"seed", cfg.experiment.seed}}},
  };
}

std::string config_hash(const ProjectConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
  return buf;
}

}  // namespace fewshot
