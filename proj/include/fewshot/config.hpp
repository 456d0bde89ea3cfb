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
#include <filesystem>
#include <string>
#include <vector>

#include "fewshot/cutin_sim.hpp"
#include "fewshot/optimizer.hpp"
#include "fewshot/scenario_space.hpp"
#include <json.hpp>

namespace fewshot {

enum class Method { kNde, kUniform, kFst };

std::string to_string(Method m);
/// Accepts "NDE", "UNIFORM", "FST" (case-insensitive).
Method parse_method(const std::string& tag);

struct ExperimentConfig {
  std::vector<std::size_t> n_values{5, 10, 20};
  std::size_t trials = 100;
  std::vector<Method> methods{Method::kNde, Method::kUniform, Method::kFst};
  std::uint64_t seed = 20240601;

  void validate() const;
};

/// Everything needed to rebuild the scenario space, the models and the
/// experiment. Mirrors the JSON layout of config/default.json.
struct ProjectConfig {
  GridBounds bounds{};
  GridSteps steps{};
  std::vector<MixtureComponent> mixture = default_mixture();
  SimConfig sim{};
  std::vector<IdmParams> surrogates;
  IdmParams av{};
  OptimizerConfig optimizer{};
  ExperimentConfig experiment{};

  /// Surrogate or AV model by name. Throws ConfigError if absent.
  const IdmParams& model(const std::string& name) const;
};

/// The shipped defaults (identical to config/default.json).
ProjectConfig default_config();

/// Parses a configuration document. Missing sections fall back to defaults;
/// a string under "models" is read as a model file relative to `base_dir`.
/// Errors name the offending key.
ProjectConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and parses a configuration file; errors carry the file path.
ProjectConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ProjectConfig& cfg);
nlohmann::json to_json(const IdmParams& p);
IdmParams idm_from_json(const nlohmann::json& j, const std::string& where);

/// FNV-1a hash of the canonical JSON dump, as a 16-digit hex string.
std::string config_hash(const ProjectConfig& cfg);

/// w_m as stored in JSON: a number, or the string "inf".
nlohmann::json confidence_to_json(double w_m);
double confidence_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace fewshot
