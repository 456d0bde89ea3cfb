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

// Sweeps IDM parameters over the configured scenario space and prints the
// oracle crash rate of every combination as CSV, for picking model presets.

#include <CLI11.hpp>

#include <cstdio>
#include <vector>

#include "fewshot/config.hpp"
#include "fewshot/error.hpp"

int main(int argc, char** argv) {
  using namespace fewshot;
  CLI::App app{"IDM crash-rate calibration sweep"};
  std::string config_path;
  std::vector<double> T{0.9, 1.2, 1.6, 2.0};
  std::vector<double> a_max{0.8, 1.5};
  std::vector<double> b{1.2, 3.0};
  std::vector<double> s0{1.0, 3.0};
  std::vector<double> b_max{2.2, 3.5, 5.0, 7.5, 9.8};
  app.add_option("--config", config_path, "Configuration JSON (defaults when omitted)");
  app.add_option("--T", T, "Time headway values [s]");
  app.add_option("--a-max", a_max, "Maximum acceleration values [m/s^2]");
  app.add_option("--b", b, "Comfortable deceleration values [m/s^2]");
  app.add_option("--s0", s0, "Jam distance values [m]");
  app.add_option("--b-max", b_max, "Braking capability values [m/s^2]");
  CLI11_PARSE(app, argc, argv);

  try {
    const ProjectConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    const ScenarioGrid grid = build_grid(cfg.bounds, cfg.steps);
    const ExposurePmf pmf = build_exposure(grid, cfg.mixture);
    std::printf("T,a_max,b,s0,b_max,crash_rate,crash_cells\n");
    for (double bm : b_max)
      for (double t : T)
        for (double a : a_max)
          for (double bb : b)
            for (double s : s0) {
              IdmParams p;
              p.name = "sweep";
              p.T = t;
              p.a_max = a;
              p.b = bb;
              p.s0 = s;
              p.b_max = bm;
              p.validate();
              const CrashMap map = compute_crash_map(p, grid, cfg.sim);
              std::size_t cells = 0;
              for (std::size_t k = 0; k < map.size(); ++k) cells += map[k] > 0.5 ? 1 : 0;
              std::printf("%g,%g,%g,%g,%g,%.6e,%zu\n", t, a, bb, s, bm, crash_rate(map, pmf), cells);
            }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
