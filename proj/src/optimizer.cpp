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

#include "fewshot/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fewshot/error.hpp"
#include "fewshot/random.hpp"

namespace fewshot {

double combine_objective(double worst_gap, double penalty, double w_m) {
  if (std::isinf(w_m)) return worst_gap;
  return w_m * worst_gap + penalty;
}

ObjectiveReport objective(const TestSet& ts, const SurrogateSet& set, const ExposurePmf& pmf,
                          double w_m) {
  if (!(w_m >= 0.0)) throw ConfigError("confidence weight w_m must be nonnegative");
  const CoveragePartition part = partition(ts, pmf);

  ObjectiveReport rep;
  rep.w_m = w_m;
  std::vector<double> worst_f(ts.size(), 0.0);
  for (const CrashMap& vertex : set.vertices()) {
    const double est = estimate_mu(part, responses_at(ts, vertex));
    const double truth = crash_rate(vertex, pmf);
    rep.per_vertex_estimate.push_back(est);
    rep.per_vertex_truth.push_back(truth);
    rep.per_vertex_gap.push_back(std::abs(est - truth));
    rep.worst_gap = std::max(rep.worst_gap, rep.per_vertex_gap.back());

    const std::vector<double> f = fluctuation(ts, part, vertex, pmf);
    for (std::size_t i = 0; i < f.size(); ++i) worst_f[i] = std::max(worst_f[i], f[i]);
  }
  for (std::size_t i = 0; i < worst_f.size(); ++i) rep.penalty += worst_f[i] * part.weights[i];
  rep.total_j = combine_objective(rep.worst_gap, rep.penalty, w_m);
  return rep;
}

void OptimizerConfig::validate() const {
  if (n < 1) throw ConfigError("optimizer.n must be >= 1");
  if (restarts < 1) throw ConfigError("optimizer.restarts must be >= 1");
  if (max_iters < 1) throw ConfigError("optimizer.max_iters must be >= 1");
  if (!(min_step > 0.0) || !(init_step > min_step)) {
    throw ConfigError("optimizer steps must satisfy init_step > min_step > 0");
  }
  if (!(w_m >= 0.0)) throw ConfigError("optimizer.w_m must be nonnegative");
  if (!(uniform_init_fraction >= 0.0 && uniform_init_fraction <= 1.0)) {
    throw ConfigError("optimizer.uniform_init_fraction must lie in [0, 1]");
  }
}

namespace {

// Objective evaluator that keeps the current cell ownership and per-owner
// sums, so a single-point move only revisits the cells of owners whose
// coverage changed. Each owner's sums are always accumulated over its cells in
// increasing cell order, exactly as objective() does, so both agree bit for bit.
class IncrementalObjective {
 public:
  IncrementalObjective(const SurrogateSet& set, const ExposurePmf& pmf, double w_m)
      : grid_(pmf.grid()),
        cells_(grid_.size()),
        vertices_(set.size()),
        w_m_(w_m),
        cap_(similarity_cap(grid_)),
        mass_(pmf.mass().begin(), pmf.mass().end()) {
    cu_.resize(cells_);
    cv_.resize(cells_);
    for (std::size_t c = 0; c < cells_; ++c) {
      const UnitPoint x = normalize(grid_.center(c), grid_);
      cu_[c] = x.u;
      cv_[c] = x.v;
    }
    maps_.resize(vertices_ * cells_);
    for (std::size_t k = 0; k < vertices_; ++k) {
      const auto vals = set.vertices()[k].values();
      std::copy(vals.begin(), vals.end(), maps_.begin() + static_cast<std::ptrdiff_t>(k * cells_));
      truth_.push_back(crash_rate(set.vertices()[k], pmf));
    }
    owner_.resize(cells_);
    d2_.resize(cells_);
    next_owner_.resize(cells_);
    next_d2_.resize(cells_);
  }

  const ObjectiveReport& reset(const TestSet& ts) {
    points_ = ts.points;
    n_ = points_.size();
    pu_.resize(n_);
    pv_.resize(n_);
    cell_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) set_point(j, points_[j]);
    for (std::size_t c = 0; c < cells_; ++c) nearest(c, owner_[c], d2_[c]);

    sums_.resize(n_);
    next_sums_.resize(n_);
    for (auto& s : sums_) s.num.resize(vertices_);
    for (auto& s : next_sums_) s.num.resize(vertices_);
    affected_.assign(n_, 1);
    accumulate(owner_, d2_, sums_);
    report_ = finish(sums_);
    return report_;
  }

  /// Objective with point i moved to `cand`; the state is unchanged until accept().
  const ObjectiveReport& try_move(std::size_t i, const Scenario& cand) {
    pending_ = i;
    pending_point_ = cand;
    const double saved_u = pu_[i];
    const double saved_v = pv_[i];
    const std::size_t saved_cell = cell_[i];
    set_point(i, cand);

    affected_.assign(n_, 0);
    affected_[i] = 1;
    const double iu = pu_[i];
    const double iv = pv_[i];
    for (std::size_t c = 0; c < cells_; ++c) {
      const std::size_t o = owner_[c];
      if (o == i) {
        nearest(c, next_owner_[c], next_d2_[c]);
        affected_[next_owner_[c]] = 1;
        continue;
      }
      const double d2 = dist2(c, iu, iv);
      if (d2 < d2_[c] || (d2 == d2_[c] && i < o)) {
        next_owner_[c] = i;
        next_d2_[c] = d2;
        affected_[o] = 1;
      } else {
        next_owner_[c] = o;
        next_d2_[c] = d2_[c];
      }
    }

    for (std::size_t j = 0; j < n_; ++j) {
      if (!affected_[j]) next_sums_[j] = sums_[j];
    }
    accumulate(next_owner_, next_d2_, next_sums_);
    candidate_ = finish(next_sums_);

    pu_[i] = saved_u;
    pv_[i] = saved_v;
    cell_[i] = saved_cell;
    return candidate_;
  }

  void accept() {
    set_point(pending_, pending_point_);
    points_[pending_] = pending_point_;
    owner_.swap(next_owner_);
    d2_.swap(next_d2_);
    sums_.swap(next_sums_);
    report_ = candidate_;
  }

  const ObjectiveReport& current() const { return report_; }
  const std::vector<Scenario>& points() const { return points_; }

 private:
  struct OwnerSums {
    double weight = 0.0;
    double den = 0.0;
    std::vector<double> num;  // per vertex
  };

  double dist2(std::size_t c, double u, double v) const {
    const double du = cu_[c] - u;
    const double dv = cv_[c] - v;
    return du * du + dv * dv;
  }

  void nearest(std::size_t c, std::size_t& best, double& best_d2) const {
    best = 0;
    best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n_; ++j) {
      const double d2 = dist2(c, pu_[j], pv_[j]);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
  }

  void set_point(std::size_t j, const Scenario& s) {
    const UnitPoint p = normalize(s, grid_);
    pu_[j] = p.u;
    pv_[j] = p.v;
    cell_[j] = grid_.cell_of(s);
  }

  double at_point(std::size_t k, std::size_t j) const { return maps_[k * cells_ + cell_[j]]; }

  // Recomputes the sums of every owner flagged in affected_.
  void accumulate(const std::vector<std::size_t>& owner, const std::vector<double>& d2,
                  std::vector<OwnerSums>& sums) const {
    for (std::size_t j = 0; j < n_; ++j) {
      if (!affected_[j]) continue;
      sums[j].weight = 0.0;
      sums[j].den = 0.0;
      std::fill(sums[j].num.begin(), sums[j].num.end(), 0.0);
    }
    for (std::size_t c = 0; c < cells_; ++c) {
      const std::size_t o = owner[c];
      if (!affected_[o]) continue;
      OwnerSums& s = sums[o];
      const double p = mass_[c];
      s.weight += p;
      const double d = std::sqrt(d2[c]);
      const double sim = d > 0.0 ? std::min(1.0 / d, cap_) : cap_;
      const double ps = p * sim;
      s.den += ps;
      for (std::size_t k = 0; k < vertices_; ++k) {
        s.num[k] += (maps_[k * cells_ + c] - at_point(k, o)) * ps;
      }
    }
  }

  ObjectiveReport finish(const std::vector<OwnerSums>& sums) {
    ObjectiveReport rep;
    rep.w_m = w_m_;
    worst_f_.assign(n_, 0.0);
    for (std::size_t k = 0; k < vertices_; ++k) {
      double est = 0.0;
      for (std::size_t j = 0; j < n_; ++j) est += at_point(k, j) * sums[j].weight;
      est = std::clamp(est, 0.0, 1.0);
      rep.per_vertex_estimate.push_back(est);
      rep.per_vertex_truth.push_back(truth_[k]);
      rep.per_vertex_gap.push_back(std::abs(est - truth_[k]));
      rep.worst_gap = std::max(rep.worst_gap, rep.per_vertex_gap.back());
      for (std::size_t j = 0; j < n_; ++j) {
        const double f = sums[j].den > 0.0 ? std::abs(sums[j].num[k]) / sums[j].den : 0.0;
        worst_f_[j] = std::max(worst_f_[j], f);
      }
    }
    for (std::size_t j = 0; j < n_; ++j) rep.penalty += worst_f_[j] * sums[j].weight;
    rep.total_j = combine_objective(rep.worst_gap, rep.penalty, w_m_);
    return rep;
  }

  ScenarioGrid grid_;
  std::size_t cells_;
  std::size_t vertices_;
  double w_m_;
  double cap_;
  std::vector<double> mass_;
  std::vector<double> cu_, cv_;
  std::vector<double> maps_;  // vertex-major
  std::vector<double> truth_;

  std::vector<Scenario> points_;
  std::size_t n_ = 0;
  std::vector<double> pu_, pv_;
  std::vector<std::size_t> cell_;
  std::vector<std::size_t> owner_, next_owner_;
  std::vector<double> d2_, next_d2_;
  std::vector<OwnerSums> sums_, next_sums_;
  std::vector<char> affected_;

  std::size_t pending_ = 0;
  Scenario pending_point_{};
  ObjectiveReport report_, candidate_;
  std::vector<double> worst_f_;
};

Scenario initial_point(Rng& rng, const ScenarioGrid& grid, std::span<const double> cumulative,
                       double uniform_fraction) {
  const auto& b = grid.bounds();
  if (rng.uniform() < uniform_fraction) {
    // 1 - u lies in (0, 1], which keeps r off the excluded lower edge.
    const double r = b.r.lo + b.r.span() * (1.0 - rng.uniform());
    const double rd = b.r_dot.lo + b.r_dot.span() * rng.uniform();
    return grid.clamp({r, rd});
  }
  const std::size_t cell = rng.from_cumulative(cumulative);
  const Scenario c = grid.center(cell);
  const auto& st = grid.steps();
  return grid.clamp({c.r + st.r * (0.5 - rng.uniform()), c.r_dot + st.r_dot * (0.5 - rng.uniform())});
}

}  // namespace

SynthesisResult synthesize(const OptimizerConfig& cfg, const SurrogateSet& set,
                           const ExposurePmf& pmf, bool record_trace) {
  cfg.validate();
  if (!(set.grid() == pmf.grid())) throw ConfigError("surrogate maps and exposure use different grids");
  const ScenarioGrid& grid = pmf.grid();
  const double span_r = grid.bounds().r.span();
  const double span_rd = grid.bounds().r_dot.span();

  std::vector<double> cumulative(pmf.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < pmf.size(); ++c) cumulative[c] = (acc += pmf[c]);

  IncrementalObjective eval(set, pmf, cfg.w_m);
  SynthesisResult best;
  bool have_best = false;

  for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
    Rng rng(combine_seed(cfg.seed, restart));
    TestSet init;
    for (std::size_t i = 0; i < cfg.n; ++i) {
      init.points.push_back(initial_point(rng, grid, cumulative, cfg.uniform_init_fraction));
    }
    eval.reset(init);

    double step = cfg.init_step;
    for (std::size_t iter = 0; iter < cfg.max_iters && step >= cfg.min_step; ++iter) {
      bool improved = false;
      for (std::size_t i = 0; i < cfg.n; ++i) {
        const Scenario here = eval.points()[i];
        const Scenario moves[4] = {{here.r + step * span_r, here.r_dot},
                                   {here.r - step * span_r, here.r_dot},
                                   {here.r, here.r_dot + step * span_rd},
                                   {here.r, here.r_dot - step * span_rd}};
        for (const Scenario& m : moves) {
          const Scenario cand = grid.clamp(m);
          if (cand == here) continue;
          if (eval.try_move(i, cand).total_j < eval.current().total_j) {
            eval.accept();
            improved = true;
            break;
          }
        }
      }
      if (record_trace) {
        const auto& r = eval.current();
        best.trace.push_back({iter, restart, r.total_j, r.worst_gap, r.penalty, step});
      }
      if (!improved) step *= 0.5;
    }

    if (!have_best || eval.current().total_j < best.report.total_j) {
      best.test_set.points = eval.points();
      best.report = eval.current();
      best.best_restart = restart;
      have_best = true;
    }
  }
  return best;
}

AvEvaluation evaluate_weighted(const TestSet& ts, std::span<const double> weights,
                               const CrashMap& av_map, const ExposurePmf& pmf) {
  if (weights.size() != ts.size()) throw ConfigError("one weight per test point is required");
  AvEvaluation out;
  const std::vector<double> responses = responses_at(ts, av_map);
  double mu = 0.0;
  for (std::size_t i = 0; i < responses.size(); ++i) mu += responses[i] * weights[i];
  out.mu_hat = std::clamp(mu, 0.0, 1.0);
  out.mu_true = crash_rate(av_map, pmf);
  out.realized_error = std::abs(out.mu_hat - out.mu_true);
  return out;
}

AvEvaluation evaluate_av(const TestSet& ts, const CrashMap& av_map, const ExposurePmf& pmf) {
  const CoveragePartition part = partition(ts, pmf);
  return evaluate_weighted(ts, part.weights, av_map, pmf);
}

}  // namespace fewshot
