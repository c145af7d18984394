// Copyright 2026 The prspider Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "prspider/algorithms.hpp"
#include "prspider/estimator.hpp"
#include "prspider/experiment.hpp"

namespace {

using namespace prspider;

constexpr double kRestartTol = 1e-10;
constexpr double kGdTol = 1e-12;
constexpr double kEnumTol = 1e-12;
constexpr double kSlopeLo = 0.7, kSlopeHi = 1.3;
constexpr double kSpeedupLo = 4.0 / 3.0, kSpeedupHi = 4.0;
constexpr int kSeeds = 7;

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::pair<ParamVector, ParamVector> averages(std::span<const WorkerState> ws) {
  std::vector<ParamVector> x, v;
  for (const auto& w : ws) {
    x.push_back(w.x);
    v.push_back(w.est.v);
  }
  return {mean_reduce(x), mean_reduce(v)};
}

class RestartProbe : public RunObserver {
 public:
  explicit RestartProbe(const ProblemSuite& s) : suite_(&s) {}
  void on_epoch_start(std::size_t, std::span<const WorkerState> ws) override {
    const auto [x, v] = averages(ws);
    const double err = sq_distance(v, true_global_gradient(*suite_, x));
    worst = std::max(worst, std::sqrt(err));
    last_sq = err;
    ++restarts;
  }
  double worst = 0.0, last_sq = 0.0;
  std::size_t restarts = 0;

 private:
  const ProblemSuite* suite_;
};

class ConsensusProbe : public RunObserver {
 public:
  void on_sync(std::size_t, std::size_t, Payload p, std::span<const WorkerState> ws) override {
    ++events;
    for (const auto& w : ws) {
      if (p != Payload::estimates && p != Payload::gradients && !bitwise_equal(w.x, ws[0].x)) ++violations;
      if (p != Payload::iterates && !bitwise_equal(w.est.v, ws[0].est.v)) ++violations;
    }
  }
  std::size_t events = 0, violations = 0;
};

class IterateProbe : public RunObserver {
 public:
  void on_iterate(std::size_t, std::size_t, std::span<const WorkerState> ws) override {
    std::vector<ParamVector> step;
    for (const auto& w : ws) step.push_back(w.x);
    xs.push_back(std::move(step));
  }
  std::vector<std::vector<ParamVector>> xs;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string csv(const MetricsTrace& t) {
  std::ostringstream out;
  write_trace_csv(out, t);
  return out.str();
}

Verdict restart_identity() {
  const ProblemSuite s = make_quadratic_suite(4, 64, 8, 1.0, 1);
  const HyperParams hp = choose_params_finite(4, 64, 4, s.smoothness(), s.gap_bound(), 0.05);
  double worst = 0.0;
  std::size_t restarts = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RestartProbe probe(s);
    RunOptions options;
    options.observer = &probe;
    run_pr_spider_finite(s, hp, seed, options);
    worst = std::max(worst, probe.worst);
    restarts += probe.restarts;
  }
  return {restarts == 5 * hp.epochs && worst <= kRestartTol,
          fmt("max restart error %.3g", worst) + " over " + std::to_string(restarts) +
              " restarts (tol 1e-10)"};
}

Verdict consensus_zeroing() {
  std::size_t events = 0, violations = 0;
  const ProblemSuite q = make_quadratic_suite(4, 64, 8, 1.0, 1);
  const ProblemSuite g = make_nonconvex_suite(4, 64, 6, 0.5, 2);
  const ProblemSuite o = make_nonconvex_suite(4, std::nullopt, 6, 0.5, 3, 512);
  const HyperParams hq = choose_params_finite(4, 64, 4, q.smoothness(), q.gap_bound(), 0.05);
  HyperParams hg = choose_params_finite(4, 64, 3, g.smoothness(), g.gap_bound(), 0.01);
  hg.epochs = 5;
  hg.epoch_length = 14;  // not a multiple of the period
  HyperParams ho = hg;
  ho.restart_batch = 32;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ConsensusProbe a, b, c, d;
    RunOptions oa, ob, oc, od;
    oa.observer = &a;
    ob.observer = &b;
    oc.observer = &c;
    od.observer = &d;
    run_pr_spider_finite(q, hq, seed, oa);
    run_pr_spider_finite(g, hg, seed, ob);
    run_pr_spider_online(o, ho, seed, oc);
    run_parallel_restarted_sgd(g, 0.05, 4, 5, 60, seed, od);
    events += a.events + b.events + c.events + d.events;
    violations += a.violations + b.violations + c.violations + d.violations;
  }
  return {events > 0 && violations == 0,
          std::to_string(violations) + " nonzero disagreements after " + std::to_string(events) +
              " averaging events"};
}

Verdict gd_degeneracy() {
  const std::size_t workers = 3, n = 5, dim = 4, steps = 200;
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal;
  std::vector<std::vector<ParamVector>> centers(workers);
  std::vector<double> grand(dim, 0.0);
  for (auto& w : centers) {
    for (std::size_t j = 0; j < n; ++j) {
      ParamVector c(dim, 0.0);
      for (std::size_t k = 0; k < dim; ++k) {
        c[k] = 2.0 * normal(gen);
        grand[k] += c[k];
      }
      w.push_back(c);
    }
  }
  for (double& g : grand) g /= static_cast<double>(workers * n);
  ParamVector x0(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) x0[k] = 5.0 + k;
  const ProblemSuite s = quadratic_suite_from_centers(centers, x0);

  HyperParams hp;
  hp.gamma = 0.05;
  hp.period = 1;
  hp.epoch_length = 100;
  hp.batch = n;
  hp.epochs = 2;
  hp.restart_batch = n;
  hp.workers = workers;
  IterateProbe probe;
  RunOptions options;
  options.observer = &probe;
  run_pr_spider_finite(s, hp, 1, options);

  std::vector<double> x(x0.begin(), x0.end());
  double worst = 0.0;
  for (std::size_t step = 0; step < steps && step < probe.xs.size(); ++step) {
    for (const auto& xi : probe.xs[step]) {
      for (std::size_t k = 0; k < dim; ++k) worst = std::max(worst, std::abs(xi[k] - x[k]));
    }
    for (std::size_t k = 0; k < dim; ++k) x[k] -= hp.gamma * (x[k] - grand[k]);
  }
  return {probe.xs.size() == steps && worst <= kGdTol,
          fmt("max deviation %.3g", worst) + " over " + std::to_string(probe.xs.size()) +
              " steps (tol 1e-12)"};
}

Verdict enumeration() {
  const std::vector<std::vector<SigmoidSample>> samples{{
      SigmoidSample{ParamVector{0.9, -0.4}, 0.2},
      SigmoidSample{ParamVector{-0.3, 1.1}, -0.6},
      SigmoidSample{ParamVector{0.5, 0.5}, 0.8},
  }};
  const ProblemSuite s = sigmoid_suite_from_samples(samples, ParamVector(2), false);
  const auto& obj = s.objective(0);
  const ParamVector v0{0.1, 0.3}, x_prev{-0.7, 0.2}, x_curr{0.4, -0.9};
  EstimatorState state{v0, x_prev, 1};

  std::vector<bool> seen(3, false);
  std::vector<double> sum(2, 0.0);
  for (std::uint64_t seed = 1; seed < 10000; ++seed) {
    RngStream probe(seed, {0, 0, 1});
    const SampleId id = obj.draw(probe);
    if (seen[id]) continue;
    seen[id] = true;
    IfoOracle oracle(obj);
    RngStream rng(seed, {0, 0, 1});
    const EstimatorState next = spider_update(state, oracle, x_curr, 1, rng);
    for (int k = 0; k < 2; ++k) sum[k] += next.v[k];
  }
  if (!(seen[0] && seen[1] && seen[2])) return {false, "could not enumerate all samples"};
  const ParamVector gc = obj.expected_gradient(x_curr), gp = obj.expected_gradient(x_prev);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) worst = std::max(worst, std::abs(sum[k] / 3.0 - (v0[k] + gc[k] - gp[k])));
  return {worst <= kEnumTol, fmt("max deviation %.3g (tol 1e-12)", worst)};
}

Verdict restart_variance() {
  const std::size_t workers = 4, nb = 16, restarts = 500;
  const ProblemSuite s = make_quadratic_suite(workers, std::nullopt, 6, 1.0, 5);
  const double sigma = s.variance_bound();
  HyperParams hp;
  hp.gamma = 0.01;
  hp.period = 1;
  hp.epoch_length = 1;
  hp.batch = 1;
  hp.epochs = 1;
  hp.restart_batch = nb;
  hp.workers = workers;
  double sum = 0.0;
  for (std::size_t r = 0; r < restarts; ++r) {
    RestartProbe probe(s);
    RunOptions options;
    options.observer = &probe;
    options.metrics_cadence = 0;
    run_pr_spider_online(s, hp, 1000 + r, options);
    sum += probe.last_sq;
  }
  const double mean = sum / restarts;
  const double bound = sigma * sigma / (workers * nb) * (1.0 + 3.0 / std::sqrt(double(restarts)));
  return {mean <= bound, fmt("mean %.4g", mean) + fmt(" <= bound %.4g", bound)};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

ExperimentConfig quadratic_config(std::size_t workers, std::size_t n, std::size_t period) {
  ExperimentConfig c;
  c.problem.family = Family::quadratic;
  c.problem.workers = workers;
  c.problem.samples = n;
  c.problem.dim = 8;
  c.algorithm.kind = AlgorithmKind::pr_spider_finite;
  c.algorithm.eps = 0.05;
  c.algorithm.period = period;
  c.run.seeds.clear();
  for (int s = 1; s <= kSeeds; ++s) c.run.seeds.push_back(s);
  return c;
}

Verdict communication_scaling() {
  const ExperimentConfig c = quadratic_config(4, 64, 4);
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  const auto cells = summarize_sweep(run_sweep(c, SweepAxis::eps, eps, false));
  std::vector<double> inv, comm;
  std::string detail = "median comm";
  for (const auto& cell : cells) {
    if (cell.hits == 0) return {false, "no hit at eps " + fmt("%g", cell.eps)};
    inv.push_back(1.0 / cell.eps);
    comm.push_back(cell.median_comm);
    detail += fmt(" %g", cell.median_comm);
  }
  const double slope = fit_slope(inv, comm);
  return {slope >= kSlopeLo && slope <= kSlopeHi,
          detail + fmt("; slope %.3f (band [0.7, 1.3])", slope)};
}

Verdict linear_speedup() {
  const ExperimentConfig c = quadratic_config(4, 256, 4);
  const std::vector<double> workers{2, 4, 8};
  const auto cells = summarize_sweep(run_sweep(c, SweepAxis::workers, workers, true));
  bool ok = cells.size() == 3;
  std::string detail = "per-node IFO";
  for (const auto& cell : cells) {
    ok = ok && cell.hits == cell.runs;
    detail += fmt(" %g", cell.median_per_node_ifo);
  }
  for (std::size_t k = 0; ok && k + 1 < cells.size(); ++k) {
    const double r = cells[k].median_per_node_ifo / cells[k + 1].median_per_node_ifo;
    detail += fmt("; ratio %.3f", r);
    ok = r >= kSpeedupLo && r <= kSpeedupHi;
  }
  return {ok, detail + " (band [1.333, 4] per doubling)"};
}

double censored_median(const std::vector<double>& values) {
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Verdict baseline_advantage() {
  const double eps = 1e-7;
  const ProblemSuite s = make_nonconvex_suite(4, 256, 10, 0.5, 7);
  HyperParams hp = choose_params_finite(4, 256, 1, s.smoothness(), s.gap_bound(), 0.01);
  hp.epochs = 250;

  std::vector<double> spider;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto hit = first_hit(run_pr_spider_finite(s, hp, seed), eps);
    spider.push_back(hit ? double(hit->ifo_total) : std::numeric_limits<double>::infinity());
  }
  const double spider_median = censored_median(spider);
  if (!std::isfinite(spider_median)) return {false, "PR-SPIDER did not reach eps"};

  // Best parallel mini-batch SGD over a small grid; runs that miss eps within
  // the budget count as never converging.
  const double budget = 12'000'000;
  double best = std::numeric_limits<double>::infinity();
  std::string best_label = "none";
  for (double gamma : {0.025, 0.05, 0.1, 0.2}) {
    for (std::size_t b : {256u, 1024u}) {
      const std::size_t horizon = static_cast<std::size_t>(budget / (4.0 * b)) + 1;
      std::vector<double> ifo;
      for (int seed = 1; seed <= kSeeds; ++seed) {
        const auto hit = first_hit(run_parallel_minibatch_sgd(s, gamma, b, horizon, seed), eps);
        ifo.push_back(hit ? double(hit->ifo_total) : std::numeric_limits<double>::infinity());
      }
      const double m = censored_median(ifo);
      if (m < best) {
        best = m;
        best_label = fmt("gamma=%g", gamma) + " b=" + std::to_string(b);
      }
    }
  }
  if (!std::isfinite(best)) return {false, "no SGD configuration reached eps within the budget"};
  return {spider_median <= best, fmt("PR-SPIDER median IFO %.0f", spider_median) +
                                     fmt(" vs best SGD %.0f", best) + " (" + best_label + ")"};
}

Verdict counter_formulas() {
  std::mt19937_64 gen(77);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  std::size_t mismatches = 0;
  const int configs = 20;
  for (int c = 0; c < configs; ++c) {
    const bool online = c % 2 == 1;
    HyperParams hp;
    hp.workers = pick(1, 5);
    const std::size_t n = pick(2, 12);
    hp.period = pick(1, 4);
    hp.epoch_length = hp.period * pick(1, 5);
    hp.batch = pick(1, n);
    hp.epochs = pick(1, 4);
    hp.restart_batch = online ? pick(1, 20) : n;
    hp.gamma = 0.01;
    const ProblemSuite s = online ? make_quadratic_suite(hp.workers, std::nullopt, 3, 1.0, c)
                                  : make_quadratic_suite(hp.workers, n, 3, 1.0, c);
    const MetricsTrace t = online ? run_pr_spider_online(s, hp, c + 1) : run_pr_spider_finite(s, hp, c + 1);
    const std::uint64_t N = hp.workers, S = hp.epochs, m = hp.epoch_length, I = hp.period;
    const std::uint64_t restart = N * hp.restart_batch;
    const std::uint64_t ifo = restart + S * (m - 1) * N * 2 * hp.batch + (S - 1) * restart;
    const std::uint64_t rounds = 1 + S * (m / I - 1) + 2 * (S - 1);
    const std::uint64_t vectors = 1 + 2 * S * (m / I - 1) + 2 * (S - 1);
    if (t.records.back().ifo_total != ifo || t.records.back().comm_rounds != rounds ||
        t.comm_vectors != vectors) {
      ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 20 configurations"};
}

Verdict determinism() {
  std::size_t checked = 0, differing = 0;
  auto compare = [&](const std::function<MetricsTrace(const RunOptions&)>& run) {
    RunOptions serial, parallel;
    parallel.parallel_workers = true;
    const std::string a = csv(run(serial)), b = csv(run(serial)), c = csv(run(parallel));
    ++checked;
    if (a != b || a != c) ++differing;
  };
  const ProblemSuite q = make_quadratic_suite(4, 64, 8, 1.0, 1);
  const HyperParams hq = choose_params_finite(4, 64, 4, q.smoothness(), q.gap_bound(), 0.05);
  const ProblemSuite g = make_nonconvex_suite(4, 256, 10, 0.5, 7);
  HyperParams hg = choose_params_finite(4, 256, 1, g.smoothness(), g.gap_bound(), 0.01);
  hg.epochs = 20;
  const ProblemSuite o = make_quadratic_suite(4, std::nullopt, 6, 1.0, 5);
  const HyperParams ho = choose_params_online(4, o.variance_bound(), 2, o.smoothness(), o.gap_bound(), 0.5);
  for (std::uint64_t seed : {1u, 2u}) {
    compare([&](const RunOptions& opt) { return run_pr_spider_finite(q, hq, seed, opt); });
    compare([&](const RunOptions& opt) { return run_pr_spider_finite(g, hg, seed, opt); });
    compare([&](const RunOptions& opt) { return run_pr_spider_online(o, ho, seed, opt); });
    compare([&](const RunOptions& opt) { return run_parallel_minibatch_sgd(g, 0.1, 64, 300, seed, opt); });
    compare([&](const RunOptions& opt) { return run_parallel_restarted_sgd(g, 0.1, 8, 4, 300, seed, opt); });
  }
  return {differing == 0, std::to_string(differing) + " of " + std::to_string(checked) +
                              " configurations differ across reruns or parallelism"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {1, "restart_identity", restart_identity},
      {2, "consensus_zeroing", consensus_zeroing},
      {3, "gd_degeneracy", gd_degeneracy},
      {4, "estimator_enumeration", enumeration},
      {5, "restart_variance_bound", restart_variance},
      {6, "communication_scaling", communication_scaling},
      {7, "linear_speedup", linear_speedup},
      {8, "ifo_advantage_over_sgd", baseline_advantage},
      {9, "counter_formulas", counter_formulas},
      {10, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict result;
    try {
      result = c.check();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!result.passed) ++failures;
    std::printf("[%s] criterion %d %s: %s (%.1fs)\n", result.passed ? "PASS" : "FAIL", c.id, c.name,
                result.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
