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


#include "prspider/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "prspider/algorithms.hpp"
#include "prspider/experiment.hpp"
#include "prspider/harness.hpp"
#include "prspider/problems.hpp"
#include "prspider/rng.hpp"

namespace prspider {
namespace {

constexpr std::uint64_t kVerifySeeds[] = {1, 2, 3};

// Watches a run and measures the structural identities the algorithm
// promises: exact restarts, exact consensus after every exchange and the
// averaged-iterate recursion x_bar <- x_bar - gamma * v_bar.
class Probe : public RunObserver {
 public:
  Probe(const ProblemSuite& suite, double gamma) : suite_(&suite), gamma_(gamma) {}

  void on_epoch_start(std::size_t s, std::span<const WorkerState> workers) override {
    const auto [x_bar, v_bar] = means(workers);
    const double err_sq = sq_distance(v_bar, true_global_gradient(*suite_, x_bar));
    restart_err_sq.push_back(err_sq);
    max_restart_err = std::max(max_restart_err, std::sqrt(err_sq));
    prev_.reset();
    (void)s;
  }

  void on_sync(std::size_t, std::size_t, Payload payload,
               std::span<const WorkerState> workers) override {
    ++syncs;
    const bool iterates = payload == Payload::iterates || payload == Payload::both;
    const bool estimates = payload != Payload::iterates;
    for (const auto& w : workers) {
      if (iterates && !bitwise_equal(w.x, workers.front().x)) ++consensus_violations;
      if (estimates && !bitwise_equal(w.est.v, workers.front().est.v)) ++consensus_violations;
    }
  }

  void on_iterate(std::size_t s, std::size_t, std::span<const WorkerState> workers) override {
    auto [x_bar, v_bar] = means(workers);
    if (prev_ && prev_->s == s) {
      const ParamVector predicted = axpy(prev_->x_bar, -gamma_, prev_->v_bar);
      const double scale = 1.0 + std::sqrt(sq_norm(x_bar));
      recursion_err = std::max(recursion_err, std::sqrt(sq_distance(x_bar, predicted)) / scale);
    }
    prev_ = Snapshot{s, std::move(x_bar), std::move(v_bar)};
  }

  std::vector<double> restart_err_sq;
  double max_restart_err = 0.0;
  std::size_t syncs = 0;
  std::size_t consensus_violations = 0;
  double recursion_err = 0.0;

 private:
  struct Snapshot {
    std::size_t s;
    ParamVector x_bar, v_bar;
  };

  static std::pair<ParamVector, ParamVector> means(std::span<const WorkerState> workers) {
    MeanAccumulator x(workers.front().x.dim()), v(workers.front().x.dim());
    for (const auto& w : workers) {
      x.add(w.x);
      v.add(w.est.v);
    }
    return {x.mean(), v.mean()};
  }

  const ProblemSuite* suite_;
  double gamma_;
  std::optional<Snapshot> prev_;
};

// Records every iterate of every worker, one entry per recorded step.
class IterateLog : public RunObserver {
 public:
  void on_iterate(std::size_t, std::size_t, std::span<const WorkerState> workers) override {
    std::vector<ParamVector> xs;
    for (const auto& w : workers) xs.push_back(w.x);
    steps.push_back(std::move(xs));
  }
  std::vector<std::vector<ParamVector>> steps;
};

struct Scenario {
  std::string label;
  ProblemSuite suite;
  HyperParams hp;
  bool online = false;
};

HyperParams explicit_params(const ProblemSuite& suite, std::size_t period, std::size_t m,
                            std::size_t batch, std::size_t epochs, std::size_t restart_batch) {
  HyperParams hp;
  hp.workers = suite.workers();
  hp.period = period;
  hp.epoch_length = m;
  hp.batch = batch;
  hp.epochs = epochs;
  hp.restart_batch = restart_batch;
  hp.gamma = max_step_size(suite.smoothness(), period);
  return hp;
}

MetricsTrace run_scenario(const Scenario& sc, std::uint64_t seed, RunObserver* observer,
                          const VerifyOptions& options) {
  RunOptions ro;
  ro.observer = observer;
  ro.skip_epoch_restart = options.skip_epoch_restart;
  return sc.online ? run_pr_spider_online(sc.suite, sc.hp, seed, ro)
                   : run_pr_spider_finite(sc.suite, sc.hp, seed, ro);
}

std::string scenario_detail(const Scenario& sc) {
  std::ostringstream os;
  os << sc.label << " N=" << sc.hp.workers << " I=" << sc.hp.period << " m=" << sc.hp.epoch_length
     << " B=" << sc.hp.batch << " S=" << sc.hp.epochs;
  if (sc.online) os << " n_b=" << sc.hp.restart_batch;
  return os.str();
}

Scenario quadratic_finite() {
  ProblemSuite suite = make_quadratic_suite(4, 64, 8, 1.0, 11);
  HyperParams hp = choose_params_finite(4, 64, 2, suite.smoothness(), suite.gap_bound(), 0.05);
  return {"quadratic", std::move(suite), hp, false};
}

Scenario sigmoid_finite() {
  ProblemSuite suite = make_nonconvex_suite(4, 32, 6, 1.0, 12);
  HyperParams hp = explicit_params(suite, 2, 16, 2, 4, 32);
  return {"sigmoid", std::move(suite), hp, false};
}

Scenario quadratic_online() {
  ProblemSuite suite = make_quadratic_suite(4, std::nullopt, 8, 1.0, 13);
  HyperParams hp = choose_params_online(4, suite.variance_bound(), 2,
                                        suite.smoothness(), suite.gap_bound(), 0.5);
  return {"quadratic-online", std::move(suite), hp, true};
}

Scenario sigmoid_online() {
  ProblemSuite suite = make_nonconvex_suite(4, std::nullopt, 6, 1.0, 14, 512);
  HyperParams hp = explicit_params(suite, 2, 16, 2, 4, 16);
  return {"sigmoid-online", std::move(suite), hp, true};
}

double stationarity_bound(const Scenario& sc) {
  const auto& hp = sc.hp;
  double rhs = 2.0 * sc.suite.gap_bound() / (static_cast<double>(hp.horizon()) * hp.gamma);
  if (sc.online) {
    rhs += 2.0 * sc.suite.variance_bound() * sc.suite.variance_bound() /
           (static_cast<double>(hp.workers) * static_cast<double>(hp.restart_batch));
  }
  return rhs;
}

class Report {
 public:
  explicit Report(std::string suite) : suite_(std::move(suite)) {}

  void add(std::string name, bool passed, double measured, double tolerance, std::string detail) {
    results.push_back({suite_, std::move(name), passed, measured, tolerance, std::move(detail)});
  }

  // Runs a check, turning an unexpected exception into a failed property.
  void guarded(const std::string& name, const std::function<void()>& check) {
    try {
      check();
    } catch (const std::exception& e) {
      add(name, false, std::nan(""), 0.0, std::string("exception: ") + e.what());
    }
  }

  std::vector<PropertyResult> results;

 private:
  std::string suite_;
};

void check_structure(Report& report, const std::vector<Scenario>& scenarios,
                     const VerifyOptions& options, bool with_restart_identity) {
  for (const auto& sc : scenarios) {
    const std::string detail = scenario_detail(sc);
    report.guarded("structure:" + sc.label, [&] {
      double restart_err = 0.0, recursion = 0.0, min_ratio = 0.0;
      std::size_t violations = 0, syncs = 0;
      for (std::uint64_t seed : kVerifySeeds) {
        Probe probe(sc.suite, sc.hp.gamma);
        const MetricsTrace trace = run_scenario(sc, seed, &probe, options);
        restart_err = std::max(restart_err, probe.max_restart_err);
        recursion = std::max(recursion, probe.recursion_err);
        violations += probe.consensus_violations;
        syncs += probe.syncs;
        min_ratio = std::max(min_ratio, min_fos(trace) / stationarity_bound(sc));
      }
      if (with_restart_identity) {
        report.add("e0_identity", restart_err <= 1e-10, restart_err, 1e-10, detail);
      }
      report.add("consensus_zeroing", violations == 0, static_cast<double>(violations), 0.0,
                 detail + " syncs=" + std::to_string(syncs));
      report.add("average_recursion", recursion <= 1e-12, recursion, 1e-12, detail);
      report.add("stationarity_bound", min_ratio <= 1.0, min_ratio, 1.0,
                 detail + " measured=min_fos/bound");
    });
  }
}

// Plain gradient descent on f(x) = (1/N) sum_i (1/n) sum_j 0.5 ||x - c_ij||^2,
// coded from the centers alone.
std::vector<ParamVector> reference_gd(const std::vector<std::vector<ParamVector>>& centers,
                                      const ParamVector& x0, double gamma, std::size_t steps) {
  const std::size_t d = x0.dim();
  std::vector<double> grand(d, 0.0);
  std::size_t count = 0;
  for (const auto& worker : centers) {
    for (const auto& c : worker) {
      for (std::size_t k = 0; k < d; ++k) grand[k] += c[k];
      ++count;
    }
  }
  for (double& g : grand) g /= static_cast<double>(count);

  std::vector<ParamVector> path;
  std::vector<double> x(x0.begin(), x0.end());
  for (std::size_t step = 0; step < steps; ++step) {
    path.emplace_back(x);
    for (std::size_t k = 0; k < d; ++k) x[k] -= gamma * (x[k] - grand[k]);
  }
  return path;
}

double max_path_error(const IterateLog& log, const std::vector<ParamVector>& reference) {
  if (log.steps.size() != reference.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    for (const auto& x : log.steps[k]) {
      for (std::size_t j = 0; j < x.dim(); ++j) {
        worst = std::max(worst, std::abs(x[j] - reference[k][j]));
      }
    }
  }
  return worst;
}

std::vector<std::vector<ParamVector>> random_centers(std::size_t workers, std::size_t samples,
                                                     std::size_t dim, std::uint64_t seed) {
  std::vector<std::vector<ParamVector>> centers(workers);
  for (std::size_t i = 0; i < workers; ++i) {
    RngStream rng(seed, {i, kProblemEpoch, 0});
    for (std::size_t j = 0; j < samples; ++j) {
      std::vector<double> c(dim);
      for (double& v : c) v = rng.uniform(-2.0, 2.0);
      centers[i].emplace_back(std::move(c));
    }
  }
  return centers;
}

void check_gd_degeneracy(Report& report) {
  report.guarded("gd_degeneracy", [&] {
    const auto centers = random_centers(3, 10, 4, 21);
    const ParamVector x0(std::vector<double>{3.0, -1.0, 2.0, 0.5});
    const ProblemSuite suite = quadratic_suite_from_centers(centers, x0);
    HyperParams hp = explicit_params(suite, 1, 100, 10, 2, 10);
    IterateLog log;
    RunOptions ro;
    ro.observer = &log;
    run_pr_spider_finite(suite, hp, 1, ro);
    const double err = max_path_error(log, reference_gd(centers, x0, hp.gamma, hp.horizon()));
    report.add("gd_degeneracy", err <= 1e-12, err, 1e-12, "B=n I=1 steps=200");
  });
}

std::uint64_t closed_form_rounds(const HyperParams& hp) {
  const std::uint64_t s = hp.epochs;
  return 1 + s * (hp.epoch_length / hp.period - 1) + 2 * (s - 1);
}

std::uint64_t closed_form_ifo(const HyperParams& hp, std::uint64_t restart) {
  const std::uint64_t s = hp.epochs, n = hp.workers;
  return n * restart + s * (hp.epoch_length - 1) * n * 2 * hp.batch + (s - 1) * n * restart;
}

void check_counters(Report& report, bool online, std::size_t configs) {
  report.guarded("counter_formulas", [&] {
    RngStream rng(99, {0, 0, online ? 1u : 0u});
    std::size_t mismatches = 0;
    std::string first_bad;
    for (std::size_t c = 0; c < configs; ++c) {
      const std::size_t workers = 1 + rng.uniform_index(4);
      const std::size_t samples = 2 + rng.uniform_index(10);
      const std::size_t period = 1 + rng.uniform_index(3);
      const std::size_t m = period * (1 + rng.uniform_index(4));
      const std::size_t batch = 1 + rng.uniform_index(samples);
      const std::size_t epochs = 1 + rng.uniform_index(3);
      const std::size_t restart = online ? 1 + rng.uniform_index(6) : samples;

      const ProblemSuite suite =
          online ? make_quadratic_suite(workers, std::nullopt, 3, 1.0, 100 + c)
                 : make_quadratic_suite(workers, samples, 3, 1.0, 100 + c);
      const HyperParams hp = explicit_params(suite, period, m, batch, epochs, restart);
      const Scenario sc{"counters", suite, hp, online};
      const MetricsTrace trace = run_scenario(sc, c + 1, nullptr, {});
      const auto& last = trace.records.back();
      if (last.ifo_total != closed_form_ifo(hp, restart) ||
          last.comm_rounds != closed_form_rounds(hp)) {
        if (mismatches++ == 0) first_bad = scenario_detail(sc);
      }
    }
    report.add("counter_formulas", mismatches == 0, static_cast<double>(mismatches), 0.0,
               std::to_string(configs) + " random configs" +
                   (first_bad.empty() ? "" : " first mismatch: " + first_bad));
  });
}

void check_restart_variance(Report& report, const Scenario& sc, std::size_t restarts) {
  report.guarded("restart_variance_bound:" + sc.label, [&] {
    HyperParams hp = sc.hp;
    hp.epochs = 1;
    hp.epoch_length = 1;
    hp.period = 1;
    Probe probe(sc.suite, hp.gamma);
    const Scenario one{sc.label, sc.suite, hp, true};
    for (std::size_t r = 0; r < restarts; ++r) run_scenario(one, r + 1, &probe, {});
    MeanAccumulator mean(1);
    for (double e : probe.restart_err_sq) mean.add(ParamVector(std::vector<double>{e}));
    const double measured = mean.mean()[0];
    const double bound = sc.suite.variance_bound() * sc.suite.variance_bound() /
                         (static_cast<double>(hp.workers) * static_cast<double>(hp.restart_batch)) *
                         (1.0 + 3.0 / std::sqrt(static_cast<double>(restarts)));
    report.add("restart_variance_bound", measured <= bound, measured, bound,
               sc.label + " restarts=" + std::to_string(restarts) +
                   " n_b=" + std::to_string(hp.restart_batch));
  });
}

// An online quadratic whose samples carry no noise must reproduce plain
// gradient descent exactly.
void check_zero_variance(Report& report) {
  report.guarded("zero_variance_degeneracy", [&] {
    const auto centers = random_centers(3, 1, 4, 31);
    std::vector<LocalObjective> objectives;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      objectives.push_back(LocalObjective::quadratic_online(i, centers[i][0], 0.0, 0.0));
    }
    const ParamVector x0(std::vector<double>{-1.0, 2.5, 0.0, 1.5});
    const ProblemSuite finite = quadratic_suite_from_centers(centers, x0);
    const ProblemSuite suite(std::move(objectives), x0, finite.optimum_value(), true);
    const HyperParams hp = explicit_params(suite, 2, 50, 3, 4, 5);
    IterateLog log;
    RunOptions ro;
    ro.observer = &log;
    run_pr_spider_online(suite, hp, 5, ro);
    const double err = max_path_error(log, reference_gd(centers, x0, hp.gamma, hp.horizon()));
    report.add("zero_variance_degeneracy", err <= 1e-12, err, 1e-12, "spread=0 steps=200");
  });
}

void check_baselines(Report& report) {
  const ProblemSuite suite = make_nonconvex_suite(4, 64, 6, 1.0, 41);
  const double gamma = 0.5 / suite.smoothness();

  report.guarded("minibatch_equivalence", [&] {
    std::ostringstream a, b;
    write_trace_csv(a, run_parallel_minibatch_sgd(suite, gamma, 4, 60, 3, {}));
    write_trace_csv(b, run_parallel_restarted_sgd(suite, gamma, 4, 1, 60, 3, {}));
    const bool same = a.str() == b.str();
    report.add("minibatch_equivalence", same, same ? 0.0 : 1.0, 0.0,
               "restarted SGD with I=1 vs mini-batch SGD, CSV bytes");
  });

  report.guarded("consensus_zeroing", [&] {
    Probe probe(suite, gamma);
    RunOptions ro;
    ro.observer = &probe;
    run_parallel_restarted_sgd(suite, gamma, 2, 3, 50, 4, ro);
    report.add("consensus_zeroing", probe.consensus_violations == 0,
               static_cast<double>(probe.consensus_violations), 0.0,
               "restarted SGD I=3 syncs=" + std::to_string(probe.syncs));
  });

  report.guarded("counter_formulas", [&] {
    std::size_t mismatches = 0;
    for (std::size_t period : {1u, 2u, 5u, 7u}) {
      const std::size_t batch = 3, horizon = 40;
      const MetricsTrace trace =
          run_parallel_restarted_sgd(suite, gamma, batch, period, horizon, period, {});
      for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        if (r.ifo_total != suite.workers() * batch * k || r.comm_rounds != k / period) ++mismatches;
      }
      if (trace.comm_vectors != (horizon + period - 1) / period) ++mismatches;
    }
    report.add("counter_formulas", mismatches == 0, static_cast<double>(mismatches), 0.0,
               "ifo=N*B*k rounds=floor(k/I) per record, I in {1,2,5,7}");
  });
}

}  // namespace

std::string_view to_string(VerifySuite suite) noexcept {
  switch (suite) {
    case VerifySuite::finite:
      return "finite";
    case VerifySuite::online:
      return "online";
    case VerifySuite::baselines:
      return "baselines";
    case VerifySuite::all:
      return "all";
  }
  return "unknown";
}

VerifySuite parse_verify_suite(std::string_view name) {
  for (auto s : {VerifySuite::finite, VerifySuite::online, VerifySuite::baselines, VerifySuite::all}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown verify suite '" + std::string(name) +
                              "' (expected finite, online, baselines or all)");
}

std::vector<PropertyResult> run_verification(VerifySuite suite, const VerifyOptions& options) {
  std::vector<PropertyResult> all;
  auto take = [&all](Report& r) {
    all.insert(all.end(), r.results.begin(), r.results.end());
  };

  if (suite == VerifySuite::finite || suite == VerifySuite::all) {
    Report report("finite");
    check_structure(report, {quadratic_finite(), sigmoid_finite()}, options, true);
    check_gd_degeneracy(report);
    check_counters(report, false, 20);
    take(report);
  }
  if (suite == VerifySuite::online || suite == VerifySuite::all) {
    Report report("online");
    const Scenario quad = quadratic_online();
    const Scenario sig = sigmoid_online();
    check_structure(report, {quad, sig}, options, false);
    check_restart_variance(report, quad, options.restarts);
    check_restart_variance(report, sig, options.restarts);
    check_zero_variance(report);
    check_counters(report, true, 20);
    take(report);
  }
  if (suite == VerifySuite::baselines || suite == VerifySuite::all) {
    Report report("baselines");
    check_baselines(report);
    take(report);
  }
  return all;
}

void write_verify_csv(std::ostream& out, const std::vector<PropertyResult>& results) {
  out << kVerifyCsvHeader << '\n';
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    out << r.suite << ',' << r.name << ',' << (r.passed ? "pass" : "fail") << ','
        << format_double(r.measured) << ',' << format_double(r.tolerance) << ',' << detail
        << '\n';
  }
}

int cmd_verify(std::string_view suite, bool skip_epoch_restart, std::ostream& out,
               std::ostream& err) {
  VerifySuite which{};
  try {
    which = parse_verify_suite(suite);
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  VerifyOptions options;
  options.skip_epoch_restart = skip_epoch_restart;
  const auto results = run_verification(which, options);
  write_verify_csv(out, results);
  const auto failed = std::count_if(results.begin(), results.end(),
                                    [](const PropertyResult& r) { return !r.passed; });
  if (failed > 0) {
    err << failed << " of " << results.size() << " properties failed\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

}  // namespace prspider
