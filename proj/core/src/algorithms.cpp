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


#include "prspider/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prspider/errors.hpp"
#include "prspider/estimator.hpp"

namespace prspider {
namespace {

enum class Restart { exact, sampled };

// Ceiling that ignores representation noise such as 16 / 0.4 = 40.000...01.
std::size_t ceil_count(double x) {
  if (!(x > 0.0)) return 1;
  const double c = std::ceil(x * (1.0 - 1e-12));
  return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::max(0.0, std::floor(x + 0.5)));
}

ClusterOptions cluster_options(const RunOptions& options) {
  return ClusterOptions{options.parallel_workers, options.metrics_cadence, options.observer};
}

void step_all(Cluster& cluster, double gamma) {
  cluster.for_each_worker([gamma](WorkerState& w) {
    axpy_inplace(w.x, -gamma, w.est.v);
    ++w.clock;
  });
}

MetricsTrace run_pr_spider(const ProblemSuite& suite, const HyperParams& hp, std::uint64_t seed,
                           const RunOptions& options, Restart restart) {
  validate(hp);
  if (hp.workers != suite.workers()) {
    throw std::invalid_argument("hyperparameters are for " + std::to_string(hp.workers) +
                                " workers, suite has " + std::to_string(suite.workers()));
  }
  if (restart == Restart::exact && !suite.is_finite_sum()) {
    throw UnsupportedOperation("pr-spider-finite requires a finite-sum suite");
  }

  Cluster cluster(suite, seed, cluster_options(options));
  cluster.trace().config_echo = options.config_echo;

  // Every worker computes its restart gradient at its (common) iterate and
  // the server averages them into v.
  auto restart_round = [&](std::uint64_t epoch_tag, std::size_t s, std::size_t t) {
    cluster.for_each_worker([&](WorkerState& w) {
      if (restart == Restart::exact) {
        w.outbox = w.oracle.full_gradient(w.x);
      } else {
        RngStream rng = w.stream(epoch_tag, t);
        w.outbox = w.oracle.batch_gradient(w.x, hp.restart_batch, rng);
      }
    });
    cluster.sync(s, t, Payload::gradients);
  };

  const std::size_t m = hp.epoch_length;
  restart_round(kInitEpoch, 0, 0);

  for (std::size_t s = 0; s < hp.epochs; ++s) {
    cluster.for_each_worker([](WorkerState& w) {
      w.est.x_prev = w.x;
      w.est.t = 0;
    });
    cluster.notify_epoch_start(s);
    cluster.check_finite(s, 0);
    cluster.record(s, 0);
    step_all(cluster, hp.gamma);

    for (std::size_t t = 1; t < m; ++t) {
      cluster.for_each_worker([&](WorkerState& w) {
        RngStream rng = w.stream(s, t);
        w.est = spider_update(w.est, w.oracle, w.x, hp.batch, rng);
      });
      if (is_averaging_step(t, hp.period)) {
        cluster.sync(s, t, Payload::both);
        // The next difference term is taken from the averaged iterate.
        cluster.for_each_worker([](WorkerState& w) { w.est.x_prev = w.x; });
      }
      cluster.check_finite(s, t);
      cluster.record(s, t);
      step_all(cluster, hp.gamma);
    }

    if (s + 1 < hp.epochs) {
      cluster.check_finite(s, m);
      cluster.sync(s, m, Payload::iterates);
      if (!options.skip_epoch_restart) restart_round(s, s, m);
    }
  }
  cluster.check_finite(hp.epochs, 0);
  return cluster.take_trace();
}

MetricsTrace run_local_sgd(const ProblemSuite& suite, double gamma, std::size_t batch,
                           std::size_t period, std::size_t horizon, std::uint64_t seed,
                           const RunOptions& options) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("step size must be finite and >= 0");
  }
  if (batch == 0 || period == 0 || horizon == 0) {
    throw std::invalid_argument("batch, period and horizon must be >= 1");
  }

  Cluster cluster(suite, seed, cluster_options(options));
  cluster.trace().config_echo = options.config_echo;

  for (std::size_t k = 0; k < horizon; ++k) {
    cluster.check_finite(0, k);
    cluster.record(0, k);
    cluster.for_each_worker([&](WorkerState& w) {
      RngStream rng = w.stream(0, k);
      const ParamVector g = w.oracle.batch_gradient(w.x, batch, rng);
      axpy_inplace(w.x, -gamma, g);
      ++w.clock;
    });
    if ((k + 1) % period == 0 || k + 1 == horizon) {
      cluster.check_finite(0, k + 1);
      cluster.sync(0, k + 1, Payload::iterates);
    }
  }
  cluster.check_finite(0, horizon);
  return cluster.take_trace();
}

}  // namespace

double max_step_size(double smoothness, std::size_t period) {
  if (!(smoothness > 0.0) || period == 0) {
    throw std::invalid_argument("max_step_size: need L > 0 and I >= 1");
  }
  return 1.0 / (8.0 * smoothness * static_cast<double>(period));
}

void validate(const HyperParams& hp) {
  if (!(hp.gamma >= 0.0) || !std::isfinite(hp.gamma)) {
    throw std::invalid_argument("step size must be finite and >= 0");
  }
  if (hp.period == 0 || hp.epoch_length == 0 || hp.batch == 0 || hp.epochs == 0 ||
      hp.restart_batch == 0 || hp.workers == 0) {
    throw std::invalid_argument("I, m, B, S, n_b and N must all be >= 1");
  }
}

MetricsTrace run_pr_spider_finite(const ProblemSuite& suite, const HyperParams& hp,
                                  std::uint64_t seed, const RunOptions& options) {
  return run_pr_spider(suite, hp, seed, options, Restart::exact);
}

MetricsTrace run_pr_spider_online(const ProblemSuite& suite, const HyperParams& hp,
                                  std::uint64_t seed, const RunOptions& options) {
  return run_pr_spider(suite, hp, seed, options, Restart::sampled);
}

MetricsTrace run_parallel_minibatch_sgd(const ProblemSuite& suite, double gamma,
                                        std::size_t batch, std::size_t horizon,
                                        std::uint64_t seed, const RunOptions& options) {
  return run_local_sgd(suite, gamma, batch, 1, horizon, seed, options);
}

MetricsTrace run_parallel_restarted_sgd(const ProblemSuite& suite, double gamma,
                                        std::size_t batch, std::size_t period,
                                        std::size_t horizon, std::uint64_t seed,
                                        const RunOptions& options) {
  return run_local_sgd(suite, gamma, batch, period, horizon, seed, options);
}

HyperParams choose_params_finite(std::size_t workers, std::size_t samples, std::size_t period,
                                 double smoothness, double gap_bound, double eps) {
  if (workers == 0 || samples == 0 || period == 0) {
    throw std::invalid_argument("choose_params_finite: N, n and I must be >= 1");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("choose_params_finite: eps must be > 0");

  const double n = static_cast<double>(samples);
  const double big_n = static_cast<double>(workers);
  const double i = static_cast<double>(period);

  HyperParams hp;
  hp.workers = workers;
  hp.period = period;
  hp.epoch_length = std::max<std::size_t>(1, round_half_up(i * std::sqrt(big_n * n)));
  hp.batch = std::clamp<std::size_t>(round_half_up(std::sqrt(n / big_n) / i), 1, samples);
  hp.restart_batch = samples;
  hp.gamma = max_step_size(smoothness, period);
  const std::size_t horizon = ceil_count(2.0 * std::max(gap_bound, 0.0) / (hp.gamma * eps));
  hp.epochs = ceil_count(static_cast<double>(horizon) / static_cast<double>(hp.epoch_length));
  return hp;
}

HyperParams choose_params_online(std::size_t workers, double sigma, std::size_t period,
                                 double smoothness, double gap_bound, double eps) {
  if (workers == 0) throw std::invalid_argument("choose_params_online: N must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("choose_params_online: eps must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("choose_params_online: sigma must be >= 0");

  const std::size_t restart_batch =
      ceil_count(4.0 * sigma * sigma / (static_cast<double>(workers) * eps));
  HyperParams hp =
      choose_params_finite(workers, restart_batch, period, smoothness, gap_bound, eps);
  hp.restart_batch = restart_batch;
  return hp;
}

}  // namespace prspider
