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


#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "prspider/harness.hpp"
#include "prspider/problems.hpp"

namespace prspider {

struct HyperParams {
  double gamma = 0.0;              // step size
  std::size_t period = 1;          // I: inner iterations between averaging
  std::size_t epoch_length = 1;    // m
  std::size_t batch = 1;           // B: inner SPIDER batch
  std::size_t epochs = 1;          // S
  std::size_t restart_batch = 1;   // n_b (online restarts)
  std::size_t workers = 1;         // N

  /// T = S * m inner iterations, counting each epoch's first step.
  std::size_t horizon() const noexcept { return epochs * epoch_length; }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Largest step size the convergence analysis admits: 1 / (8 L I).
double max_step_size(double smoothness, std::size_t period);

/// Throws std::invalid_argument on a zero count or a negative/non-finite step.
void validate(const HyperParams& hp);

struct RunOptions {
  bool parallel_workers = false;
  std::size_t metrics_cadence = 1;
  RunObserver* observer = nullptr;
  std::string config_echo;
  /// Mutation hook for the verify suite: skip the epoch-end gradient
  /// restart, leaving each worker with its last local estimate.
  bool skip_epoch_restart = false;
};

/// Parallel-restarted SPIDER on a finite-sum suite. The trace holds one
/// record per inner iteration (S * m rows). Throws UnsupportedOperation for
/// online suites and DivergedError on a non-finite state.
MetricsTrace run_pr_spider_finite(const ProblemSuite& suite, const HyperParams& hp,
                                  std::uint64_t seed, const RunOptions& options = {});

/// Online variant: initialization and restarts use per-worker batches of
/// n_b stochastic gradients. Works on any suite that can be sampled.
MetricsTrace run_pr_spider_online(const ProblemSuite& suite, const HyperParams& hp,
                                  std::uint64_t seed, const RunOptions& options = {});

/// Every iteration each worker steps from the common iterate with a
/// `batch`-sample gradient and the server averages the iterates (one round).
MetricsTrace run_parallel_minibatch_sgd(const ProblemSuite& suite, double gamma,
                                        std::size_t batch, std::size_t horizon,
                                        std::uint64_t seed, const RunOptions& options = {});

/// Local SGD with iterate averaging every `period` iterations and once more
/// at the end of the horizon: ceil(horizon / period) rounds.
MetricsTrace run_parallel_restarted_sgd(const ProblemSuite& suite, double gamma,
                                        std::size_t batch, std::size_t period,
                                        std::size_t horizon, std::uint64_t seed,
                                        const RunOptions& options = {});

/// m = I sqrt(N n), B = sqrt(n / N) / I (rounded half up, clamped to
/// [1, n]), gamma = 1 / (8 L I), T = ceil(2 gap / (gamma eps)),
/// S = ceil(T / m).
HyperParams choose_params_finite(std::size_t workers, std::size_t samples, std::size_t period,
                                 double smoothness, double gap_bound, double eps);

/// n_b = ceil(4 sigma^2 / (N eps)) (at least 1), then the finite rule with
/// n replaced by n_b.
HyperParams choose_params_online(std::size_t workers, double sigma, std::size_t period,
                                 double smoothness, double gap_bound, double eps);

}  // namespace prspider
