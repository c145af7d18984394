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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prspider/estimator.hpp"
#include "prspider/numerics.hpp"
#include "prspider/problems.hpp"
#include "prspider/rng.hpp"

namespace prspider {

/// Communication tally. One round is one synchronized worker -> server ->
/// worker exchange, however many vectors ride in it; `vectors` counts the
/// d-vectors each worker shipped.
struct CommLedger {
  std::uint64_t rounds = 0;
  std::uint64_t vectors = 0;
};

enum class Payload { iterates, estimates, both, gradients };

std::string_view to_string(Payload payload) noexcept;

/// One simulated worker node.
struct WorkerState {
  WorkerState(std::size_t index, const LocalObjective& objective, std::uint64_t seed,
              const ParamVector& start);

  /// Independent stream for draws at (epoch, iteration).
  RngStream stream(std::uint64_t epoch, std::uint64_t iteration) const {
    return RngStream(seed, {index, epoch, iteration});
  }

  std::size_t index;
  std::uint64_t seed;
  ParamVector x;
  EstimatorState est;
  /// Locally computed gradient waiting for a `gradients` round.
  ParamVector outbox;
  IfoOracle oracle;
  /// Barrier position; every worker must agree on it at a sync.
  std::uint64_t clock = 0;
};

/// Values the server sent back in one round.
struct Broadcast {
  std::optional<ParamVector> iterate;
  std::optional<ParamVector> estimate;
  std::optional<ParamVector> gradient;
};

/// Averages the requested payload over workers (ascending index), overwrites
/// every worker's copy with the average and charges one round. A gradients
/// round averages the outboxes into est.v. Throws ConsistencyError when the
/// workers' clocks disagree.
Broadcast sync_round(std::span<WorkerState> workers, Payload payload, CommLedger& ledger);

struct FosMetrics {
  double f_bar = 0.0;      // f(x_bar)
  double grad_sq = 0.0;    // ||grad f(x_bar)||^2
  double consensus = 0.0;  // (1/N) sum_i ||x_i - x_bar||^2
};

/// First-order stationarity measure at the workers' current iterates. Uses the
/// analytic oracle: no IFO or communication is charged.
FosMetrics evaluate_fos(const ProblemSuite& suite, std::span<const WorkerState> workers);

struct MetricsRecord {
  std::size_t s = 0;
  std::size_t t = 0;
  double f_bar = 0.0;
  double grad_sq = 0.0;
  double consensus = 0.0;
  double fos = 0.0;  // grad_sq + consensus
  std::uint64_t ifo_total = 0;
  std::uint64_t comm_rounds = 0;
};

enum class Outcome { completed, diverged };

struct MetricsTrace {
  std::vector<MetricsRecord> records;
  /// Resolved configuration (JSON text) sufficient to rerun the experiment.
  std::string config_echo;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::completed;
  std::size_t workers = 0;
  std::uint64_t comm_vectors = 0;
};

struct FirstHit {
  std::size_t index = 0;
  std::size_t s = 0;
  std::size_t t = 0;
  std::uint64_t ifo_total = 0;
  std::uint64_t comm_rounds = 0;
};

/// Earliest record with fos <= eps (records without metrics are skipped).
std::optional<FirstHit> first_hit(const MetricsTrace& trace, double eps);

/// Smallest fos value in the trace (NaN when no record carries metrics).
double min_fos(const MetricsTrace& trace);

inline constexpr std::string_view kTraceCsvHeader =
    "s,t,f_bar,grad_sq,consensus,fos,ifo_total,comm_rounds";

/// Header line plus one row per record; doubles in shortest round-trip form.
void write_trace_csv(std::ostream& out, const MetricsTrace& trace);
std::string format_double(double value);

/// Thrown when an iterate or estimate becomes non-finite; carries the trace
/// recorded up to that point.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, MetricsTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const MetricsTrace& trace() const noexcept { return trace_; }

 private:
  MetricsTrace trace_;
};

/// Hooks for inspecting worker state during a run. Tests use them to check
/// invariants that never surface in the trace.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  /// Start of epoch s, after the restart direction has been broadcast.
  virtual void on_epoch_start(std::size_t /*s*/, std::span<const WorkerState> /*workers*/) {}
  /// Right after a synchronization round completed.
  virtual void on_sync(std::size_t /*s*/, std::size_t /*t*/, Payload /*payload*/,
                       std::span<const WorkerState> /*workers*/) {}
  /// At the point a record for (s, t) is taken: x_{i,t} and v_{i,t} final.
  virtual void on_iterate(std::size_t /*s*/, std::size_t /*t*/,
                          std::span<const WorkerState> /*workers*/) {}
};

struct ClusterOptions {
  bool parallel_workers = false;
  /// Evaluate metrics on every k-th record; 0 records counters only.
  std::size_t metrics_cadence = 1;
  RunObserver* observer = nullptr;
};

/// Coordinator of a bulk-synchronous simulated cluster: owns the workers, the
/// communication ledger and the trace being assembled.
class Cluster {
 public:
  Cluster(const ProblemSuite& suite, std::uint64_t seed, ClusterOptions options);

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  const ProblemSuite& suite() const noexcept { return *suite_; }
  std::span<WorkerState> workers() noexcept { return workers_; }
  std::span<const WorkerState> workers() const noexcept { return workers_; }
  std::size_t size() const noexcept { return workers_.size(); }
  const CommLedger& ledger() const noexcept { return ledger_; }
  std::uint64_t ifo_total() const noexcept;

  /// Runs fn on every worker; concurrently when parallel_workers is set.
  /// Each call touches only its own worker.
  void for_each_worker(const std::function<void(WorkerState&)>& fn);

  /// sync_round over all workers, then notifies the observer.
  Broadcast sync(std::size_t s, std::size_t t, Payload payload);

  /// Appends the record for (s, t) and notifies the observer.
  void record(std::size_t s, std::size_t t);

  void notify_epoch_start(std::size_t s);

  /// Throws DivergedError if any iterate or estimate is non-finite.
  void check_finite(std::size_t s, std::size_t t);

  MetricsTrace& trace() noexcept { return trace_; }
  MetricsTrace take_trace();

 private:
  const ProblemSuite* suite_;
  std::vector<WorkerState> workers_;
  CommLedger ledger_;
  ClusterOptions options_;
  MetricsTrace trace_;
};

}  // namespace prspider
