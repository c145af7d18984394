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


#include "prspider/harness.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "prspider/errors.hpp"

namespace prspider {

std::string_view to_string(Payload payload) noexcept {
  switch (payload) {
    case Payload::iterates:
      return "iterates";
    case Payload::estimates:
      return "estimates";
    case Payload::both:
      return "both";
    case Payload::gradients:
      return "gradients";
  }
  return "unknown";
}

WorkerState::WorkerState(std::size_t index_, const LocalObjective& objective,
                         std::uint64_t seed_, const ParamVector& start)
    : index(index_),
      seed(seed_),
      x(start),
      est{ParamVector(start.dim()), start, 0},
      outbox(start.dim()),
      oracle(objective) {}

Broadcast sync_round(std::span<WorkerState> workers, Payload payload, CommLedger& ledger) {
  if (workers.empty()) throw ConsistencyError("sync_round: no workers");
  const std::uint64_t clock = workers.front().clock;
  for (const auto& w : workers) {
    if (w.clock != clock) {
      throw ConsistencyError("sync_round: worker " + std::to_string(w.index) + " at clock " +
                             std::to_string(w.clock) + ", expected " + std::to_string(clock));
    }
  }

  const std::size_t dim = workers.front().x.dim();
  Broadcast out;
  std::uint64_t shipped = 0;
  if (payload == Payload::iterates || payload == Payload::both) {
    MeanAccumulator acc(dim);
    for (const auto& w : workers) acc.add(w.x);
    out.iterate = acc.mean();
    for (auto& w : workers) w.x = *out.iterate;
    ++shipped;
  }
  if (payload == Payload::estimates || payload == Payload::both) {
    MeanAccumulator acc(dim);
    for (const auto& w : workers) acc.add(w.est.v);
    out.estimate = acc.mean();
    for (auto& w : workers) w.est.v = *out.estimate;
    ++shipped;
  }
  if (payload == Payload::gradients) {
    MeanAccumulator acc(dim);
    for (const auto& w : workers) acc.add(w.outbox);
    out.gradient = acc.mean();
    for (auto& w : workers) w.est.v = *out.gradient;
    ++shipped;
  }
  ledger.rounds += 1;
  ledger.vectors += shipped;
  return out;
}

FosMetrics evaluate_fos(const ProblemSuite& suite, std::span<const WorkerState> workers) {
  if (workers.empty()) throw std::invalid_argument("evaluate_fos: no workers");
  MeanAccumulator acc(workers.front().x.dim());
  for (const auto& w : workers) acc.add(w.x);
  const ParamVector& x_bar = acc.mean();

  FosMetrics m;
  m.f_bar = suite.value(x_bar);
  m.grad_sq = sq_norm(true_global_gradient(suite, x_bar));
  double spread = 0.0;
  for (const auto& w : workers) spread += sq_distance(w.x, x_bar);
  m.consensus = spread / static_cast<double>(workers.size());
  return m;
}

std::optional<FirstHit> first_hit(const MetricsTrace& trace, double eps) {
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    if (!std::isnan(r.fos) && r.fos <= eps) {
      return FirstHit{k, r.s, r.t, r.ifo_total, r.comm_rounds};
    }
  }
  return std::nullopt;
}

double min_fos(const MetricsTrace& trace) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : trace.records) {
    if (std::isnan(r.fos)) continue;
    if (std::isnan(best) || r.fos < best) best = r.fos;
  }
  return best;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const MetricsTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.s << ',' << r.t << ',' << format_double(r.f_bar) << ',' << format_double(r.grad_sq)
        << ',' << format_double(r.consensus) << ',' << format_double(r.fos) << ','
        << r.ifo_total << ',' << r.comm_rounds << '\n';
  }
}

// ---------------------------------------------------------------------------
// Cluster

Cluster::Cluster(const ProblemSuite& suite, std::uint64_t seed, ClusterOptions options)
    : suite_(&suite), options_(options) {
  workers_.reserve(suite.workers());
  for (std::size_t i = 0; i < suite.workers(); ++i) {
    workers_.emplace_back(i, suite.objective(i), seed, suite.initial_point());
  }
  trace_.seed = seed;
  trace_.workers = suite.workers();
}

std::uint64_t Cluster::ifo_total() const noexcept {
  std::uint64_t total = 0;
  for (const auto& w : workers_) total += w.oracle.calls();
  return total;
}

void Cluster::for_each_worker(const std::function<void(WorkerState&)>& fn) {
  if (!options_.parallel_workers || workers_.size() < 2) {
    for (auto& w : workers_) fn(w);
    return;
  }
  std::vector<std::exception_ptr> errors(workers_.size());
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers_.size());
    for (std::size_t i = 0; i < workers_.size(); ++i) {
      threads.emplace_back([&, i] {
        try {
          fn(workers_[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Broadcast Cluster::sync(std::size_t s, std::size_t t, Payload payload) {
  Broadcast b = sync_round(workers_, payload, ledger_);
  trace_.comm_vectors = ledger_.vectors;
  if (options_.observer) options_.observer->on_sync(s, t, payload, workers_);
  return b;
}

void Cluster::record(std::size_t s, std::size_t t) {
  MetricsRecord r;
  r.s = s;
  r.t = t;
  r.ifo_total = ifo_total();
  r.comm_rounds = ledger_.rounds;
  const std::size_t cadence = options_.metrics_cadence;
  if (cadence != 0 && trace_.records.size() % cadence == 0) {
    FosMetrics m;
    try {
      m = evaluate_fos(*suite_, workers_);
    } catch (const std::domain_error& e) {
      trace_.outcome = Outcome::diverged;
      throw DivergedError(std::string("metrics overflow at epoch ") + std::to_string(s) +
                              ", iteration " + std::to_string(t) + ": " + e.what(),
                          trace_);
    }
    r.f_bar = m.f_bar;
    r.grad_sq = m.grad_sq;
    r.consensus = m.consensus;
    r.fos = m.grad_sq + m.consensus;
  } else {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    r.f_bar = r.grad_sq = r.consensus = r.fos = nan;
  }
  trace_.records.push_back(r);
  if (options_.observer) options_.observer->on_iterate(s, t, workers_);
}

void Cluster::notify_epoch_start(std::size_t s) {
  if (options_.observer) options_.observer->on_epoch_start(s, workers_);
}

void Cluster::check_finite(std::size_t s, std::size_t t) {
  for (const auto& w : workers_) {
    if (!all_finite(w.x) || !all_finite(w.est.v)) {
      trace_.outcome = Outcome::diverged;
      throw DivergedError("non-finite state on worker " + std::to_string(w.index) +
                              " at epoch " + std::to_string(s) + ", iteration " +
                              std::to_string(t),
                          trace_);
    }
  }
}

MetricsTrace Cluster::take_trace() {
  trace_.comm_vectors = ledger_.vectors;
  return std::move(trace_);
}

}  // namespace prspider
