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


#include "prspider/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "json.hpp"
#include "prspider/errors.hpp"

namespace prspider {
namespace {

using Json = nlohmann::ordered_json;

std::string trace_stem(const ExperimentConfig& config, std::uint64_t seed) {
  return std::string(to_string(config.algorithm.kind)) + "_seed" + std::to_string(seed);
}

std::string optional_count(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : std::string("none");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::size_t integral_axis_value(double value, std::string_view axis) {
  if (!(value >= 1.0) || value != std::floor(value)) {
    throw ConfigError("sweep value " + format_double(value) + " for axis " + std::string(axis) +
                      " must be a positive integer");
  }
  return static_cast<std::size_t>(value);
}

void write_sidecar(const std::filesystem::path& path, const ExperimentConfig& config,
                   const SeedRun& run) {
  Json root = Json::parse(echo_config(config, run.params, run.seed));
  const auto& trace = run.trace;
  const std::uint64_t ifo = trace.records.empty() ? 0 : trace.records.back().ifo_total;
  Json result;
  result["seed"] = run.seed;
  result["outcome"] = trace.outcome == Outcome::completed ? "completed" : "diverged";
  result["records"] = trace.records.size();
  result["ifo_total_at_last_record"] = ifo;
  result["ifo_single_count_at_last_record"] =
      single_count_ifo(run.params, config.algorithm.kind, ifo);
  result["comm_rounds_at_last_record"] = trace.records.empty() ? 0 : trace.records.back().comm_rounds;
  result["comm_vectors"] = trace.comm_vectors;
  if (!run.divergence.empty()) result["divergence"] = run.divergence;
  root["result"] = result;
  auto out = open_output(path);
  out << root.dump(2) << '\n';
}

void print_cells(std::ostream& out, std::span<const SweepCell> cells, std::string_view axis) {
  out << axis << ",eps,runs,hits,median_ifo,min_ifo,max_ifo,median_comm,min_comm,max_comm,"
         "median_per_node_ifo\n";
  for (const auto& c : cells) {
    out << format_double(c.axis_value) << ',' << format_double(c.eps) << ',' << c.runs << ','
        << c.hits << ',' << format_double(c.median_ifo) << ',' << format_double(c.min_ifo) << ','
        << format_double(c.max_ifo) << ',' << format_double(c.median_comm) << ','
        << format_double(c.min_comm) << ',' << format_double(c.max_comm) << ','
        << format_double(c.median_per_node_ifo) << '\n';
  }
}

}  // namespace

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  const ProblemSuite suite = make_suite(config.problem);
  SeedRun result;
  result.seed = seed;
  result.params = resolve_params(config, suite);

  RunOptions options;
  options.parallel_workers = config.run.parallel_workers;
  options.metrics_cadence = config.run.metrics_cadence;
  options.config_echo = echo_config(config, result.params, seed);

  const auto& hp = result.params;
  try {
    switch (config.algorithm.kind) {
      case AlgorithmKind::pr_spider_finite:
        result.trace = run_pr_spider_finite(suite, hp, seed, options);
        break;
      case AlgorithmKind::pr_spider_online:
        result.trace = run_pr_spider_online(suite, hp, seed, options);
        break;
      case AlgorithmKind::par_sgd:
        result.trace = run_parallel_minibatch_sgd(suite, hp.gamma, hp.batch, hp.epoch_length,
                                                  seed, options);
        break;
      case AlgorithmKind::par_restarted_sgd:
        result.trace = run_parallel_restarted_sgd(suite, hp.gamma, hp.batch, hp.period,
                                                  hp.epoch_length, seed, options);
        break;
    }
  } catch (const DivergedError& e) {
    result.trace = e.trace();
    result.divergence = e.what();
  } catch (const UnsupportedOperation& e) {
    throw ConfigError(e.what());
  }
  return result;
}

std::uint64_t single_count_ifo(const HyperParams& hp, AlgorithmKind kind,
                               std::uint64_t ifo_total) {
  if (!is_pr_spider(kind)) return ifo_total;
  const std::uint64_t inner = static_cast<std::uint64_t>(hp.epochs) * (hp.epoch_length - 1) *
                              hp.workers * hp.batch;
  return ifo_total >= inner ? ifo_total - inner : ifo_total;
}

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::workers:
      return "N";
    case SweepAxis::period:
      return "I";
    case SweepAxis::eps:
      return "eps";
    case SweepAxis::heterogeneity:
      return "heterogeneity";
  }
  return "unknown";
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "N") return SweepAxis::workers;
  if (name == "I") return SweepAxis::period;
  if (name == "eps") return SweepAxis::eps;
  if (name == "heterogeneity") return SweepAxis::heterogeneity;
  throw ConfigError("unknown sweep axis '" + std::string(name) +
                    "' (expected N, I, eps or heterogeneity)");
}

ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis, double value,
                            bool fixed_total_data) {
  ExperimentConfig cfg = base;
  switch (axis) {
    case SweepAxis::workers: {
      const std::size_t workers = integral_axis_value(value, "N");
      if (fixed_total_data && base.problem.samples) {
        const double total = static_cast<double>(base.problem.workers * *base.problem.samples);
        const auto n = static_cast<std::size_t>(std::llround(total / static_cast<double>(workers)));
        if (n == 0) throw ConfigError("sweep: N = " + std::to_string(workers) + " leaves no samples per worker");
        cfg.problem.samples = n;
      }
      cfg.problem.workers = workers;
      break;
    }
    case SweepAxis::period:
      if (base.algorithm.kind == AlgorithmKind::par_sgd) {
        throw ConfigError("sweep: par-sgd has no averaging period");
      }
      cfg.algorithm.period = integral_axis_value(value, "I");
      break;
    case SweepAxis::eps:
      if (!(value > 0.0)) throw ConfigError("sweep: eps values must be > 0");
      cfg.algorithm.eps = value;
      cfg.run.report_eps = {value};
      break;
    case SweepAxis::heterogeneity:
      if (!(value >= 0.0)) throw ConfigError("sweep: heterogeneity values must be >= 0");
      cfg.problem.heterogeneity = value;
      break;
  }
  return cfg;
}

std::optional<std::uint64_t> SweepRow::ifo_at_eps() const {
  if (!hit) return std::nullopt;
  return hit->ifo_total;
}

std::optional<std::uint64_t> SweepRow::comm_at_eps() const {
  if (!hit) return std::nullopt;
  return hit->comm_rounds;
}

std::optional<double> SweepRow::per_node_ifo() const {
  if (!hit || workers == 0) return std::nullopt;
  return static_cast<double>(hit->ifo_total) / static_cast<double>(workers);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                std::span<const double> values, bool fixed_total_data) {
  std::vector<SweepRow> rows;
  for (double value : values) {
    const ExperimentConfig cfg = apply_axis(base, axis, value, fixed_total_data);
    for (std::uint64_t seed : cfg.run.seeds) {
      const SeedRun run = run_seed(cfg, seed);
      for (double eps : cfg.summary_eps()) {
        SweepRow row;
        row.axis_value = value;
        row.seed = seed;
        row.eps = eps;
        row.workers = cfg.problem.workers;
        row.hit = first_hit(run.trace, eps);
        row.diverged = !run.divergence.empty();
        rows.push_back(row);
      }
    }
  }
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<SweepCell> summarize_sweep(std::span<const SweepRow> rows) {
  std::map<std::pair<double, double>, std::vector<const SweepRow*>> groups;
  std::vector<std::pair<double, double>> order;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.axis_value, r.eps);
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(&r);
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepCell> cells;
  for (const auto& key : order) {
    const auto& members = groups[key];
    SweepCell c;
    c.axis_value = key.first;
    c.eps = key.second;
    c.runs = members.size();
    std::vector<double> ifo, comm, per_node;
    for (const SweepRow* r : members) {
      if (!r->hit) continue;
      ifo.push_back(static_cast<double>(*r->ifo_at_eps()));
      comm.push_back(static_cast<double>(*r->comm_at_eps()));
      per_node.push_back(*r->per_node_ifo());
    }
    c.hits = ifo.size();
    c.median_ifo = median(ifo);
    c.median_comm = median(comm);
    c.median_per_node_ifo = median(per_node);
    c.min_ifo = ifo.empty() ? nan : *std::min_element(ifo.begin(), ifo.end());
    c.max_ifo = ifo.empty() ? nan : *std::max_element(ifo.begin(), ifo.end());
    c.min_comm = comm.empty() ? nan : *std::min_element(comm.begin(), comm.end());
    c.max_comm = comm.empty() ? nan : *std::max_element(comm.begin(), comm.end());
    cells.push_back(c);
  }
  return cells;
}

std::filesystem::path output_directory(const RunConfig& run) {
  std::filesystem::path dir(run.output_dir);
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && dir.is_relative()) {
    return std::filesystem::path(root) / dir;
  }
  return dir;
}

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const auto dir = output_directory(config.run);
  std::filesystem::create_directories(dir);
  const auto eps_list = config.summary_eps();

  std::vector<SeedRun> runs;
  bool diverged = false;
  try {
    for (std::uint64_t seed : config.run.seeds) {
      SeedRun run = run_seed(config, seed);
      const std::string stem = trace_stem(config, seed);
      {
        auto csv = open_output(dir / (stem + ".csv"));
        write_trace_csv(csv, run.trace);
      }
      write_sidecar(dir / (stem + ".json"), config, run);
      if (!run.divergence.empty()) {
        err << "seed " << seed << " diverged: " << run.divergence << '\n';
        diverged = true;
      }
      runs.push_back(std::move(run));
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  auto summary = open_output(dir / "summary.csv");
  summary << "seed,outcome,records,eps,hit,s,t,ifo_at_eps,comm_at_eps,per_node_ifo\n";
  std::vector<SweepRow> rows;
  for (const auto& run : runs) {
    for (double eps : eps_list) {
      const auto hit = first_hit(run.trace, eps);
      summary << run.seed << ',' << (run.divergence.empty() ? "completed" : "diverged") << ','
              << run.trace.records.size() << ',' << format_double(eps) << ','
              << (hit ? "yes" : "none") << ',';
      if (hit) {
        summary << hit->s << ',' << hit->t << ',' << hit->ifo_total << ',' << hit->comm_rounds
                << ','
                << format_double(static_cast<double>(hit->ifo_total) /
                                 static_cast<double>(run.trace.workers));
      } else {
        summary << ",,none,none,none";
      }
      summary << '\n';
      rows.push_back(SweepRow{0.0, run.seed, eps, run.trace.workers, hit, !run.divergence.empty()});
    }
  }

  out << "wrote " << runs.size() << " trace(s) to " << dir.string() << '\n';
  const auto cells = summarize_sweep(rows);
  out << "eps,runs,hits,median_ifo,min_ifo,max_ifo,median_comm,min_comm,max_comm\n";
  for (const auto& c : cells) {
    out << format_double(c.eps) << ',' << c.runs << ',' << c.hits << ','
        << (c.hits ? format_double(c.median_ifo) : "none") << ','
        << (c.hits ? format_double(c.min_ifo) : "none") << ','
        << (c.hits ? format_double(c.max_ifo) : "none") << ','
        << (c.hits ? format_double(c.median_comm) : "none") << ','
        << (c.hits ? format_double(c.min_comm) : "none") << ','
        << (c.hits ? format_double(c.max_comm) : "none") << '\n';
  }
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const std::filesystem::path& config_path, std::string_view axis_name,
              std::span<const double> values, bool fixed_total_data, std::ostream& out,
              std::ostream& err) {
  std::vector<SweepRow> rows;
  ExperimentConfig config;
  SweepAxis axis{};
  try {
    config = load_config(config_path);
    axis = parse_axis(axis_name);
    if (values.empty()) throw ConfigError("sweep: --values must not be empty");
    rows = run_sweep(config, axis, values, fixed_total_data);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const auto dir = output_directory(config.run);
  std::filesystem::create_directories(dir);
  const std::string base = "sweep_" + std::string(to_string(axis));
  {
    auto table = open_output(dir / (base + ".csv"));
    table << "axis,value,seed,eps,workers,hit,ifo_at_eps,comm_at_eps,per_node_ifo\n";
    for (const auto& r : rows) {
      table << to_string(axis) << ',' << format_double(r.axis_value) << ',' << r.seed << ','
            << format_double(r.eps) << ',' << r.workers << ','
            << (r.diverged ? "diverged" : (r.hit ? "yes" : "none")) << ','
            << optional_count(r.ifo_at_eps()) << ',' << optional_count(r.comm_at_eps()) << ','
            << (r.per_node_ifo() ? format_double(*r.per_node_ifo()) : "none") << '\n';
    }
  }
  const auto cells = summarize_sweep(rows);
  {
    auto summary = open_output(dir / (base + "_summary.csv"));
    print_cells(summary, cells, to_string(axis));
  }
  print_cells(out, cells, to_string(axis));

  const bool any_diverged = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.diverged; });
  return any_diverged ? kExitDiverged : kExitOk;
}

}  // namespace prspider
