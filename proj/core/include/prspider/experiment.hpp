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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prspider/algorithms.hpp"
#include "prspider/config.hpp"
#include "prspider/harness.hpp"

namespace prspider {

/// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitVerifyFailed = 4;

/// Environment variable that relocates relative output directories.
inline constexpr const char* kOutputRootEnv = "PRSPIDER_OUTPUT_ROOT";

struct SeedRun {
  std::uint64_t seed = 0;
  HyperParams params;
  MetricsTrace trace;
  std::string divergence;  // empty unless the run diverged
};

/// Runs one seed of an experiment. Divergence is reported in the result, not
/// thrown. Config problems raise ConfigError.
SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// IFO count with each SPIDER step charged B instead of 2B (PR-SPIDER only).
std::uint64_t single_count_ifo(const HyperParams& hp, AlgorithmKind kind, std::uint64_t ifo_total);

enum class SweepAxis { workers, period, eps, heterogeneity };

std::string_view to_string(SweepAxis axis) noexcept;
/// Accepts N, I, eps, heterogeneity. Throws ConfigError otherwise.
SweepAxis parse_axis(std::string_view name);

/// Copy of `base` with the axis set to `value`. With fixed_total_data, a
/// change of N rescales n so that N * n stays at its base value.
ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis, double value,
                            bool fixed_total_data);

struct SweepRow {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  std::size_t workers = 0;
  std::optional<FirstHit> hit;
  bool diverged = false;

  std::optional<std::uint64_t> ifo_at_eps() const;
  std::optional<std::uint64_t> comm_at_eps() const;
  std::optional<double> per_node_ifo() const;
};

/// One row per (axis value, seed, reporting eps). For the eps axis the swept
/// value is also the only reporting accuracy.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                std::span<const double> values, bool fixed_total_data);

/// Median of the values (mean of the middle pair for even counts).
double median(std::vector<double> values);

/// Summary statistics of one sweep cell over seeds.
struct SweepCell {
  double axis_value = 0.0;
  double eps = 0.0;
  std::size_t runs = 0;
  std::size_t hits = 0;
  double median_ifo = 0.0, min_ifo = 0.0, max_ifo = 0.0;
  double median_comm = 0.0, min_comm = 0.0, max_comm = 0.0;
  double median_per_node_ifo = 0.0;
};

/// Groups rows by (axis value, eps); statistics use hitting runs only (NaN
/// when none hit).
std::vector<SweepCell> summarize_sweep(std::span<const SweepRow> rows);

/// Resolved output directory (honors PRSPIDER_OUTPUT_ROOT for relative paths).
std::filesystem::path output_directory(const RunConfig& run);

/// `run <config>`: writes one trace CSV plus a JSON sidecar per seed and a
/// summary.csv; prints the summary. Returns an exit code.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

/// `sweep <config> --axis <name> --values <list>`.
int cmd_sweep(const std::filesystem::path& config_path, std::string_view axis,
              std::span<const double> values, bool fixed_total_data, std::ostream& out,
              std::ostream& err);

}  // namespace prspider
