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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prspider/algorithms.hpp"
#include "prspider/problems.hpp"

namespace prspider {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AlgorithmKind { pr_spider_finite, pr_spider_online, par_sgd, par_restarted_sgd };

std::string_view to_string(AlgorithmKind kind) noexcept;
/// Throws ConfigError on an unknown name.
AlgorithmKind parse_algorithm(std::string_view name);
bool is_pr_spider(AlgorithmKind kind) noexcept;

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::pr_spider_finite;
  /// PR-SPIDER only: derive (gamma, m, B, S, n_b) from eps.
  bool auto_params = true;
  double eps = 0.05;
  std::size_t period = 1;
  /// Explicit PR-SPIDER parameters (auto_params == false).
  double gamma = 0.0;
  std::size_t epoch_length = 1;
  std::size_t batch = 1;
  std::size_t epochs = 1;
  std::size_t restart_batch = 1;
  /// Permit gamma > 1 / (8 L I) for ablations.
  bool allow_large_step = false;
  /// Baselines.
  std::size_t horizon = 1;
};

struct RunConfig {
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  std::size_t metrics_cadence = 1;
  /// Accuracies at which first hits are summarized; defaults to {eps}.
  std::vector<double> report_eps;
  bool parallel_workers = false;
};

struct ExperimentConfig {
  SuiteSpec problem;
  AlgorithmConfig algorithm;
  RunConfig run;

  /// report_eps, or {algorithm.eps} when none were given.
  std::vector<double> summary_eps() const;
};

/// Parses a YAML (or JSON) document. Errors name the offending key and its
/// line:column.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Resolves the hyperparameters a run will use and checks the
/// algorithm/problem pairing. For baselines only gamma, batch, period,
/// horizon and workers are meaningful.
HyperParams resolve_params(const ExperimentConfig& config, const ProblemSuite& suite);

/// JSON rendering with explicit (resolved) hyperparameters. Loading it back
/// reproduces the run exactly; `seed` narrows the seed list to one entry.
std::string echo_config(const ExperimentConfig& config, const HyperParams& resolved,
                        std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace prspider
