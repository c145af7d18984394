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


#include "prspider/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace prspider {
namespace {

using Json = nlohmann::ordered_json;

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) return "";
  return " (line " + std::to_string(mark.line + 1) + ", column " +
         std::to_string(mark.column + 1) + ")";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg + where(node));
}

void reject_unknown_keys(const YAML::Node& block, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& kv : block) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail(kv.first, path + "." + key, "unknown key");
  }
}

template <class T>
T scalar_as(const YAML::Node& node, const std::string& path, const char* expected) {
  if (!node.IsScalar()) fail(node, path, std::string("expected ") + expected);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, path, std::string("expected ") + expected + ", got '" + node.Scalar() + "'");
  }
}

std::size_t positive_count(const YAML::Node& node, const std::string& path) {
  const auto v = scalar_as<long long>(node, path, "a positive integer");
  if (v < 1) fail(node, path, "must be >= 1");
  return static_cast<std::size_t>(v);
}

double real(const YAML::Node& node, const std::string& path) {
  return scalar_as<double>(node, path, "a number");
}

double positive_real(const YAML::Node& node, const std::string& path) {
  const double v = real(node, path);
  if (!(v > 0.0)) fail(node, path, "must be > 0");
  return v;
}

template <class Fn>
void optional_key(const YAML::Node& block, const char* key, Fn&& fn) {
  if (const YAML::Node child = block[key]) fn(child);
}

YAML::Node required_block(const YAML::Node& root, const char* key) {
  const YAML::Node block = root[key];
  if (!block) throw ConfigError(std::string("missing required block '") + key + "'" + where(root));
  if (!block.IsMap()) fail(block, key, "expected a mapping");
  return block;
}

SuiteSpec parse_problem(const YAML::Node& block) {
  reject_unknown_keys(block, "problem", {"family", "N", "n", "d", "heterogeneity", "seed", "population"});
  SuiteSpec spec;
  optional_key(block, "family", [&](const YAML::Node& n) {
    try {
      spec.family = parse_family(scalar_as<std::string>(n, "problem.family", "a family name"));
    } catch (const std::invalid_argument& e) {
      fail(n, "problem.family", e.what());
    }
  });
  optional_key(block, "N", [&](const YAML::Node& n) { spec.workers = positive_count(n, "problem.N"); });
  optional_key(block, "n", [&](const YAML::Node& n) {
    if (n.IsScalar() && n.Scalar() == "online") {
      spec.samples = std::nullopt;
    } else {
      spec.samples = positive_count(n, "problem.n");
    }
  });
  optional_key(block, "d", [&](const YAML::Node& n) { spec.dim = positive_count(n, "problem.d"); });
  optional_key(block, "heterogeneity", [&](const YAML::Node& n) {
    spec.heterogeneity = real(n, "problem.heterogeneity");
    if (!(spec.heterogeneity >= 0.0)) fail(n, "problem.heterogeneity", "must be >= 0");
  });
  optional_key(block, "seed", [&](const YAML::Node& n) {
    spec.seed = scalar_as<std::uint64_t>(n, "problem.seed", "an unsigned integer");
  });
  optional_key(block, "population", [&](const YAML::Node& n) {
    spec.population = positive_count(n, "problem.population");
  });
  return spec;
}

AlgorithmConfig parse_algorithm_block(const YAML::Node& block) {
  reject_unknown_keys(block, "algorithm",
                      {"name", "params", "eps", "I", "allow_large_step", "gamma", "batch", "horizon"});
  AlgorithmConfig a;
  const YAML::Node name = block["name"];
  if (!name) fail(block, "algorithm.name", "missing");
  try {
    a.kind = parse_algorithm(scalar_as<std::string>(name, "algorithm.name", "an algorithm name"));
  } catch (const ConfigError& e) {
    fail(name, "algorithm.name", e.what());
  }

  optional_key(block, "eps", [&](const YAML::Node& n) { a.eps = positive_real(n, "algorithm.eps"); });
  optional_key(block, "I", [&](const YAML::Node& n) { a.period = positive_count(n, "algorithm.I"); });
  optional_key(block, "allow_large_step", [&](const YAML::Node& n) {
    a.allow_large_step = scalar_as<bool>(n, "algorithm.allow_large_step", "true or false");
  });

  if (is_pr_spider(a.kind)) {
    for (const char* key : {"gamma", "batch", "horizon"}) {
      if (block[key]) {
        fail(block[key], std::string("algorithm.") + key,
             "baseline-only key; PR-SPIDER takes 'params'");
      }
    }
    const YAML::Node params = block["params"];
    if (!params || (params.IsScalar() && params.Scalar() == "auto")) {
      a.auto_params = true;
      if (!block["eps"]) fail(block, "algorithm.eps", "required when params is auto");
    } else if (params.IsMap()) {
      a.auto_params = false;
      reject_unknown_keys(params, "algorithm.params", {"gamma", "I", "m", "B", "S", "n_b"});
      for (const char* key : {"gamma", "m", "B", "S"}) {
        if (!params[key]) fail(params, std::string("algorithm.params.") + key, "missing");
      }
      a.gamma = real(params["gamma"], "algorithm.params.gamma");
      if (!(a.gamma >= 0.0)) fail(params["gamma"], "algorithm.params.gamma", "must be >= 0");
      optional_key(params, "I", [&](const YAML::Node& n) { a.period = positive_count(n, "algorithm.params.I"); });
      a.epoch_length = positive_count(params["m"], "algorithm.params.m");
      a.batch = positive_count(params["B"], "algorithm.params.B");
      a.epochs = positive_count(params["S"], "algorithm.params.S");
      optional_key(params, "n_b", [&](const YAML::Node& n) {
        a.restart_batch = positive_count(n, "algorithm.params.n_b");
      });
    } else {
      fail(params, "algorithm.params", "expected 'auto' or a mapping");
    }
  } else {
    if (block["params"]) fail(block["params"], "algorithm.params", "baselines take gamma/batch/horizon");
    a.auto_params = false;
    for (const char* key : {"gamma", "batch", "horizon"}) {
      if (!block[key]) fail(block, std::string("algorithm.") + key, "missing");
    }
    a.gamma = real(block["gamma"], "algorithm.gamma");
    if (!(a.gamma >= 0.0)) fail(block["gamma"], "algorithm.gamma", "must be >= 0");
    a.batch = positive_count(block["batch"], "algorithm.batch");
    a.horizon = positive_count(block["horizon"], "algorithm.horizon");
    if (a.kind == AlgorithmKind::par_sgd) a.period = 1;
  }
  return a;
}

RunConfig parse_run(const YAML::Node& block) {
  reject_unknown_keys(block, "run",
                      {"seeds", "output_dir", "metrics_cadence", "report_eps", "parallel_workers"});
  RunConfig r;
  optional_key(block, "seeds", [&](const YAML::Node& n) {
    if (!n.IsSequence() || n.size() == 0) fail(n, "run.seeds", "expected a non-empty list");
    r.seeds.clear();
    for (const auto& s : n) r.seeds.push_back(scalar_as<std::uint64_t>(s, "run.seeds", "an unsigned integer"));
  });
  optional_key(block, "output_dir", [&](const YAML::Node& n) {
    r.output_dir = scalar_as<std::string>(n, "run.output_dir", "a path");
  });
  optional_key(block, "metrics_cadence", [&](const YAML::Node& n) {
    const auto v = scalar_as<long long>(n, "run.metrics_cadence", "a non-negative integer");
    if (v < 0) fail(n, "run.metrics_cadence", "must be >= 0");
    r.metrics_cadence = static_cast<std::size_t>(v);
  });
  optional_key(block, "report_eps", [&](const YAML::Node& n) {
    if (!n.IsSequence()) fail(n, "run.report_eps", "expected a list");
    for (const auto& e : n) r.report_eps.push_back(positive_real(e, "run.report_eps"));
  });
  optional_key(block, "parallel_workers", [&](const YAML::Node& n) {
    r.parallel_workers = scalar_as<bool>(n, "run.parallel_workers", "true or false");
  });
  return r;
}

}  // namespace

std::string_view to_string(AlgorithmKind kind) noexcept {
  switch (kind) {
    case AlgorithmKind::pr_spider_finite:
      return "pr-spider-finite";
    case AlgorithmKind::pr_spider_online:
      return "pr-spider-online";
    case AlgorithmKind::par_sgd:
      return "par-sgd";
    case AlgorithmKind::par_restarted_sgd:
      return "par-restarted-sgd";
  }
  return "unknown";
}

AlgorithmKind parse_algorithm(std::string_view name) {
  for (auto k : {AlgorithmKind::pr_spider_finite, AlgorithmKind::pr_spider_online,
                 AlgorithmKind::par_sgd, AlgorithmKind::par_restarted_sgd}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected pr-spider-finite, pr-spider-online, par-sgd or par-restarted-sgd)");
}

bool is_pr_spider(AlgorithmKind kind) noexcept {
  return kind == AlgorithmKind::pr_spider_finite || kind == AlgorithmKind::pr_spider_online;
}

std::vector<double> ExperimentConfig::summary_eps() const {
  if (!run.report_eps.empty()) return run.report_eps;
  return {algorithm.eps};
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("config root must be a mapping");
  reject_unknown_keys(root, "config", {"problem", "algorithm", "run", "result"});

  ExperimentConfig cfg;
  cfg.problem = parse_problem(required_block(root, "problem"));
  cfg.algorithm = parse_algorithm_block(required_block(root, "algorithm"));
  if (const YAML::Node run = root["run"]) {
    if (!run.IsMap()) fail(run, "run", "expected a mapping");
    cfg.run = parse_run(run);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

HyperParams resolve_params(const ExperimentConfig& config, const ProblemSuite& suite) {
  const auto& a = config.algorithm;
  HyperParams hp;
  hp.workers = suite.workers();

  if (!is_pr_spider(a.kind)) {
    hp.gamma = a.gamma;
    hp.batch = a.batch;
    hp.period = a.kind == AlgorithmKind::par_sgd ? 1 : a.period;
    hp.epoch_length = a.horizon;
    hp.epochs = 1;
    return hp;
  }

  const bool finite = a.kind == AlgorithmKind::pr_spider_finite;
  if (finite && !suite.is_finite_sum()) {
    throw ConfigError("algorithm pr-spider-finite needs a finite-sum problem (problem.n is 'online')");
  }
  if (a.auto_params) {
    const double gap = suite.gap_bound();
    if (finite) {
      hp = choose_params_finite(suite.workers(), *suite.samples_per_worker(), a.period,
                                suite.smoothness(), gap, a.eps);
    } else {
      hp = choose_params_online(suite.workers(), suite.variance_bound(), a.period,
                                suite.smoothness(), gap, a.eps);
    }
    return hp;
  }

  hp.gamma = a.gamma;
  hp.period = a.period;
  hp.epoch_length = a.epoch_length;
  hp.batch = a.batch;
  hp.epochs = a.epochs;
  hp.restart_batch = finite ? suite.samples_per_worker().value() : a.restart_batch;
  const double limit = max_step_size(suite.smoothness(), hp.period);
  if (!a.allow_large_step && hp.gamma > limit * (1.0 + 1e-12)) {
    throw ConfigError("algorithm.params.gamma = " + std::to_string(hp.gamma) +
                      " exceeds 1/(8 L I) = " + std::to_string(limit) +
                      "; set allow_large_step: true to override");
  }
  return hp;
}

std::string echo_config(const ExperimentConfig& config, const HyperParams& resolved,
                        std::optional<std::uint64_t> seed) {
  const auto& p = config.problem;
  const auto& a = config.algorithm;
  const auto& r = config.run;

  Json problem;
  problem["family"] = std::string(to_string(p.family));
  problem["N"] = p.workers;
  if (p.samples) {
    problem["n"] = *p.samples;
  } else {
    problem["n"] = "online";
  }
  problem["d"] = p.dim;
  problem["heterogeneity"] = p.heterogeneity;
  problem["seed"] = p.seed;
  problem["population"] = p.population;

  Json algorithm;
  algorithm["name"] = std::string(to_string(a.kind));
  algorithm["eps"] = a.eps;
  algorithm["allow_large_step"] = a.allow_large_step;
  if (is_pr_spider(a.kind)) {
    Json params;
    params["gamma"] = resolved.gamma;
    params["I"] = resolved.period;
    params["m"] = resolved.epoch_length;
    params["B"] = resolved.batch;
    params["S"] = resolved.epochs;
    params["n_b"] = resolved.restart_batch;
    algorithm["params"] = params;
  } else {
    algorithm["gamma"] = resolved.gamma;
    algorithm["batch"] = resolved.batch;
    algorithm["horizon"] = resolved.epoch_length;
    algorithm["I"] = resolved.period;
  }

  Json run;
  run["seeds"] = seed ? std::vector<std::uint64_t>{*seed} : r.seeds;
  run["output_dir"] = r.output_dir;
  run["metrics_cadence"] = r.metrics_cadence;
  run["report_eps"] = config.summary_eps();
  run["parallel_workers"] = r.parallel_workers;

  Json root;
  root["problem"] = problem;
  root["algorithm"] = algorithm;
  root["run"] = run;
  return root.dump(2);
}

}  // namespace prspider
