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


#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prspider/experiment.hpp"
#include "prspider/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulated parallel-restarted SPIDER experiments"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  run->add_option("config", config, "YAML or JSON experiment config")->required();

  std::string axis;
  std::vector<double> values;
  bool fixed_total = false;
  auto* sweep = app.add_subcommand("sweep", "Repeat an experiment over one axis");
  sweep->add_option("config", config, "YAML or JSON experiment config")->required();
  sweep->add_option("--axis", axis, "N, I, eps or heterogeneity")->required();
  sweep->add_option("--values", values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep->add_flag("--fixed-total-data", fixed_total, "keep N * n constant when sweeping N");

  std::string suite = "all";
  std::string inject;
  auto* verify = app.add_subcommand("verify", "Run the built-in property suites");
  verify->add_option("--suite", suite, "finite, online, baselines or all");
  verify->add_option("--inject-bug", inject, "test hook: skip-epoch-restart")
      ->check(CLI::IsMember({"skip-epoch-restart"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : prspider::kExitConfigError;
  }

  try {
    if (*run) return prspider::cmd_run(config, std::cout, std::cerr);
    if (*sweep) {
      return prspider::cmd_sweep(config, axis, values, fixed_total, std::cout, std::cerr);
    }
    return prspider::cmd_verify(suite, !inject.empty(), std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
