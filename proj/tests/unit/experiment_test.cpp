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


#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "prspider/experiment.hpp"

namespace prspider {
namespace fs = std::filesystem;
namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("prspider_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path_ / file) << text;
    return path_ / file;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string explicit_config(const fs::path& out, double gamma) {
  return "problem: {family: quadratic, N: 2, n: 8, d: 3, seed: 3}\n"
         "algorithm:\n"
         "  name: pr-spider-finite\n"
         "  params: {gamma: " + std::to_string(gamma) + ", I: 2, m: 6, B: 2, S: 3}\n"
         "  eps: 0.01\n"
         "run:\n"
         "  seeds: [1, 2]\n"
         "  output_dir: " + out.string() + "\n";
}

TEST(CmdRun, WritesTracesSidecarsAndSummary) {
  TempDir tmp("run");
  const fs::path out = tmp.path() / "out";
  const fs::path cfg = tmp.write("c.yaml", explicit_config(out, 0.05));
  std::ostringstream log, err;
  ASSERT_EQ(cmd_run(cfg, log, err), kExitOk) << err.str();

  const std::string trace = slurp(out / "pr-spider-finite_seed1.csv");
  EXPECT_EQ(line_count(trace), 1u + 18u);
  EXPECT_EQ(trace.substr(0, trace.find('\n')), std::string(kTraceCsvHeader));
  EXPECT_TRUE(fs::exists(out / "pr-spider-finite_seed2.csv"));
  EXPECT_TRUE(fs::exists(out / "pr-spider-finite_seed1.json"));
  EXPECT_EQ(line_count(slurp(out / "summary.csv")), 3u);

  // A rerun reproduces every byte; the sidecar replays the same trace.
  std::ostringstream log2;
  ASSERT_EQ(cmd_run(cfg, log2, err), kExitOk);
  EXPECT_EQ(slurp(out / "pr-spider-finite_seed1.csv"), trace);
  const ExperimentConfig replay = load_config(out / "pr-spider-finite_seed1.json");
  std::ostringstream again;
  write_trace_csv(again, run_seed(replay, 1).trace);
  EXPECT_EQ(again.str(), trace);
}

TEST(CmdRun, ZeroStepNeverHits) {
  TempDir tmp("zero");
  const fs::path out = tmp.path() / "out";
  std::ostringstream log, err;
  ASSERT_EQ(cmd_run(tmp.write("c.yaml", explicit_config(out, 0.0)), log, err), kExitOk);
  const std::string summary = slurp(out / "summary.csv");
  EXPECT_NE(summary.find(",none,"), std::string::npos) << summary;
}

TEST(CmdRun, ExitCodes) {
  TempDir tmp("codes");
  std::ostringstream log, err;
  EXPECT_EQ(cmd_run(tmp.path() / "missing.yaml", log, err), kExitConfigError);
  EXPECT_EQ(cmd_run(tmp.write("bad.yaml", "problem: {N: -1}\n"), log, err), kExitConfigError);
  const std::string diverging =
      "problem: {family: quadratic, N: 2, n: 4, d: 2}\n"
      "algorithm:\n"
      "  name: pr-spider-finite\n"
      "  params: {gamma: 100, I: 1, m: 400, B: 1, S: 1}\n"
      "  allow_large_step: true\n"
      "  eps: 0.1\n"
      "run: {output_dir: " + (tmp.path() / "out").string() + "}\n";
  EXPECT_EQ(cmd_run(tmp.write("div.yaml", diverging), log, err), kExitDiverged);
}

TEST(CmdRun, OutputRootRelocatesRelativeDirectories) {
  TempDir tmp("root");
  RunConfig run;
  run.output_dir = "rel/dir";
  ::setenv(kOutputRootEnv, tmp.path().c_str(), 1);
  EXPECT_EQ(output_directory(run), tmp.path() / "rel/dir");
  run.output_dir = "/abs/dir";
  EXPECT_EQ(output_directory(run), fs::path("/abs/dir"));
  ::unsetenv(kOutputRootEnv);
  run.output_dir = "rel/dir";
  EXPECT_EQ(output_directory(run), fs::path("rel/dir"));
}

TEST(Sweep, AxisParsingAndApplication) {
  EXPECT_EQ(parse_axis("N"), SweepAxis::workers);
  EXPECT_EQ(parse_axis("I"), SweepAxis::period);
  EXPECT_EQ(parse_axis("eps"), SweepAxis::eps);
  EXPECT_EQ(parse_axis("heterogeneity"), SweepAxis::heterogeneity);
  EXPECT_THROW(parse_axis("gamma"), ConfigError);

  ExperimentConfig base;
  base.problem.workers = 4;
  base.problem.samples = 256;
  const ExperimentConfig eight = apply_axis(base, SweepAxis::workers, 8, true);
  EXPECT_EQ(eight.problem.workers, 8u);
  EXPECT_EQ(eight.problem.samples, 128u);
  EXPECT_EQ(apply_axis(base, SweepAxis::workers, 8, false).problem.samples, 256u);
  EXPECT_THROW(apply_axis(base, SweepAxis::workers, 2.5, false), ConfigError);
  EXPECT_THROW(apply_axis(base, SweepAxis::heterogeneity, -1.0, false), ConfigError);
  EXPECT_EQ(apply_axis(base, SweepAxis::eps, 0.3, false).summary_eps(), std::vector<double>{0.3});
}

TEST(Sweep, MedianAndSummary) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  std::vector<SweepRow> rows(3);
  rows[0].axis_value = rows[1].axis_value = rows[2].axis_value = 1.0;
  rows[0].workers = rows[1].workers = rows[2].workers = 2;
  rows[0].hit = FirstHit{4, 0, 4, 100, 5};
  rows[1].hit = FirstHit{2, 0, 2, 300, 3};
  const auto cells = summarize_sweep(rows);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].runs, 3u);
  EXPECT_EQ(cells[0].hits, 2u);
  EXPECT_EQ(cells[0].median_ifo, 200.0);
  EXPECT_EQ(cells[0].min_comm, 3.0);
  EXPECT_EQ(cells[0].median_per_node_ifo, 100.0);
}

ExperimentConfig quadratic_base(std::size_t n, std::size_t period) {
  ExperimentConfig c;
  c.problem.family = Family::quadratic;
  c.problem.workers = 4;
  c.problem.samples = n;
  c.problem.dim = 8;
  c.algorithm.kind = AlgorithmKind::pr_spider_finite;
  c.algorithm.eps = 0.05;
  c.algorithm.period = period;
  c.run.seeds = {1, 2, 3};
  return c;
}

TEST(Sweep, LongerPeriodCutsCommunication) {
  ExperimentConfig c = quadratic_base(64, 1);
  c.algorithm.auto_params = false;
  c.algorithm.gamma = 1.0 / 32.0;
  c.algorithm.epoch_length = 64;
  c.algorithm.batch = 1;
  c.algorithm.epochs = 8;
  const std::vector<double> periods{1, 2, 4};
  const auto cells = summarize_sweep(run_sweep(c, SweepAxis::period, periods, false));
  ASSERT_EQ(cells.size(), 3u);
  for (const auto& cell : cells) ASSERT_EQ(cell.hits, cell.runs);
  EXPECT_GT(cells[0].median_comm, cells[1].median_comm);
  EXPECT_GT(cells[1].median_comm, cells[2].median_comm);
  EXPECT_LE(cells[2].median_ifo, 2.0 * cells[0].median_ifo);
  EXPECT_LE(cells[0].median_ifo, 2.0 * cells[2].median_ifo);
}

TEST(Sweep, PerNodeWorkHalvesWithFixedTotalData) {
  ExperimentConfig c = quadratic_base(256, 4);
  const std::vector<double> workers{2, 4, 8};
  const auto cells = summarize_sweep(run_sweep(c, SweepAxis::workers, workers, true));
  ASSERT_EQ(cells.size(), 3u);
  for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
    const double ratio = cells[k].median_per_node_ifo / cells[k + 1].median_per_node_ifo;
    EXPECT_GE(ratio, 1.5) << "N=" << cells[k].axis_value;
    EXPECT_LE(ratio, 2.5) << "N=" << cells[k].axis_value;
  }
}

TEST(Sweep, CommunicationGrowsInverselyWithAccuracy) {
  ExperimentConfig c = quadratic_base(64, 4);
  const std::vector<double> eps{0.1, 0.01};
  const auto cells = summarize_sweep(run_sweep(c, SweepAxis::eps, eps, false));
  ASSERT_EQ(cells.size(), 2u);
  const double ratio = cells[1].median_comm / cells[0].median_comm;
  EXPECT_GE(ratio, 5.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Sweep, PeriodAxisRejectedForMinibatchSgd) {
  ExperimentConfig c = quadratic_base(64, 1);
  c.algorithm.kind = AlgorithmKind::par_sgd;
  EXPECT_THROW(apply_axis(c, SweepAxis::period, 2, false), ConfigError);
}

}  // namespace
}  // namespace prspider
