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


#include <benchmark/benchmark.h>

#include <vector>

#include "prspider/algorithms.hpp"
#include "prspider/estimator.hpp"

namespace {

using namespace prspider;

void BM_MeanReduce(benchmark::State& state) {
  const std::size_t workers = static_cast<std::size_t>(state.range(0));
  std::vector<ParamVector> vs;
  for (std::size_t i = 0; i < workers; ++i) vs.emplace_back(64, 0.5 + i);
  for (auto _ : state) benchmark::DoNotOptimize(mean_reduce(vs));
}
BENCHMARK(BM_MeanReduce)->Arg(4)->Arg(16)->Arg(64);

void BM_SpiderUpdate(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  const ProblemSuite s = make_nonconvex_suite(1, 256, 32, 0.5, 1);
  IfoOracle oracle(s.objective(0));
  EstimatorState est{ParamVector(32, 0.1), ParamVector(32, 0.0), 1};
  const ParamVector x(32, 0.05);
  std::uint64_t it = 0;
  for (auto _ : state) {
    RngStream rng(1, {0, 0, ++it});
    benchmark::DoNotOptimize(spider_update(est, oracle, x, batch, rng));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * batch));
}
BENCHMARK(BM_SpiderUpdate)->Arg(1)->Arg(8)->Arg(64);

void BM_PrSpiderRun(benchmark::State& state) {
  const ProblemSuite s = make_nonconvex_suite(4, 256, 10, 0.5, 7);
  HyperParams hp = choose_params_finite(4, 256, 2, s.smoothness(), s.gap_bound(), 0.01);
  hp.epochs = 10;
  RunOptions options;
  options.metrics_cadence = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_pr_spider_finite(s, hp, 1, options));
}
BENCHMARK(BM_PrSpiderRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MinibatchSgdRun(benchmark::State& state) {
  const ProblemSuite s = make_nonconvex_suite(4, 256, 10, 0.5, 7);
  for (auto _ : state) benchmark::DoNotOptimize(run_parallel_minibatch_sgd(s, 0.1, 64, 200, 1));
}
BENCHMARK(BM_MinibatchSgdRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
