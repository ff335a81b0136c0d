/*
 * Copyright 2026 The spirekit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spirekit/annotate.h"
#include "spirekit/balance.h"
#include "spirekit/metrics.h"
#include "spirekit/sim.h"

namespace spirekit {
namespace {

void BM_SolveDeltaRemoval(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(1, 100000);
  std::vector<SplitCounts> counts;
  // Both N > JM JS keeps every vector on the removal branch.
  while (counts.size() < 256) {
    const int b = u(rng), jm = u(rng), js = u(rng), n = u(rng);
    if (static_cast<long long>(b) * n > static_cast<long long>(jm) * js) {
      counts.emplace_back(b, jm, js, n);
    }
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveDeltaRemoval(counts[i++ % counts.size()]));
  }
}
BENCHMARK(BM_SolveDeltaRemoval);

std::vector<PredictionRecord> RandomPredictions(std::size_t n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PredictionRecord> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Split s = kAllSplits[i % 4];
    preds[i] = {std::to_string(i), s, HasMain(s), u(rng), true};
  }
  return preds;
}

void BM_PrecisionRecallCurve(benchmark::State& state) {
  const auto preds = RandomPredictions(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(PrecisionRecallCurve(preds, BalancedWeights::Uniform()));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PrecisionRecallCurve)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

void BM_ClusterSegments(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<Segment> segments(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < segments.size(); ++i) {
    segments[i].id = "s" + std::to_string(i);
    segments[i].image_id = "i" + std::to_string(i / 4);
    segments[i].mean_color = {u(rng), u(rng), u(rng)};
  }
  for (auto _ : state) benchmark::DoNotOptimize(ClusterSegments(segments));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ClusterSegments)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_Train(benchmark::State& state) {
  sim::SyntheticConfig config;
  config.n = static_cast<int>(state.range(0));
  const auto data = sim::Generate(0.9, config);
  sim::TrainOptions options;
  options.epochs = 100;
  for (auto _ : state) benchmark::DoNotOptimize(sim::Train(data, options));
}
BENCHMARK(BM_Train)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace spirekit

// The packaged benchmark_main archive is LTO bytecode from another compiler
// release, so the entry point is defined here.
BENCHMARK_MAIN();
