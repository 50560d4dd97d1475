// Serial reference runner against the OpenMP runner on full pipeline trials.

#include "irsce/channel_model.hpp"
#include "irsce/estimators.hpp"
#include "irsce/monte_carlo.hpp"
#include "irsce/pipeline.hpp"

#include <benchmark/benchmark.h>

using namespace irsce;

namespace {

std::vector<Sample> pipelineTrial(int trial) {
  SystemConfig c;
  c.n = 16;
  c.m1 = c.m2 = 8;
  c.k = 3;
  const CascadedChannelSet cc = cascade(genChannels(c, deriveSeed({1, static_cast<std::uint64_t>(trial)})));
  Rng rng(deriveSeed({2, static_cast<std::uint64_t>(trial)}));
  const EstimateReport rep = runProposed(cc, {}, c.sigma2(), rng);
  return {{"r", normalizedMse(rep.rHat, cc.users[0].r), 0.0, false}};
}

void BM_Serial(benchmark::State& state) {
  const int trials = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(runTrialsSerial(trials, pipelineTrial));
  state.SetItemsProcessed(state.iterations() * trials);
}

void BM_Parallel(benchmark::State& state) {
  const int trials = static_cast<int>(state.range(0));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(runTrialsParallel(trials, pipelineTrial, threads));
  state.SetItemsProcessed(state.iterations() * trials);
  state.counters["threads"] = resolveThreadCount(threads);
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Parallel)
    ->Args({64, 0})
    ->Args({256, 0})
    ->Args({256, 2})
    ->Args({256, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
