// Sequential reference vs. pipelined search on the same positions.
//
//   ./pipeline_bench --benchmark_filter=Synthetic

#include "pmcts/mcts.hpp"
#include "pmcts/pipeline.hpp"
#include "pmcts/sched_sim.hpp"

#include <benchmark/benchmark.h>

using namespace pmcts;

namespace {

GameState synthetic(std::uint32_t playout_cost) { return SyntheticGameState({4, 8, playout_cost, 0}); }

void BM_SequentialTicTacToe(benchmark::State& state) {
  const UctParams params{1.0, static_cast<std::uint64_t>(state.range(0)), 0};
  for (auto _ : state) benchmark::DoNotOptimize(run_sequential(TicTacToeState{}, params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SequentialTicTacToe)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PipelineTicTacToe(benchmark::State& state) {
  const UctParams params{1.0, 1000, 0};
  PipelineConfig config;
  config.playout_lanes = static_cast<std::uint32_t>(state.range(0));
  config.in_flight_limit = static_cast<std::uint32_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(TicTacToeState{}, params, config).result);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_PipelineTicTacToe)->Args({1, 1})->Args({4, 8})->Unit(benchmark::kMillisecond)->UseRealTime();

// Heavy playouts: the case the pipeline is meant for.
void BM_SequentialSynthetic(benchmark::State& state) {
  const GameState root = synthetic(static_cast<std::uint32_t>(state.range(0)));
  const UctParams params{1.0, 500, 0};
  for (auto _ : state) benchmark::DoNotOptimize(run_sequential(root, params));
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_SequentialSynthetic)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_PipelineSynthetic(benchmark::State& state) {
  const GameState root = synthetic(static_cast<std::uint32_t>(state.range(0)));
  const UctParams params{1.0, 500, 0};
  PipelineConfig config;
  config.playout_lanes = static_cast<std::uint32_t>(state.range(1));
  config.in_flight_limit = 2 * config.playout_lanes;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(root, params, config).result);
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_PipelineSynthetic)
    ->ArgsProduct({{20}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_Simulate(benchmark::State& state) {
  const auto config = sim::equal_stages(4, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(config).makespan);
}
BENCHMARK(BM_Simulate)->Arg(64)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
