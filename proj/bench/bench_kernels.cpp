// Serial reference vs OpenMP kernels on one default-scenario run.

#include <benchmark/benchmark.h>

#include "artgnss/graph.hpp"
#include "artgnss/kernels.hpp"
#include "artgnss/scenario.hpp"

using namespace artgnss;

namespace {

struct Inputs {
  ScenarioAsset asset = default_scenario();
  SimulatedRun run = simulate_scenario(asset, 1, 10.0);
  std::vector<kernels::EpochObservations> epochs = kernels::group_by_epoch(run.observations);
  Ephemeris eph = make_ephemeris(asset);
  std::vector<EpochSolution> solutions = kernels::solve_epochs_serial(epochs, eph, asset.base_enu, asset.rtk);
  FactorGraph graph = build_graph(solutions, asset.base_enu, asset.geometry, asset.graph);
  EpochStates states = initial_states(solutions, asset.base_enu);
};

const Inputs& inputs() {
  static const Inputs in;
  return in;
}

void BM_SolveEpochsSerial(benchmark::State& st) {
  const Inputs& in = inputs();
  for (auto _ : st)
    benchmark::DoNotOptimize(kernels::solve_epochs_serial(in.epochs, in.eph, in.asset.base_enu, in.asset.rtk));
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(in.epochs.size()));
}

void BM_SolveEpochsParallel(benchmark::State& st) {
  const Inputs& in = inputs();
  for (auto _ : st)
    benchmark::DoNotOptimize(kernels::solve_epochs_parallel(in.epochs, in.eph, in.asset.base_enu, in.asset.rtk));
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(in.epochs.size()));
}

void BM_LinearizeSerial(benchmark::State& st) {
  const Inputs& in = inputs();
  std::vector<FactorLinearization> out;
  for (auto _ : st) {
    kernels::linearize_serial(in.graph, in.states, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(in.graph.factors().size()));
}

void BM_LinearizeParallel(benchmark::State& st) {
  const Inputs& in = inputs();
  std::vector<FactorLinearization> out;
  for (auto _ : st) {
    kernels::linearize_parallel(in.graph, in.states, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(in.graph.factors().size()));
}

}  // namespace

BENCHMARK(BM_SolveEpochsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveEpochsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinearizeSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LinearizeParallel)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
