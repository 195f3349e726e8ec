#include <benchmark/benchmark.h>

#include "polarcbo/cluster.hpp"
#include "polarcbo/means.hpp"

namespace {

using namespace polarcbo;

Ensemble make_ensemble(int j, int d) {
  RngStream rng(7, kPositionInitStream);
  return init_uniform(j, d, -3.0, 3.0, rng);
}

void BM_PolarizedMeans(benchmark::State& state) {
  const int j = static_cast<int>(state.range(0));
  const Ensemble ensemble = make_ensemble(j, 2);
  const Objective objective = multimodal_ackley(2);
  const Kernel kernel = Kernel::gaussian(0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        polarized_means(ensemble, kernel, objective, 1.0));
  }
  state.SetComplexityN(j);
}
BENCHMARK(BM_PolarizedMeans)->RangeMultiplier(2)->Range(25, 400)->Complexity();

void BM_ClusterStep(benchmark::State& state) {
  const int j = static_cast<int>(state.range(0));
  const Ensemble ensemble = make_ensemble(j, 10);
  const Objective objective = multimodal_ackley(10);
  const Kernel kernel = Kernel::gaussian(0.1);
  RngStream rng(3, kClusterInitStream);
  const ClusterState state0 =
      init_cluster(ensemble, objective, 30.0, 10, 5.0, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cluster_step(state0, ensemble, kernel, objective, 30.0));
  }
  state.SetComplexityN(j);
}
BENCHMARK(BM_ClusterStep)->RangeMultiplier(2)->Range(50, 1600)->Complexity();

void BM_StandardMean(benchmark::State& state) {
  const Ensemble ensemble = make_ensemble(static_cast<int>(state.range(0)), 2);
  const Objective objective = multimodal_ackley(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(standard_mean(ensemble, objective, 1.0));
  }
}
BENCHMARK(BM_StandardMean)->Range(25, 400);

}  // namespace
