#include <benchmark/benchmark.h>

#include "polarcbo/dynamics.hpp"

namespace {

using namespace polarcbo;

void BM_PolarizedCboRun(benchmark::State& state) {
  const int j = static_cast<int>(state.range(0));
  RngStream init_rng(7, kPositionInitStream);
  const Ensemble start = init_uniform(j, 2, -3.0, 3.0, init_rng);
  const Objective objective = multimodal_ackley(2);
  StepperConfig config;
  config.method = Method::PolarizedCBO;
  config.kernel = Kernel::gaussian(0.1);
  config.noise = NoiseModel(NoiseVariant::Isotropic, 1.0);
  config.schedule = BetaSchedule::fixed(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(config, start, objective, 50, 1, 50));
  }
}
BENCHMARK(BM_PolarizedCboRun)->Arg(50)->Arg(100)->Arg(200)
    ->Unit(benchmark::kMillisecond);

void BM_PolarizedCbsStep(benchmark::State& state) {
  const int j = static_cast<int>(state.range(0));
  RngStream init_rng(7, kPositionInitStream);
  const Ensemble ensemble = init_uniform(j, 2, -3.0, 3.0, init_rng);
  Vector a(2), b(2);
  a << 0.0, 2.0;
  b << 0.0, -2.0;
  const Objective target = gaussian_mixture_potential(a, b);
  const auto mc = polarized_means_and_covariances(ensemble,
                                                  Kernel::gaussian(0.6),
                                                  target, 1.0);
  std::vector<RngStream> streams;
  for (int i = 0; i < j; ++i) streams.emplace_back(1, i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cbs_step(ensemble, mc.means, mc.covs, 0.01, 0.5, streams));
  }
}
BENCHMARK(BM_PolarizedCbsStep)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
