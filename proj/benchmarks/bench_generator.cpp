#include <random>

#include <benchmark/benchmark.h>

#include "dqo/dynamics.hpp"
#include "dqo/liouvillian.hpp"
#include "dqo/stationary.hpp"

using namespace dqo;

namespace {

Matrix random_state(int dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix x(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      x(r, c) = Complex(g(rng), g(rng));
    }
  }
  Matrix rho = x * x.adjoint();
  return rho / rho.trace().real();
}

void BM_FullGeneratorApply(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const Oscillator osc(1.0, Deformation::q_tau(0.1), n_max);
  FullGenerator gen(osc, Bath::constant(0.5, 1.0, 1.2, 0.9, 0.3));
  gen.set_threads(static_cast<int>(state.range(1)));
  const Matrix rho = random_state(osc.dim());
  Matrix out;
  for (auto _ : state) {
    gen.apply(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * osc.dim() * osc.dim());
}
BENCHMARK(BM_FullGeneratorApply)->ArgsProduct({{16, 64, 256, 512}, {1}});
BENCHMARK(BM_FullGeneratorApply)->ArgsProduct({{256, 512}, {0}})->UseRealTime();

void BM_PopulationEvolution(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  const Oscillator osc(1.0, Deformation::q_tau(0.1), n_max);
  const Bath bath = Bath::thermal(0.5, 1.0, 1.0);
  IntegratorConfig cfg;
  cfg.t_final = 1.0;
  cfg.dt = 1e-3;
  cfg.sample_times = {0.0, 1.0};
  const auto p0 = PopulationDist::delta(osc.dim(), 2);
  for (auto _ : state) {
    auto traj = evolve_populations(osc, bath, p0, cfg, TruncationPolicy::reflecting);
    benchmark::DoNotOptimize(traj.mean_n.back());
  }
}
BENCHMARK(BM_PopulationEvolution)->Arg(32)->Arg(256);

void BM_SteadyState(benchmark::State& state) {
  const Oscillator osc(1.0, Deformation::q_tau(0.1), static_cast<int>(state.range(0)));
  const Bath bath = Bath::thermal(1.0, 1.0, 1.0);
  for (auto _ : state) {
    auto p = steady_populations(osc, bath);
    benchmark::DoNotOptimize(p[0]);
  }
}
BENCHMARK(BM_SteadyState)->Arg(32)->Arg(1024);

void BM_PartitionToTolerance(benchmark::State& state) {
  const Oscillator osc(1.0, Deformation::q_tau(0.1), 4);
  for (auto _ : state) {
    auto z = partition_function_to_tolerance(osc, 1.0, 1e-12);
    benchmark::DoNotOptimize(z.value);
  }
}
BENCHMARK(BM_PartitionToTolerance);

}  // namespace

BENCHMARK_MAIN();
