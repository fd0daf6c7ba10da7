// Serial reference vs OpenMP drivers of the Bellman kernel. Thread count comes
// from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjsys/kernels.hpp"

using namespace hjsys;

namespace {

struct Fixture {
  DiscountedProblem prob;
  SolverConfig cfg;
  GridField v;
  kernels::BellmanKernel kernel;

  static DiscountedProblem problem(const TorusGrid& g) {
    TrigPotential pot(0.0, {TrigMode{{1, g.dim() == 2 ? 1 : 0}, 1.0, 0.0}});
    return {0, 1.0, HamiltonianComponent(1.0, pot), GridField(g, 0.0)};
  }
  static SolverConfig config(const TorusGrid& g) {
    SolverConfig c;
    c.dt = 0.5 / g.n();
    c.speed_bound = 2.0;
    c.candidates_per_axis = g.dim() == 2 ? 21 : 41;
    return c;
  }
  static GridField field(const TorusGrid& g) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridField f(g);
    for (NodeIndex k = 0; k < g.size(); ++k) f[k] = u(rng);
    return f;
  }

  explicit Fixture(const TorusGrid& g) : prob(problem(g)), cfg(config(g)), v(field(g)), kernel(prob, cfg) {}
};

template <void (kernels::BellmanKernel::*Apply)(const GridField&, GridField&) const>
void run(benchmark::State& state) {
  const TorusGrid g(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Fixture f(g);
  GridField out(g);
  for (auto _ : state) {
    (f.kernel.*Apply)(f.v, out);
    benchmark::DoNotOptimize(out[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}

void grids(benchmark::internal::Benchmark* b) { b->Args({1, 1024})->Args({1, 4096})->Args({2, 64})->Args({2, 128}); }

}  // namespace

BENCHMARK(run<&kernels::BellmanKernel::apply_serial>)->Name("explicit/serial")->Apply(grids);
BENCHMARK(run<&kernels::BellmanKernel::apply>)->Name("explicit/openmp")->Apply(grids);
BENCHMARK(run<&kernels::BellmanKernel::apply_implicit_serial>)->Name("implicit/serial")->Apply(grids);
BENCHMARK(run<&kernels::BellmanKernel::apply_implicit>)->Name("implicit/openmp")->Apply(grids);

BENCHMARK_MAIN();
