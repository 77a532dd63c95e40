#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>

#include "floodda/swe_solver.hpp"

using namespace floodda;

namespace {

GridSpec basin(int nx, int ny) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 5.0;
  g.dy = 5.0;
  g.zb.resize(g.size());
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      g.zb[g.idx(ix, iy)] = 0.6 * std::sin(0.31 * ix) * std::cos(0.23 * iy);
  return g;
}

HydraulicState sloshing_state(const GridSpec& grid) {
  HydraulicState s = HydraulicState::zero(grid);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const std::size_t i = grid.idx(ix, iy);
      const double r2 = (ix - 0.4 * grid.nx) * (ix - 0.4 * grid.nx) / 300.0 +
                        (iy - 0.5 * grid.ny) * (iy - 0.5 * grid.ny) / 120.0;
      s.h[i] = std::max(0.0, 1.1 - grid.zb[i]) + 0.8 * std::exp(-r2);
    }
  return s;
}

} // namespace

// One explicit step on a partially dry basin, the inner loop of every
// window propagation.
static void BM_SolverStep(benchmark::State& state) {
  const GridSpec grid = basin(static_cast<int>(state.range(0)),
                              static_cast<int>(state.range(1)));
  const FrictionField friction{std::vector<double>(grid.size(), 30.0)};
  const PhysicsParams physics;
  swe::SweEngine engine(grid, friction, physics);
  HydraulicState s = sloshing_state(grid);
  const double dt = 0.8 * engine.suggest_dt(s, 30.0);
  for (auto _ : state) {
    engine.step(s, dt);
    benchmark::DoNotOptimize(s.h.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_SolverStep)->Args({32, 12})->Args({100, 40})->Args({200, 80});

static void BM_StableDt(benchmark::State& state) {
  const GridSpec grid = basin(100, 40);
  const PhysicsParams physics;
  const HydraulicState s = sloshing_state(grid);
  for (auto _ : state) {
    double dt = swe::stable_dt(s, grid, physics);
    benchmark::DoNotOptimize(dt);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_StableDt);
