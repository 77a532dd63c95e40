#include <doctest.h>

#include <cmath>

#include "floodda/catchment.hpp"
#include "floodda/errors.hpp"
#include "floodda/rng.hpp"
#include "floodda/swe_solver.hpp"

using namespace floodda;

namespace {

GridSpec flat_grid(int nx, int ny, double dx) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.dx = g.dy = dx;
  g.zb.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  return g;
}

GridSpec bumpy_grid(int nx, int ny, double dx, double amp,
                    std::uint64_t seed) {
  GridSpec g = flat_grid(nx, ny, dx);
  Rng rng(seed, "bumps");
  for (double& z : g.zb) z = amp * rng.uniform();
  return g;
}

} // namespace

TEST_CASE("strickler friction acceleration") {
  auto [fx, fy] = swe::friction_acceleration(1.0, 1.0, 0.0, 40.0, 9.81);
  CHECK(fx == doctest::Approx(-0.00613125).epsilon(1e-14));
  CHECK(fy == 0.0);

  // magnitude grows as the column gets shallower
  auto [gx, gy] = swe::friction_acceleration(0.5, 1.0, 0.0, 40.0, 9.81);
  CHECK(std::abs(gx) > std::abs(fx));
  CHECK_THROWS_AS(swe::friction_acceleration(0.0, 1.0, 0.0, 40.0, 9.81),
                  DomainError);
}

TEST_CASE("stable time step") {
  GridSpec g = flat_grid(1, 1, 10.0);
  HydraulicState s = HydraulicState::zero(g);
  s.h[0] = 1.0;
  PhysicsParams p;
  p.cfl = 0.9;
  CHECK(swe::stable_dt(s, g, p) ==
        doctest::Approx(2.873478855663454).epsilon(1e-14));
  p.cfl = 0.45;
  CHECK(swe::stable_dt(s, g, p) ==
        doctest::Approx(1.436739427831727).epsilon(1e-14));

  s.u[0] = 2.0;
  const double slower = swe::stable_dt(s, g, p);
  CHECK(slower < 1.436739427831727);

  s.h[0] = 0.0;
  s.u[0] = 0.0;
  CHECK_THROWS_AS(swe::stable_dt(s, g, p), DomainError);
}

TEST_CASE("lake at rest stays exact on rough bathymetry") {
  GridSpec g = bumpy_grid(24, 10, 5.0, 1.5, 71);
  PhysicsParams p;
  FrictionField f;
  f.ks.assign(g.size(), 30.0);
  const double eta = 1.0; // some bed cells poke above the surface
  HydraulicState s = HydraulicState::zero(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    s.h[i] = std::max(0.0, eta - g.zb[i]);

  HydraulicState cur = s;
  for (int k = 0; k < 200; ++k) {
    const double dt = swe::stable_dt(cur, g, p);
    cur = swe::step(cur, g, f, p, dt);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    worst = std::max(worst, std::abs(cur.h[i] - s.h[i]));
    worst = std::max(worst, std::abs(cur.u[i]));
    worst = std::max(worst, std::abs(cur.v[i]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("closed domain conserves mass") {
  GridSpec g = bumpy_grid(20, 8, 2.0, 0.3, 13);
  PhysicsParams p;
  FrictionField f;
  f.ks.assign(g.size(), 25.0);
  HydraulicState s = HydraulicState::zero(g);
  // off-center mound sloshing around
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      s.h[g.idx(ix, iy)] =
          std::max(0.0, 1.2 - 0.08 * (std::abs(ix - 5) + std::abs(iy - 3)) -
                            g.zb[g.idx(ix, iy)]);

  const double v0 = swe::total_volume(s, g);
  for (int k = 0; k < 500; ++k) {
    const double dt = swe::stable_dt(s, g, p);
    s = swe::step(s, g, f, p, dt);
  }
  const double v1 = swe::total_volume(s, g);
  CHECK(std::abs(v1 - v0) / v0 <= 1e-12);

  // depths stay non-negative through wetting and drying
  for (double h : s.h) CHECK(h >= 0.0);
}

TEST_CASE("still water spreads nothing through walls") {
  GridSpec g = flat_grid(5, 4, 1.0);
  PhysicsParams p;
  FrictionField f;
  f.ks.assign(g.size(), 40.0);
  HydraulicState s = HydraulicState::zero(g);
  for (auto& h : s.h) h = 0.7;
  HydraulicState next = swe::step(s, g, f, p, 0.1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(next.h[i] == 0.7);
    CHECK(next.u[i] == 0.0);
  }
}

TEST_CASE("diffusion caps the suggested step") {
  GridSpec g = flat_grid(4, 4, 1.0);
  PhysicsParams p;
  p.nu_e = 10.0;
  FrictionField f;
  f.ks.assign(g.size(), 40.0);
  swe::SweEngine engine(g, f, p);
  HydraulicState s = HydraulicState::zero(g);
  for (auto& h : s.h) h = 1.0;
  const double dt = engine.suggest_dt(s, 100.0);
  CHECK(dt <= 0.25 * 1.0 / 10.0 + 1e-15);
}

TEST_CASE("friction brings a sliding sheet toward rest") {
  GridSpec g = flat_grid(6, 3, 10.0);
  PhysicsParams p;
  FrictionField f;
  f.ks.assign(g.size(), 20.0);
  HydraulicState s = HydraulicState::zero(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.h[i] = 0.5;
    s.u[i] = 1.0;
  }
  for (int k = 0; k < 50; ++k) s = swe::step(s, g, f, p, 0.2);
  double mean_speed = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    mean_speed += std::hypot(s.u[i], s.v[i]);
  mean_speed /= static_cast<double>(g.size());
  CHECK(mean_speed < 0.9);
}

TEST_CASE("window run hits sampling instants exactly") {
  SyntheticSpec spec;
  spec.nx = 12;
  spec.ny = 8;
  spec.channel_row0 = 3;
  Catchment c = make_synthetic_catchment(spec);
  PhysicsParams p;
  FrictionField f = c.zoning.to_friction(c.grid, c.ks_default);

  HydraulicState s = HydraulicState::zero(c.grid);
  swe::WindowSampling sampling;
  sampling.gauges = c.gauges;
  sampling.gauge_times = {300.0, 600.0, 900.0};
  sampling.snapshot_times = {600.0};
  swe::WindowResult r =
      swe::run_window(s, 900.0, c.grid, f, p, &c.boundary, sampling);

  CHECK(s.t == 900.0);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels[0].size() == 3);
  REQUIRE(r.snapshots.size() == 1);
  CHECK(r.snapshots[0].t == 600.0);
  CHECK(r.inflow_volume > 0.0);

  // levels are stages above the station datum, so a few metres here
  for (const auto& row : r.levels)
    for (double lv : row) CHECK(lv > 1.0);
}

TEST_CASE("steady inflow approaches mass balance through the rating") {
  SyntheticSpec spec;
  spec.nx = 16;
  spec.ny = 6;
  spec.channel_row0 = 2;
  Catchment c = make_synthetic_catchment(spec);
  PhysicsParams p;
  FrictionField f = c.zoning.to_friction(c.grid, c.ks_default);

  HydraulicState s = HydraulicState::zero(c.grid);
  swe::WindowSampling nothing;
  swe::WindowResult r =
      swe::run_window(s, 4.0 * 3600.0, c.grid, f, p, &c.boundary, nothing);
  // after four hours of constant inflow the outflow carries most of it
  CHECK(r.outflow_volume > 0.5 * r.inflow_volume);
  CHECK(r.outflow_volume < 1.01 * r.inflow_volume);

  // volume accounting closes: inflow - outflow = storage change
  const double stored = swe::total_volume(s, c.grid);
  CHECK(stored ==
        doctest::Approx(r.inflow_volume - r.outflow_volume).epsilon(1e-6));
}
