#include <doctest.h>

#include <cmath>

#include "floodda/catchment.hpp"
#include "floodda/control.hpp"
#include "floodda/errors.hpp"

using namespace floodda;

TEST_CASE("power-law rating curve") {
  RatingCurve r = RatingCurve::power_law(100.0, 0.0, 1.5);
  CHECK(r.eval(0.0) == 0.0);
  CHECK(r.eval(4.0) == doctest::Approx(800.0).epsilon(1e-14));
  CHECK(r.invert(800.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.invert(0.0) == 0.0);
  CHECK(r.max_discharge() == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(r.invert(-1.0), DomainError);
}

TEST_CASE("table rating curve interpolates and extrapolates") {
  RatingCurve r = RatingCurve::table({{0.0, 0.0}, {1.0, 10.0}, {2.0, 40.0}});
  CHECK(r.eval(0.5) == doctest::Approx(5.0));
  CHECK(r.eval(1.5) == doctest::Approx(25.0));
  // above the table: last segment slope continues
  CHECK(r.eval(3.0) == doctest::Approx(70.0));
  CHECK(r.invert(10.0) == doctest::Approx(1.0));
  CHECK(r.invert(25.0) == doctest::Approx(1.5));
  CHECK(r.max_discharge() == 40.0);
  CHECK_THROWS_AS(r.invert(41.0), DomainError);

  // first discharge must be zero, stages strictly increasing
  CHECK_THROWS_AS(RatingCurve::table({{0.0, 5.0}, {1.0, 10.0}}), DomainError);
  CHECK_THROWS_AS(RatingCurve::table({{1.0, 0.0}, {1.0, 10.0}}), DomainError);
  CHECK_THROWS_AS(RatingCurve::table({{0.0, 0.0}, {1.0, 10.0}, {2.0, 5.0}}),
                  DomainError);
}

TEST_CASE("hydrograph interpolation") {
  Hydrograph h({0.0, 100.0}, {10.0, 20.0});
  CHECK(h.at(50.0) == doctest::Approx(15.0));
  CHECK(h.at(-10.0) == 10.0);
  CHECK(h.at(500.0) == 20.0);
  CHECK_NOTHROW(Hydrograph({5.0}, {1.0}));
  CHECK_THROWS_AS(Hydrograph({0.0, 0.0}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(Hydrograph({0.0, 1.0}, {1.0, -1.0}), DomainError);
}

TEST_CASE("inflow perturbation: gain, offset, delay") {
  Hydrograph base({0.0, 3600.0}, {0.0, 3600.0});
  Hydrograph p = perturb_hydrograph(base, 1.1, 50.0, 900.0);
  // at t the unshifted flow is q(t - 900) = t - 900
  CHECK(p.at(3600.0) == doctest::Approx(1.1 * 2700.0 + 50.0));
  CHECK(p.at(900.0) == doctest::Approx(50.0));
  CHECK(p.at(0.0) == doctest::Approx(50.0)); // constant before first knot
  CHECK_THROWS_AS(perturb_hydrograph(base, 0.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(perturb_hydrograph(base, -1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("inflow perturbation clamps negatives with exact crossing knots") {
  Hydrograph base({0.0, 100.0}, {0.0, 200.0});
  Hydrograph p = perturb_hydrograph(base, 1.0, -100.0, 0.0);
  CHECK(p.at(25.0) == 0.0);
  CHECK(p.at(50.0) == 0.0);
  CHECK(p.at(75.0) == doctest::Approx(50.0));
  CHECK(p.at(100.0) == doctest::Approx(100.0));
}

TEST_CASE("inflow perturbations compose") {
  Hydrograph base({0.0, 1000.0, 2000.0}, {100.0, 300.0, 150.0});
  Hydrograph once =
      perturb_hydrograph(perturb_hydrograph(base, 1.2, 30.0, 250.0), 0.9,
                         -10.0, 500.0);
  Hydrograph direct =
      perturb_hydrograph(base, 1.2 * 0.9, 0.9 * 30.0 - 10.0, 750.0);
  for (double t = 0.0; t <= 3500.0; t += 125.0)
    CHECK(once.at(t) == doctest::Approx(direct.at(t)).epsilon(1e-12));
}

TEST_CASE("synthetic catchment invariants") {
  SyntheticSpec spec;
  Catchment c = make_synthetic_catchment(spec);
  CHECK(c.grid.nx == 32);
  CHECK(c.grid.ny == 12);
  CHECK(c.gauges.size() == 3);

  // channel rows carry zones 1..3 from west to east, floodplain is zone 0
  CHECK(c.zoning.zone[c.grid.idx(0, 5)] == 1);
  CHECK(c.zoning.zone[c.grid.idx(16, 6)] == 2);
  CHECK(c.zoning.zone[c.grid.idx(31, 5)] == 3);
  CHECK(c.zoning.zone[c.grid.idx(5, 0)] == 0);

  // bed falls monotonically along the channel
  for (int ix = 1; ix < c.grid.nx; ++ix)
    CHECK(c.grid.zb[c.grid.idx(ix, 5)] < c.grid.zb[c.grid.idx(ix - 1, 5)]);

  // floodplain sits above the channel
  CHECK(c.grid.zb[c.grid.idx(10, 4)] > c.grid.zb[c.grid.idx(10, 5)]);

  // gauges read a stage a few metres above the local bed
  for (const auto& g : c.gauges) {
    const double zb = c.grid.zb[c.grid.idx(g.ix, g.iy)];
    CHECK(zb - g.datum == doctest::Approx(spec.stage_offset));
  }

  CHECK(c.boundary.upstream.size() == 12);
  CHECK(c.boundary.downstream.size() == 2);
}

TEST_CASE("synthetic refinement keeps the coarse bed") {
  SyntheticSpec spec;
  Catchment coarse = make_synthetic_catchment(spec);
  spec.resolution_factor = 2;
  Catchment fine = make_synthetic_catchment(spec);
  CHECK(fine.grid.nx == 64);
  CHECK(fine.grid.dx == doctest::Approx(75.0));
  // The bed is the along-valley slope plus terms keyed on the coarse cell,
  // so zb + slope*x is constant inside one coarse floodplain cell and
  // matches the coarse grid's value.
  const int ix = 8, iy = 2;
  auto inv = [&](const Catchment& c, int i, int j) {
    return c.grid.zb[c.grid.idx(i, j)] + spec.slope * c.grid.cell_x(i);
  };
  const double want = inv(coarse, ix, iy);
  CHECK(inv(fine, 2 * ix, 2 * iy) == doctest::Approx(want).epsilon(1e-14));
  CHECK(inv(fine, 2 * ix + 1, 2 * iy) == doctest::Approx(want).epsilon(1e-14));
  CHECK(inv(fine, 2 * ix, 2 * iy + 1) == doctest::Approx(want).epsilon(1e-14));
  CHECK(inv(fine, 2 * ix + 1, 2 * iy + 1) ==
        doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("control vector clamps to physical floors") {
  ControlVector x;
  x.ks0 = 0.2;
  x.ks1 = -3.0;
  x.ks2 = 38.0;
  x.ks3 = 40.0;
  x.a = -0.4;
  x.b = -500.0;
  x.c = -4000.0;
  x.clamp(1.0);
  CHECK(x.ks0 == 1.0);
  CHECK(x.ks1 == 1.0);
  CHECK(x.ks2 == 38.0);
  CHECK(x.a == 0.05);
  CHECK(x.b == -500.0); // offset may be negative
  CHECK(x.c == -4000.0);

  const auto arr = x.to_array();
  CHECK(ControlVector::from_array(arr).ks2 == 38.0);
  CHECK(ControlVector::names()[4] == "a");
}
