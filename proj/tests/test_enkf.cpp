#include <doctest.h>

#include <cmath>

#include "floodda/enkf.hpp"
#include "floodda/errors.hpp"

using namespace floodda;

namespace {

ControlVector with_ks0(double v) {
  ControlVector x;
  x.ks0 = v;
  return x;
}

} // namespace

TEST_CASE("cycle plans cover a span with overlapping windows") {
  CyclePlan plan = CyclePlan::cover(0.0, 259200.0, 43200.0, 21600.0);
  CHECK(plan.n_cycles == 11);
  CHECK(plan.end_time() == doctest::Approx(259200.0));
  auto [t0, t1] = plan.window(0);
  CHECK(t0 == 0.0);
  CHECK(t1 == 43200.0);
  auto [s0, s1] = plan.window(10);
  CHECK(s0 == doctest::Approx(216000.0));
  CHECK(s1 == doctest::Approx(259200.0));

  // span not a whole number of shifts
  CHECK_THROWS_AS(CyclePlan::cover(0.0, 50000.0, 43200.0, 21600.0),
                  ConfigError);
  CHECK_THROWS_AS(CyclePlan::cover(0.0, 43200.0, 43200.0, 86400.0),
                  ConfigError);
}

TEST_CASE("window observation gathering") {
  GaugeSeries g1;
  g1.station = "G1";
  g1.t = {0, 900, 1800, 2700};
  g1.level = {3.0, -2.0, 0.0001, 4.0};
  GaugeSeries g2;
  g2.station = "G2";
  g2.t = {900, 1800};
  g2.level = {5.0, 6.0};

  WindowObservations w =
      collect_window_observations({g1, g2}, 0, 0.0, 1800.0, 0.1, 0.001);
  // t = 0 is excluded (strictly after the window start), 1800 included
  REQUIRE(w.size() == 4);
  CHECK(w.time[0] == 900.0);
  CHECK(w.station[0] == 0);
  CHECK(w.station[1] == 1);
  CHECK(w.value[0] == -2.0);
  CHECK(w.sigma[0] == doctest::Approx(0.2)); // tau |y|
  CHECK(w.sigma[2] == 0.001);                // floor for tiny levels
}

TEST_CASE("kalman gain scalar hand case") {
  // two members, ks0 anomalies +-1, observation anomalies +-2, R = 1
  std::vector<ControlVector> x = {with_ks0(18.0), with_ks0(16.0)};
  std::vector<std::vector<double>> y = {{2.0}, {-2.0}};
  GainMatrix k = kalman_gain(x, y, {1.0});
  REQUIRE(k.n_obs == 1);
  CHECK(k.at(0, 0) == 0.4); // 2 / (4 + 1), exact
  for (int r = 1; r < ControlVector::size; ++r) CHECK(k.at(r, 0) == 0.0);

  CHECK_THROWS_AS(kalman_gain({with_ks0(17.0)}, {{0.0}}, {1.0}),
                  NumericalError);
}

TEST_CASE("analysis update applies gain to the innovation") {
  std::vector<ControlVector> x(1);
  x[0].ks1 = 40.0;
  std::vector<ControlVector> xg = {with_ks0(18.0), with_ks0(16.0)};
  std::vector<std::vector<double>> yg = {{2.0}, {-2.0}};
  GainMatrix k = kalman_gain(xg, yg, {1.0});
  // move the gain row onto ks1 for the hand check
  GainMatrix k1 = k;
  k1.k.assign(ControlVector::size, 0.0);
  k1.k[1] = k.at(0, 0);

  std::vector<ControlVector> xa =
      analysis_update(x, {{1.0}}, {{1.5}}, k1, 1.0);
  CHECK(xa[0].ks1 == doctest::Approx(40.2).epsilon(1e-15));

  // the floor clamps what the update pushes too low
  std::vector<ControlVector> deep(1);
  deep[0].ks1 = 1.2;
  std::vector<ControlVector> xc =
      analysis_update(deep, {{1.0}}, {{-9.0}}, k1, 1.0);
  CHECK(xc[0].ks1 == 1.0);
}

TEST_CASE("forecast dispersion branches") {
  const std::array<double, ControlVector::size> x0{17.0, 45.0, 38.0,
                                                   40.0, 1.0,  0.0, 0.0};
  std::vector<std::array<double, ControlVector::size>> theta(3);
  Rng rng(5, "theta-test");
  ControlPrior prior;
  for (auto& th : theta) th = sample_theta(prior, rng);

  // first cycle with zero perturbations reproduces the nominal exactly
  std::vector<std::array<double, ControlVector::size>> zero(
      3, std::array<double, ControlVector::size>{});
  auto first = forecast_controls(0, x0, {}, zero, 0.3, 1.0);
  for (const auto& x : first)
    for (int c = 0; c < ControlVector::size; ++c) CHECK(x[c] == x0[c]);

  std::vector<ControlVector> analysis = {with_ks0(15.0), with_ks0(18.0),
                                         with_ks0(21.0)};
  analysis[0].b = 120.0;
  analysis[1].b = -40.0;
  analysis[2].b = 350.0;

  // lambda 1: previous analysis members come back bit for bit
  auto keep = forecast_controls(1, x0, analysis, theta, 1.0, 1.0);
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (int c = 0; c < ControlVector::size; ++c)
      CHECK(keep[i][c] == analysis[i][c]);

  // lambda 0: mean plus fresh perturbation, bit for bit
  auto refresh = forecast_controls(1, x0, analysis, theta, 0.0, 1.0);
  for (std::size_t i = 0; i < refresh.size(); ++i) {
    CHECK(refresh[i].ks0 == 18.0 + theta[i][0]);
    CHECK(refresh[i].ks2 == 38.0 + theta[i][2]);
  }

  // intermediate lambda lands between the two regimes
  auto blend = forecast_controls(1, x0, analysis, theta, 0.3, 1.0);
  for (std::size_t i = 0; i < blend.size(); ++i)
    CHECK(blend[i].ks0 ==
          doctest::Approx(18.0 + 0.3 * (analysis[i].ks0 - 18.0) +
                          0.7 * theta[i][0]));
}

TEST_CASE("sampled perturbations have the configured spread") {
  ControlPrior prior;
  Rng rng(31, "spread");
  const int n = 100000;
  double sum_b = 0.0, sum_b2 = 0.0;
  int ks1_in = 0;
  for (int i = 0; i < n; ++i) {
    auto th = sample_theta(prior, rng);
    sum_b += th[5];
    sum_b2 += th[5] * th[5];
    if (std::abs(th[1]) <= 1.96 * 2.25) ++ks1_in;
  }
  const double mean_b = sum_b / n;
  const double sd_b = std::sqrt(sum_b2 / n - mean_b * mean_b);
  CHECK(std::abs(mean_b) < 1.0);       // 3 SE of the mean is 0.95
  CHECK(std::abs(sd_b - 100.0) < 1.0); // 3 SE of the spread is 0.67
  const double frac = static_cast<double>(ks1_in) / n;
  CHECK(std::abs(frac - 0.95) < 0.003);
}

TEST_CASE("observation perturbations are seed reproducible") {
  std::vector<double> values = {3.0, 2.5};
  std::vector<double> sigma = {0.1, 0.2};
  Rng a(77, "obspert", 2, 5);
  Rng b(77, "obspert", 2, 5);
  auto pa = perturb_observations(values, sigma, a);
  auto pb = perturb_observations(values, sigma, b);
  CHECK(pa == pb);
  CHECK(pa[0] != values[0]);
}

TEST_CASE("ensemble mean and covariance match the kalman posterior") {
  // one control observed directly: prior N(10, 4), obs 13 with R = 1
  const double prior_mean = 10.0, prior_var = 4.0, r = 1.0, y_o = 13.0;
  const double post_mean =
      prior_mean + prior_var / (prior_var + r) * (y_o - prior_mean);
  const double post_var = prior_var * r / (prior_var + r);

  const int ne = 4000;
  Rng rng(123, "toy");
  std::vector<ControlVector> x(ne);
  std::vector<std::vector<double>> y(ne), y_pert(ne);
  for (int i = 0; i < ne; ++i) {
    x[i].b = rng.normal(prior_mean, std::sqrt(prior_var));
    y[i] = {x[i].b};
    y_pert[i] = {y_o + rng.normal(0.0, std::sqrt(r))};
  }
  GainMatrix k = kalman_gain(x, y, {r});
  auto xa = analysis_update(x, y, y_pert, k, 1.0);
  double mean = 0.0;
  for (const auto& m : xa) mean += m.b;
  mean /= ne;
  double var = 0.0;
  for (const auto& m : xa) var += (m.b - mean) * (m.b - mean);
  var /= ne;

  // three Monte-Carlo standard errors
  CHECK(std::abs(mean - post_mean) <
        3.0 * std::sqrt(post_var / ne) + 3.0 * 0.05);
  CHECK(std::abs(var - post_var) < 3.0 * post_var * std::sqrt(2.0 / ne));
}
