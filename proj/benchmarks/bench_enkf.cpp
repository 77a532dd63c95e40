#include <benchmark/benchmark.h>

#include <vector>

#include "floodda/control.hpp"
#include "floodda/enkf.hpp"
#include "floodda/rng.hpp"

using namespace floodda;

namespace {

struct Ensemble {
  std::vector<ControlVector> x;
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> y_pert;
  std::vector<double> r;
};

Ensemble make_ensemble(int ne, int m) {
  Ensemble e;
  Rng rng(404, "bench", ne, m);
  ControlPrior prior;
  e.x.resize(ne);
  e.y.resize(ne);
  e.y_pert.resize(ne);
  for (int i = 0; i < ne; ++i) {
    e.x[i] = sample_control(prior, rng);
    e.x[i].clamp(1.0);
    e.y[i].resize(m);
    e.y_pert[i].resize(m);
    for (int j = 0; j < m; ++j) {
      e.y[i][j] = 3.0 + rng.normal(0.0, 0.4);
      e.y_pert[i][j] = e.y[i][j] + rng.normal(0.0, 0.05);
    }
  }
  e.r.assign(m, 0.0025);
  return e;
}

} // namespace

// Gain computation at production ensemble size; the observation count is a
// 12 h window of three stations at varying cadences.
static void BM_KalmanGain(benchmark::State& state) {
  const Ensemble e =
      make_ensemble(static_cast<int>(state.range(0)),
                    static_cast<int>(state.range(1)));
  for (auto _ : state) {
    GainMatrix k = kalman_gain(e.x, e.y, e.r);
    benchmark::DoNotOptimize(k.k.data());
  }
}
BENCHMARK(BM_KalmanGain)->Args({24, 16})->Args({24, 144})->Args({96, 144});

static void BM_AnalysisUpdate(benchmark::State& state) {
  const Ensemble e = make_ensemble(24, 144);
  const GainMatrix k = kalman_gain(e.x, e.y, e.r);
  for (auto _ : state) {
    std::vector<ControlVector> xa =
        analysis_update(e.x, e.y, e.y_pert, k, 1.0);
    benchmark::DoNotOptimize(xa.data());
  }
}
BENCHMARK(BM_AnalysisUpdate);

static void BM_ForecastDispersion(benchmark::State& state) {
  const int ne = 24;
  Rng rng(405, "bench-theta");
  ControlPrior prior;
  const std::array<double, ControlVector::size> x0 = prior.mean;
  std::vector<std::array<double, ControlVector::size>> theta(ne);
  for (auto& th : theta) th = sample_theta(prior, rng);
  std::vector<ControlVector> analysis(ne);
  for (auto& m : analysis) {
    m = sample_control(prior, rng);
    m.clamp(1.0);
  }
  for (auto _ : state) {
    std::vector<ControlVector> xf =
        forecast_controls(3, x0, analysis, theta, 0.3, 1.0);
    benchmark::DoNotOptimize(xf.data());
  }
}
BENCHMARK(BM_ForecastDispersion);

BENCHMARK_MAIN();
