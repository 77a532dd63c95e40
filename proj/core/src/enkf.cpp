#include "floodda/enkf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "floodda/errors.hpp"

namespace floodda {

std::pair<double, double> CyclePlan::window(int k) const {
  if (k < 0 || k >= n_cycles)
    throw DomainError("cycle index out of range");
  const double ts = t0 + k * shift;
  return {ts, ts + window_length};
}

CyclePlan CyclePlan::cover(double t0, double t_end, double window_length,
                           double shift) {
  CyclePlan plan;
  plan.t0 = t0;
  plan.window_length = window_length;
  plan.shift = shift;
  if (!(t_end > t0)) throw ConfigError("cycle plan: t_end must exceed t0");
  const double span = t_end - t0 - window_length;
  if (span < -1e-9)
    throw ConfigError("cycle plan: interval shorter than one window");
  const double n_shifts = span / shift;
  const double rounded = std::round(n_shifts);
  if (std::abs(n_shifts - rounded) > 1e-6)
    throw ConfigError(
        "cycle plan: interval is not one window plus a whole number of "
        "shifts");
  plan.n_cycles = static_cast<int>(rounded) + 1;
  plan.validate();
  return plan;
}

void CyclePlan::validate() const {
  if (!std::isfinite(t0)) throw ConfigError("cycle plan: t0 must be finite");
  if (!(window_length > 0.0))
    throw ConfigError("cycle plan: window length must be positive");
  if (!(shift > 0.0) || shift > window_length)
    throw ConfigError("cycle plan: shift must lie in (0, window_length]");
  if (n_cycles < 1) throw ConfigError("cycle plan: need at least one cycle");
}

void EnkfConfig::validate() const {
  if (ne < 2) throw ConfigError("ensemble size must be at least 2");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("lambda must lie in [0, 1]");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (!(sigma_floor > 0.0))
    throw ConfigError("observation error floor must be positive");
  if (!(ks_floor > 0.0)) throw ConfigError("ks floor must be positive");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0))
    throw ConfigError("max failure fraction must lie in [0, 1)");
  if (threads < 0) throw ConfigError("thread count must be >= 0");
  prior.validate();
  for (double v : x0)
    if (!std::isfinite(v)) throw ConfigError("x0 must be finite");
}

void AssimOptions::validate() const {
  if (!(cadence > 0.0)) throw ConfigError("output cadence must be positive");
  for (std::size_t i = 1; i < snapshot_times.size(); ++i)
    if (!(snapshot_times[i] > snapshot_times[i - 1]))
      throw ConfigError("snapshot times must be strictly increasing");
}

WindowObservations collect_window_observations(
    const std::vector<GaugeSeries>& series, std::int64_t epoch,
    double t_start, double t_end, double tau, double sigma_floor) {
  struct Entry {
    double t;
    int station;
    double value;
  };
  std::vector<Entry> entries;
  for (std::size_t s = 0; s < series.size(); ++s) {
    series[s].validate();
    for (std::size_t i = 0; i < series[s].t.size(); ++i) {
      const double t = static_cast<double>(series[s].t[i] - epoch);
      if (t > t_start && t <= t_end)
        entries.push_back({t, static_cast<int>(s), series[s].level[i]});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.t != b.t ? a.t < b.t : a.station < b.station;
  });
  WindowObservations out;
  out.time.reserve(entries.size());
  for (const auto& e : entries) {
    out.time.push_back(e.t);
    out.station.push_back(e.station);
    out.value.push_back(e.value);
    out.sigma.push_back(std::max(tau * std::abs(e.value), sigma_floor));
  }
  return out;
}

std::vector<ControlVector> forecast_controls(
    int cycle, const std::array<double, ControlVector::size>& x0,
    const std::vector<ControlVector>& prev_analysis,
    const std::vector<std::array<double, ControlVector::size>>& theta,
    double lambda, double ks_floor) {
  if (theta.empty()) throw DomainError("forecast_controls: no perturbations");
  const int ne = static_cast<int>(theta.size());
  std::vector<ControlVector> out(ne);
  if (cycle == 0) {
    for (int i = 0; i < ne; ++i) {
      for (int c = 0; c < ControlVector::size; ++c)
        out[i][c] = x0[c] + theta[i][c];
      out[i].clamp(ks_floor);
    }
    return out;
  }
  if (prev_analysis.size() != theta.size())
    throw DomainError("forecast_controls: analysis/theta size mismatch");
  std::array<double, ControlVector::size> mean{};
  for (const auto& x : prev_analysis)
    for (int c = 0; c < ControlVector::size; ++c) mean[c] += x[c];
  for (int c = 0; c < ControlVector::size; ++c) mean[c] /= ne;
  for (int i = 0; i < ne; ++i) {
    for (int c = 0; c < ControlVector::size; ++c) {
      // The limits hold exactly: lambda 1 keeps the analysis member, lambda
      // 0 keeps only the refreshed perturbation around the mean.
      if (lambda == 1.0)
        out[i][c] = prev_analysis[i][c];
      else if (lambda == 0.0)
        out[i][c] = mean[c] + theta[i][c];
      else
        out[i][c] = mean[c] + lambda * (prev_analysis[i][c] - mean[c]) +
                    (1.0 - lambda) * theta[i][c];
    }
    out[i].clamp(ks_floor);
  }
  return out;
}

GainMatrix kalman_gain(const std::vector<ControlVector>& x_members,
                       const std::vector<std::vector<double>>& y_members,
                       const std::vector<double>& r_diag) {
  const int n = ControlVector::size;
  const int ne = static_cast<int>(x_members.size());
  const int m = static_cast<int>(r_diag.size());
  if (ne < 2) throw NumericalError("kalman_gain: need at least 2 members");
  if (static_cast<int>(y_members.size()) != ne)
    throw DomainError("kalman_gain: member count mismatch");
  for (const auto& y : y_members)
    if (static_cast<int>(y.size()) != m)
      throw DomainError("kalman_gain: observation count mismatch");

  GainMatrix gain;
  gain.n_obs = m;
  gain.k.assign(static_cast<std::size_t>(n) * m, 0.0);
  if (m == 0) return gain;

  Eigen::MatrixXd X(n, ne), Y(m, ne);
  for (int i = 0; i < ne; ++i) {
    for (int c = 0; c < n; ++c) X(c, i) = x_members[i][c];
    for (int j = 0; j < m; ++j) Y(j, i) = y_members[i][j];
  }
  X.colwise() -= X.rowwise().mean();
  Y.colwise() -= Y.rowwise().mean();

  // Ensemble covariances with 1/Ne normalization; the factor cancels in the
  // product only when applied to both, so keep it explicit in each.
  const Eigen::MatrixXd pxy = X * Y.transpose() / ne;
  Eigen::MatrixXd s = Y * Y.transpose() / ne;
  for (int j = 0; j < m; ++j) {
    if (!(r_diag[j] >= 0.0) || !std::isfinite(r_diag[j]))
      throw DomainError("kalman_gain: R diagonal must be finite and >= 0");
    s(j, j) += r_diag[j];
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("kalman_gain: innovation covariance factorization "
                         "failed");
  Eigen::MatrixXd k = ldlt.solve(pxy.transpose()).transpose();
  if (!k.allFinite())
    throw NumericalError("kalman_gain: gain is not finite (singular "
                         "innovation covariance)");
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < m; ++j) gain.k[r * m + j] = k(r, j);
  return gain;
}

std::vector<double> perturb_observations(const std::vector<double>& values,
                                         const std::vector<double>& sigma,
                                         Rng& rng) {
  if (values.size() != sigma.size())
    throw DomainError("perturb_observations: size mismatch");
  std::vector<double> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j)
    out[j] = values[j] + rng.normal(0.0, sigma[j]);
  return out;
}

std::vector<ControlVector> analysis_update(
    const std::vector<ControlVector>& x_forecast,
    const std::vector<std::vector<double>>& y_forecast,
    const std::vector<std::vector<double>>& y_perturbed,
    const GainMatrix& gain, double ks_floor) {
  const int ne = static_cast<int>(x_forecast.size());
  if (static_cast<int>(y_forecast.size()) != ne ||
      static_cast<int>(y_perturbed.size()) != ne)
    throw DomainError("analysis_update: member count mismatch");
  const int m = gain.n_obs;
  std::vector<ControlVector> out(ne);
  for (int i = 0; i < ne; ++i) {
    if (static_cast<int>(y_forecast[i].size()) != m ||
        static_cast<int>(y_perturbed[i].size()) != m)
      throw DomainError("analysis_update: observation count mismatch");
    ControlVector x = x_forecast[i];
    for (int r = 0; r < ControlVector::size; ++r) {
      double dot = 0.0;
      for (int j = 0; j < m; ++j)
        dot += gain.at(r, j) * (y_perturbed[i][j] - y_forecast[i][j]);
      x[r] += dot;
    }
    x.clamp(ks_floor);
    out[i] = x;
  }
  return out;
}

MemberRun propagate_member(const Catchment& catchment,
                           const PhysicsParams& physics,
                           const ControlVector& control, HydraulicState state,
                           double t_end,
                           const swe::WindowSampling& sampling) {
  control.validate();
  FrictionField friction =
      catchment.zoning.to_friction(catchment.grid, control.ks());
  BoundaryDriver boundary = catchment.boundary;
  if (!boundary.upstream.empty())
    boundary.inflow =
        perturb_hydrograph(boundary.inflow, control.a, control.b, control.c);
  const bool open =
      !boundary.upstream.empty() || !boundary.downstream.empty();
  MemberRun run;
  run.window = swe::run_window(state, t_end, catchment.grid, friction,
                               physics, open ? &boundary : nullptr, sampling);
  run.final_state = std::move(state);
  return run;
}

namespace {

// Run body(i) for i in [0, n) over a small thread pool. Bodies must handle
// their own recoverable failures; exceptions escaping a body are rethrown
// in the caller after all threads join.
template <typename F>
void parallel_members(int n, int threads, F&& body) {
  if (threads <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    threads = hw > 0 ? static_cast<int>(hw) : 1;
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace

AssimilationResult run_assimilation(const Catchment& catchment,
                                    const PhysicsParams& physics,
                                    const std::vector<GaugeSeries>& obs,
                                    const CyclePlan& plan,
                                    const EnkfConfig& config,
                                    std::uint64_t seed,
                                    const HydraulicState& initial_state,
                                    const AssimOptions& options) {
  catchment.validate();
  physics.validate();
  plan.validate();
  config.validate();
  options.validate();
  initial_state.validate(catchment.grid);
  const std::size_t n_stations = catchment.gauges.size();
  if (obs.size() != n_stations)
    throw DomainError("run_assimilation: one observation series per gauge "
                      "station is required");
  std::vector<double> station_bias = config.station_bias;
  if (station_bias.empty()) station_bias.assign(n_stations, 0.0);
  if (station_bias.size() != n_stations)
    throw ConfigError("station_bias length does not match the gauge list");
  if (!options.snapshot_times.empty() &&
      (options.snapshot_times.front() < plan.t0 ||
       options.snapshot_times.back() > plan.end_time()))
    throw ConfigError("snapshot times must lie inside the cycle plan");

  ControlPrior prior = config.prior;
  if (config.friction_only)
    for (int c = 4; c < ControlVector::size; ++c) prior.sigma[c] = 0.0;

  const int ne = config.ne;
  std::vector<HydraulicState> member_state(ne, initial_state);
  std::vector<char> alive(ne, 1);
  std::vector<ControlVector> x_a(ne);

  AssimilationResult result;
  result.analyzed.resize(n_stations);
  for (std::size_t s = 0; s < n_stations; ++s)
    result.analyzed[s].station = catchment.gauges[s].name;

  swe::WindowSampling base_sampling;
  base_sampling.gauges = catchment.gauges;

  long long next_tick = 0; // index into the global cadence grid
  std::size_t next_snapshot = 0;

  const int max_failures =
      static_cast<int>(std::floor(config.max_failure_fraction * ne));
  auto check_failures = [&](int cycle) {
    int failed = ne - static_cast<int>(
                          std::count(alive.begin(), alive.end(), char(1)));
    if (failed > max_failures) {
      std::ostringstream msg;
      msg << "cycle " << cycle << ": " << failed << " of " << ne
          << " members failed, above the allowed fraction "
          << config.max_failure_fraction;
      throw NumericalError(msg.str());
    }
  };

  for (int k = 0; k < plan.n_cycles; ++k) {
    const auto [ts, te] = plan.window(k);
    const double seg_end =
        k + 1 < plan.n_cycles ? plan.t0 + (k + 1) * plan.shift : te;

    // Perturbation draws happen serially, before any parallel work, so the
    // realization depends only on (seed, cycle, member).
    std::vector<std::array<double, ControlVector::size>> theta(ne);
    for (int i = 0; i < ne; ++i) {
      Rng rng(seed, "theta", static_cast<std::uint64_t>(k),
              static_cast<std::uint64_t>(i));
      theta[i] = sample_theta(prior, rng);
    }

    // Forecast dispersion on the alive subset.
    std::vector<int> alive_idx;
    for (int i = 0; i < ne; ++i)
      if (alive[i]) alive_idx.push_back(i);
    std::vector<ControlVector> x_f = x_a;
    {
      std::vector<ControlVector> prev;
      std::vector<std::array<double, ControlVector::size>> th;
      for (int i : alive_idx) {
        prev.push_back(x_a[i]);
        th.push_back(theta[i]);
      }
      std::vector<ControlVector> dispersed =
          forecast_controls(k, config.x0, prev, th, config.lambda,
                            config.ks_floor);
      for (std::size_t a = 0; a < alive_idx.size(); ++a)
        x_f[alive_idx[a]] = dispersed[a];
    }

    WindowObservations wobs = collect_window_observations(
        obs, options.epoch, ts, te, config.tau, config.sigma_floor);
    const int m = static_cast<int>(wobs.size());

    // Forecast propagation over the window, recording model equivalents at
    // the observation instants.
    swe::WindowSampling fsamp = base_sampling;
    fsamp.gauge_times = wobs.time;
    fsamp.gauge_times.erase(
        std::unique(fsamp.gauge_times.begin(), fsamp.gauge_times.end()),
        fsamp.gauge_times.end());
    std::vector<std::size_t> obs_time_idx(m);
    for (int j = 0; j < m; ++j)
      obs_time_idx[j] = static_cast<std::size_t>(
          std::lower_bound(fsamp.gauge_times.begin(), fsamp.gauge_times.end(),
                           wobs.time[j]) -
          fsamp.gauge_times.begin());

    std::vector<std::vector<double>> y_f(ne);
    std::vector<char> ok(ne, 0);
    parallel_members(ne, config.threads, [&](int i) {
      if (!alive[i]) return;
      try {
        MemberRun run = propagate_member(catchment, physics, x_f[i],
                                         member_state[i], te, fsamp);
        std::vector<double> y(m);
        for (int j = 0; j < m; ++j)
          y[j] = run.window.levels[obs_time_idx[j]][wobs.station[j]] -
                 station_bias[wobs.station[j]];
        y_f[i] = std::move(y);
        ok[i] = 1;
      } catch (const SolverError&) {
        ok[i] = 0;
      }
    });
    for (int i = 0; i < ne; ++i) alive[i] = alive[i] && ok[i];
    check_failures(k);

    // Perturbed observation copies, drawn for every member slot so the
    // stream does not depend on which members happen to be alive.
    std::vector<std::vector<double>> y_pert(ne);
    for (int i = 0; i < ne; ++i) {
      Rng rng(seed, "obspert", static_cast<std::uint64_t>(k),
              static_cast<std::uint64_t>(i));
      y_pert[i] = perturb_observations(wobs.value, wobs.sigma, rng);
    }

    EnsembleRecord record;
    record.cycle = k;
    record.t_start = ts;
    record.t_end = te;
    record.forecast = x_f;
    record.n_obs = m;

    // Analysis update on the alive subset.
    alive_idx.clear();
    for (int i = 0; i < ne; ++i)
      if (alive[i]) alive_idx.push_back(i);
    if (m > 0 && !alive_idx.empty()) {
      std::vector<ControlVector> xf_sub;
      std::vector<std::vector<double>> yf_sub, yp_sub;
      for (int i : alive_idx) {
        xf_sub.push_back(x_f[i]);
        yf_sub.push_back(y_f[i]);
        yp_sub.push_back(y_pert[i]);
      }
      std::vector<double> r_diag(m);
      for (int j = 0; j < m; ++j) r_diag[j] = wobs.sigma[j] * wobs.sigma[j];
      record.gain = kalman_gain(xf_sub, yf_sub, r_diag);
      std::vector<ControlVector> xa_sub = analysis_update(
          xf_sub, yf_sub, yp_sub, record.gain, config.ks_floor);
      x_a = x_f;
      for (std::size_t a = 0; a < alive_idx.size(); ++a)
        x_a[alive_idx[a]] = xa_sub[a];

      double sum = 0.0, sumsq = 0.0;
      for (int j = 0; j < m; ++j) {
        double ybar = 0.0;
        for (int i : alive_idx) ybar += y_f[i][j];
        ybar /= static_cast<double>(alive_idx.size());
        const double d = wobs.value[j] - ybar;
        sum += d;
        sumsq += d * d;
      }
      record.innovation_mean = sum / m;
      record.innovation_rms = std::sqrt(sumsq / m);
    } else {
      x_a = x_f;
    }

    // Analyzed repropagation from the window start. It runs exactly to the
    // next cycle's start (full window on the last cycle): that stretch is
    // what the stitched analyzed output consumes, and the next cycle picks
    // up the end states.
    // Cadence ticks and snapshot instants belonging to this segment. Both
    // cursors only move forward, so every instant lands in exactly one
    // segment even when the cadence does not divide the shift.
    std::vector<double> ticks;
    for (long long j = next_tick;; ++j) {
      const double t = plan.t0 + static_cast<double>(j) * options.cadence;
      if (t > seg_end + 1e-9) break;
      ticks.push_back(t);
    }
    std::vector<double> snaps;
    for (std::size_t j = next_snapshot; j < options.snapshot_times.size() &&
                                        options.snapshot_times[j] <=
                                            seg_end + 1e-9;
         ++j)
      snaps.push_back(options.snapshot_times[j]);
    swe::WindowSampling rsamp = base_sampling;
    rsamp.gauge_times = ticks;
    rsamp.snapshot_times = snaps;

    std::vector<swe::WindowResult> rwin(ne);
    std::fill(ok.begin(), ok.end(), 0);
    parallel_members(ne, config.threads, [&](int i) {
      if (!alive[i]) return;
      try {
        MemberRun run = propagate_member(catchment, physics, x_a[i],
                                         member_state[i], seg_end, rsamp);
        member_state[i] = std::move(run.final_state);
        rwin[i] = std::move(run.window);
        ok[i] = 1;
      } catch (const SolverError&) {
        ok[i] = 0;
      }
    });
    for (int i = 0; i < ne; ++i) alive[i] = alive[i] && ok[i];
    check_failures(k);
    alive_idx.clear();
    for (int i = 0; i < ne; ++i)
      if (alive[i]) alive_idx.push_back(i);

    // Ensemble-mean analyzed levels and depth snapshots for this segment.
    const double inv_alive = 1.0 / static_cast<double>(alive_idx.size());
    for (std::size_t r = 0; r < ticks.size(); ++r) {
      for (std::size_t s = 0; s < n_stations; ++s) {
        double mean = 0.0;
        for (int i : alive_idx) mean += rwin[i].levels[r][s];
        mean *= inv_alive;
        result.analyzed[s].t.push_back(
            options.epoch + static_cast<std::int64_t>(std::llround(ticks[r])));
        result.analyzed[s].level.push_back(mean);
      }
    }
    for (std::size_t r = 0; r < snaps.size(); ++r) {
      MeanField field;
      field.t = snaps[r];
      field.h.assign(catchment.grid.size(), 0.0);
      for (int i : alive_idx) {
        const auto& hs = rwin[i].snapshots[r].h;
        for (std::size_t c = 0; c < field.h.size(); ++c)
          field.h[c] += hs[c];
      }
      for (double& v : field.h) v *= inv_alive;
      result.snapshots.push_back(std::move(field));
    }
    next_tick += static_cast<long long>(ticks.size());
    next_snapshot += snaps.size();

    record.analysis = x_a;
    record.alive.assign(alive.begin(), alive.end());
    result.records.push_back(std::move(record));
  }

  result.members_failed =
      ne - static_cast<int>(std::count(alive.begin(), alive.end(), char(1)));
  return result;
}

} // namespace floodda
