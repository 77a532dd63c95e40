#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "floodda/catchment.hpp"
#include "floodda/control.hpp"
#include "floodda/gauges.hpp"
#include "floodda/grid.hpp"
#include "floodda/swe_solver.hpp"

namespace floodda {

/// Sliding assimilation windows: cycle k covers
/// [t0 + k shift, t0 + k shift + window_length].
struct CyclePlan {
  double t0 = 0.0;
  double window_length = 43200.0; ///< 12 h
  double shift = 21600.0;         ///< 6 h
  int n_cycles = 0;

  std::pair<double, double> window(int k) const;
  double end_time() const { return t0 + (n_cycles - 1) * shift + window_length; }

  /// Plan covering [t0, t_end] exactly. t_end - t0 must equal
  /// window_length plus a whole number of shifts.
  static CyclePlan cover(double t0, double t_end, double window_length,
                         double shift);
  void validate() const;
};

/// Ensemble configuration. station_bias entries follow the catchment gauge
/// order and are subtracted from every model observation equivalent.
struct EnkfConfig {
  int ne = 24;
  double lambda = 0.3;       ///< persistence weight in the forecast spread
  double tau = 0.15;         ///< relative observation error
  ControlPrior prior;
  std::array<double, ControlVector::size> x0{17.0, 45.0, 38.0, 40.0,
                                             1.0,  0.0,  0.0};
  std::vector<double> station_bias;
  bool friction_only = false; ///< freeze a, b, c at their nominal values
  double ks_floor = 1.0;
  double sigma_floor = 0.001; ///< 1 mm observation error floor
  double max_failure_fraction = 0.25;
  int threads = 0;            ///< 0: hardware concurrency

  void validate() const;
};

/// Observations gathered for one assimilation window, in time order.
struct WindowObservations {
  std::vector<double> time;    ///< simulation seconds
  std::vector<int> station;
  std::vector<double> value;
  std::vector<double> sigma;

  std::size_t size() const { return time.size(); }
};

/// Collect observations with t_start < t <= t_end from per-station series.
/// sigma_j = max(tau * |y_j|, sigma_floor).
WindowObservations collect_window_observations(
    const std::vector<GaugeSeries>& series, std::int64_t epoch,
    double t_start, double t_end, double tau, double sigma_floor);

/// Forecast-step control ensemble. Cycle 0 disperses around x0; later
/// cycles blend the previous analysis toward its mean and refresh with new
/// perturbations: x_f,i = mean + lambda (x_a,i - mean) + (1 - lambda) th_i.
/// prev_analysis and theta must be aligned and non-empty; results are
/// clamped to the valid control region.
std::vector<ControlVector> forecast_controls(
    int cycle, const std::array<double, ControlVector::size>& x0,
    const std::vector<ControlVector>& prev_analysis,
    const std::vector<std::array<double, ControlVector::size>>& theta,
    double lambda, double ks_floor);

/// K = Pxy (Pyy + R)^-1 with ensemble covariances normalized by the member
/// count: Pxy = X Y^T / N, Pyy = Y Y^T / N, anomalies about the ensemble
/// means. Row-major 7 x m result. Throws NumericalError when the innovation
/// covariance cannot be factorized.
struct GainMatrix {
  int n_obs = 0;
  std::vector<double> k; ///< row-major, ControlVector::size rows

  double at(int row, int col) const { return k[row * n_obs + col]; }
};
GainMatrix kalman_gain(const std::vector<ControlVector>& x_members,
                       const std::vector<std::vector<double>>& y_members,
                       const std::vector<double>& r_diag);

/// One member's perturbed observation copy: y_j + N(0, sigma_j).
std::vector<double> perturb_observations(const std::vector<double>& values,
                                         const std::vector<double>& sigma,
                                         Rng& rng);

/// x_a,i = x_f,i + K (y_o,i - y_f,i), clamped.
std::vector<ControlVector> analysis_update(
    const std::vector<ControlVector>& x_forecast,
    const std::vector<std::vector<double>>& y_forecast,
    const std::vector<std::vector<double>>& y_perturbed,
    const GainMatrix& gain, double ks_floor);

/// Run one member over [state.t, t_end] under a given control vector:
/// friction from the zone map, inflow from the perturbed hydrograph.
struct MemberRun {
  HydraulicState final_state;
  swe::WindowResult window;
};
MemberRun propagate_member(const Catchment& catchment,
                           const PhysicsParams& physics,
                           const ControlVector& control,
                           HydraulicState state, double t_end,
                           const swe::WindowSampling& sampling);

/// Per-cycle bookkeeping kept for reports and tests.
struct EnsembleRecord {
  int cycle = 0;
  double t_start = 0.0, t_end = 0.0;
  std::vector<ControlVector> forecast;
  std::vector<ControlVector> analysis;
  std::vector<char> alive;
  int n_obs = 0;
  double innovation_mean = 0.0;
  double innovation_rms = 0.0;
  GainMatrix gain;
};

/// Mean analyzed depth field at one instant.
struct MeanField {
  double t = 0.0;
  std::vector<double> h;
};

struct AssimOptions {
  std::int64_t epoch = 0;      ///< timestamp of simulation time zero
  double cadence = 900.0;      ///< analyzed series sampling interval
  std::vector<double> snapshot_times;

  void validate() const;
};

struct AssimilationResult {
  std::vector<EnsembleRecord> records;
  std::vector<GaugeSeries> analyzed; ///< per station, stitched from cycles
  std::vector<MeanField> snapshots;  ///< at AssimOptions::snapshot_times
  int members_failed = 0;
};

/// The cycled ensemble Kalman filter.
///
/// Each cycle: disperse controls, propagate every member over the window,
/// correct model equivalents by the station bias, update against perturbed
/// observations, then repropagate the analyzed members from the window
/// start. Repropagation runs to the next cycle's start (the full window on
/// the last cycle), which is exactly the stretch that ends up in the
/// stitched analyzed output, so nothing is computed twice. Members whose
/// propagation fails are dropped for good; losing more than
/// max_failure_fraction of the ensemble aborts. All randomness derives from
/// the seed via named substreams, so results are bit-reproducible and
/// independent of the thread count.
AssimilationResult run_assimilation(const Catchment& catchment,
                                    const PhysicsParams& physics,
                                    const std::vector<GaugeSeries>& obs,
                                    const CyclePlan& plan,
                                    const EnkfConfig& config,
                                    std::uint64_t seed,
                                    const HydraulicState& initial_state,
                                    const AssimOptions& options);

} // namespace floodda
