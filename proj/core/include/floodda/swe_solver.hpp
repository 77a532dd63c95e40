#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "floodda/catchment.hpp"
#include "floodda/grid.hpp"

namespace floodda {
namespace swe {

/// Strickler friction acceleration (du/dt, dv/dt) for one wet column.
/// Throws DomainError for h <= 0 or ks <= 0.
std::pair<double, double> friction_acceleration(double h, double u, double v,
                                                double ks, double g);

/// Largest stable explicit time step: cfl * min over wet cells of
/// min(dx, dy) / (|u| + |v| + sqrt(g h)). Cells below h_dry are ignored;
/// an entirely dry state raises DomainError.
double stable_dt(const HydraulicState& state, const GridSpec& grid,
                 const PhysicsParams& params);

/// Water volume in the domain [m3].
double total_volume(const HydraulicState& state, const GridSpec& grid);

/// What run_window should record along the way.
struct WindowSampling {
  std::vector<double> gauge_times;          ///< absolute times, ascending
  std::vector<GaugeStation> gauges;
  std::vector<double> snapshot_times;       ///< absolute times, ascending
};

struct WindowResult {
  /// levels[i][g]: gauge reading (surface elevation minus the station
  /// datum) at gauge g, gauge_times[i].
  std::vector<std::vector<double>> levels;
  /// Full states at snapshot_times (same order).
  std::vector<HydraulicState> snapshots;
  double inflow_volume = 0.0;   ///< volume added through the upstream group
  double outflow_volume = 0.0;  ///< volume removed through the rating group
};

/// Reusable explicit first-order finite-volume stepper.
///
/// Spatial scheme: Rusanov fluxes on (h, hu, hv) with hydrostatic bed
/// reconstruction at faces, which keeps a lake at rest exact on any
/// bathymetry, including wet/dry shorelines. Closed edges reflect; the
/// optional boundary driver adds hydrograph inflow as a mass source and a
/// rating-curve stage ghost on the downstream group. Friction is applied
/// point-implicitly at the end of each step so shallow fast cells cannot
/// overshoot. Cells ending below h_dry keep their mass but lose velocity.
class SweEngine {
public:
  SweEngine(const GridSpec& grid, const FrictionField& friction,
            const PhysicsParams& params,
            const BoundaryDriver* boundary = nullptr);

  /// Advance one step of length dt. Throws SolverError if the state goes
  /// non-finite.
  void step(HydraulicState& state, double dt);

  /// stable_dt() of the current state; never larger than max_dt.
  double suggest_dt(const HydraulicState& state, double max_dt) const;

  double inflow_volume() const { return inflow_volume_; }
  double outflow_volume() const { return outflow_volume_; }
  void reset_accounting() { inflow_volume_ = outflow_volume_ = 0.0; }

private:
  void add_inflow(HydraulicState& state, double dt);
  double rating_stage(const HydraulicState& state) const;

  const GridSpec& grid_;
  const FrictionField& friction_;
  PhysicsParams params_;
  const BoundaryDriver* boundary_;
  std::vector<double> dh_, dqx_, dqy_;
  std::vector<double> inflow_w_;
  // Per-cell open-face mask, bits: 1=east, 2=west, 4=north, 8=south.
  std::vector<std::uint8_t> open_;
  double inflow_volume_ = 0.0;
  double outflow_volume_ = 0.0;
};

/// One explicit step as a pure function (closed walls all around).
HydraulicState step(const HydraulicState& state, const GridSpec& grid,
                    const FrictionField& friction,
                    const PhysicsParams& params, double dt);

/// Advance state to t_end with adaptive dt, recording gauge levels and
/// snapshots at the requested times. The state is advanced in place and
/// also returned in the result via snapshots. Sampling times are hit
/// exactly by shortening steps. When the domain is entirely dry but inflow
/// is pending, a one-second bootstrap step is used.
WindowResult run_window(HydraulicState& state, double t_end,
                        const GridSpec& grid, const FrictionField& friction,
                        const PhysicsParams& params,
                        const BoundaryDriver* boundary,
                        const WindowSampling& sampling);

} // namespace swe
} // namespace floodda
