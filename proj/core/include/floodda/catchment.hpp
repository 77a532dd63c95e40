#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "floodda/grid.hpp"

namespace floodda {

/// Stage-discharge relation at the downstream boundary.
///
/// Either a power law Q = alpha * (h - h0)^beta for h > h0, or a tabulated
/// curve interpolated linearly. Q is non-decreasing in h and zero at or
/// below the datum h0, which makes the curve invertible on its wet range.
class RatingCurve {
public:
  static RatingCurve power_law(double alpha, double h0, double beta);
  /// Table of (depth, discharge) pairs, strictly increasing in depth,
  /// non-decreasing in discharge, first discharge equal to zero.
  static RatingCurve table(std::vector<std::pair<double, double>> points);

  /// Discharge for a given depth. Total on [0, inf); depths above the last
  /// table knot extrapolate along the final segment.
  double eval(double h) const;

  /// Depth producing a given discharge. Throws DomainError for negative
  /// discharge or discharge above the tabulated range.
  double invert(double q) const;

  /// Largest invertible discharge (infinite for power laws).
  double max_discharge() const;

  bool is_power_law() const { return power_law_; }
  double alpha() const { return alpha_; }
  double h0() const { return h0_; }
  double beta() const { return beta_; }
  const std::vector<std::pair<double, double>>& points() const {
    return points_;
  }

private:
  RatingCurve() = default;
  bool power_law_ = true;
  double alpha_ = 0.0, h0_ = 0.0, beta_ = 1.0;
  std::vector<std::pair<double, double>> points_;
};

/// Piecewise-linear discharge time series Q(t), t in seconds.
class Hydrograph {
public:
  Hydrograph() = default;
  /// Knots with strictly increasing times and finite non-negative flows.
  Hydrograph(std::vector<double> t, std::vector<double> q);

  /// Linear interpolation between knots, constant extrapolation outside.
  double at(double time) const;

  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& flows() const { return q_; }
  bool empty() const { return t_.empty(); }

private:
  std::vector<double> t_;
  std::vector<double> q_;
};

/// Convenience wrapper mirroring Hydrograph::at.
double inflow_at(const Hydrograph& hydro, double time);

/// Assignment of every cell to one of four Strickler zones.
/// Zone 0 is the floodplain; zones 1..3 are river reaches.
struct FrictionZoning {
  std::vector<int> zone;                ///< per cell, values in 0..3
  static constexpr int n_zones = 4;

  void validate(const GridSpec& grid) const;
  /// Expand zone values into a per-cell friction field.
  FrictionField to_friction(const GridSpec& grid,
                            const std::array<double, 4>& ks) const;
};

enum class Side { west, east, north, south };

struct BoundaryCell {
  int ix = 0;
  int iy = 0;
  Side side = Side::west;
};

/// Open-boundary forcing: hydrograph inflow distributed over an upstream
/// cell group and a rating-curve stage condition on a downstream group.
///
/// Inflow is split over the upstream cells by relative conveyance
/// Ks h^(5/3); when the whole group is dry it falls back to an even split
/// over the cells within half a metre of the group's lowest bed.
struct BoundaryDriver {
  std::vector<BoundaryCell> upstream;
  Hydrograph inflow;
  std::vector<BoundaryCell> downstream;
  RatingCurve rating = RatingCurve::power_law(1.0, 0.0, 1.0);

  void validate(const GridSpec& grid) const;
};

/// Water-level gauge fixed to one grid cell. Reported level is the water
/// surface elevation zb + h minus the station datum.
struct GaugeStation {
  std::string name;
  int ix = 0;
  int iy = 0;
  double datum = 0.0;
};

/// Everything static about a model domain.
struct Catchment {
  GridSpec grid;
  FrictionZoning zoning;
  std::array<double, 4> ks_default{17.0, 45.0, 38.0, 40.0};
  BoundaryDriver boundary;
  std::vector<GaugeStation> gauges;

  void validate() const;
};

/// Parameters for the built-in synthetic river valley.
///
/// A straight channel of channel_rows rows runs west to east down a uniform
/// slope, flanked by a floodplain raised by bank_height and tilted away from
/// the channel by cross_step per row. Small deterministic bed roughness is
/// added on the floodplain. Zone 0 covers the floodplain; the channel is cut
/// into three reaches (zones 1..3) of equal length. One gauge sits in each
/// reach. Inflow enters across the west edge; the east-edge channel cells
/// carry a rating curve consistent with uniform flow in the last reach.
struct SyntheticSpec {
  int nx = 32;
  int ny = 12;
  double dx = 150.0;
  int channel_row0 = 5;
  int channel_rows = 2;
  double z_downstream = 0.05;
  double slope = 0.00125;
  double bank_height = 0.5;
  double cross_step = 0.25;
  double rough_amp = 0.03;
  std::uint64_t micro_seed = 7771;
  std::array<double, 4> ks{17.0, 45.0, 38.0, 40.0};
  double base_flow = 150.0;
  std::array<double, 3> gauge_fracs{0.18, 0.5, 0.82};
  /// Station datums sit this far below the local bed, so gauges report a
  /// stage of a few metres the way operational stations do.
  double stage_offset = 2.5;
  /// Refines dx by this factor while covering the same physical domain.
  int resolution_factor = 1;

  void validate() const;
};

Catchment make_synthetic_catchment(const SyntheticSpec& spec);

/// Write/read a solver state for exact continuation. The text format
/// round-trips every double bit-exactly.
void save_restart(const std::string& path, const HydraulicState& state,
                  const GridSpec& grid);
HydraulicState load_restart(const std::string& path, const GridSpec& grid);

} // namespace floodda
