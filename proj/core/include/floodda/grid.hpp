#pragma once

#include <cstddef>
#include <vector>

namespace floodda {

/// Structured rectangular grid with bed elevation.
///
/// Storage is row-major with row 0 at the NORTH edge, matching raster file
/// order. Cell (ix, iy) has center x = x0 + (ix + 0.5) dx and
/// y = y0 + (ny - iy - 0.5) dy, so y decreases with increasing iy.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double dx = 0.0; ///< cell size in x [m]
  double dy = 0.0; ///< cell size in y [m]
  double x0 = 0.0; ///< west edge of the domain
  double y0 = 0.0; ///< south edge of the domain
  std::vector<double> zb; ///< bed elevation per cell [m]

  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx + ix;
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  double cell_area() const { return dx * dy; }
  double cell_x(int ix) const { return x0 + (ix + 0.5) * dx; }
  double cell_y(int iy) const { return y0 + (ny - iy - 0.5) * dy; }

  /// Throws DomainError unless dimensions are positive, spacings are
  /// positive and finite, and zb has nx*ny finite entries.
  void validate() const;
};

/// Physical and numerical constants shared by solver calls.
struct PhysicsParams {
  double g = 9.81;      ///< gravitational acceleration [m/s2]
  double nu_e = 0.0;    ///< effective eddy viscosity [m2/s], 0 disables
  double h_dry = 1e-3;  ///< wet/dry depth threshold [m]
  double cfl = 0.45;    ///< CFL number for stable_dt

  void validate() const;
};

/// Strickler coefficient per cell [m^(1/3)/s].
struct FrictionField {
  std::vector<double> ks;

  void validate(std::size_t ncells) const;
};

/// Depth and velocity fields at a time instant.
///
/// Invariant maintained by the solver: cells with h < h_dry carry zero
/// velocity. Depth is never negative.
struct HydraulicState {
  double t = 0.0; ///< simulation time [s]
  std::vector<double> h;
  std::vector<double> u;
  std::vector<double> v;

  static HydraulicState zero(const GridSpec& grid);
  void validate(const GridSpec& grid) const;
};

} // namespace floodda
