#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "floodda/grid.hpp"
#include "floodda/rng.hpp"

namespace floodda {

/// Placement of a raster in model coordinates (row 0 at the north edge).
struct RasterGeometry {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 0.0;

  bool same_as(const RasterGeometry& other) const;
  void validate() const;
};

/// Wet/dry map: 1 wet, 0 dry, -1 outside the model domain.
struct BinaryFloodRaster {
  RasterGeometry geo;
  std::vector<std::int8_t> cells;

  std::int8_t at(int col, int row) const {
    return cells[static_cast<std::size_t>(row) * geo.ncols + col];
  }
  std::int8_t& at(int col, int row) {
    return cells[static_cast<std::size_t>(row) * geo.ncols + col];
  }
};

/// Classify each raster pixel from the depth at the model cell containing
/// the pixel center (nearest-cell sampling). Wet means depth strictly above
/// the threshold; pixels outside the domain are nodata. Throws DomainError
/// when no pixel center falls inside the domain.
BinaryFloodRaster rasterize_flood(const HydraulicState& state,
                                  const GridSpec& grid,
                                  const RasterGeometry& target,
                                  double threshold = 0.05);

/// Majority vote over the size x size neighborhood (size odd, >= 1).
/// Nodata pixels stay nodata and do not vote; neighborhoods truncate at the
/// border; a tied vote keeps the original value.
BinaryFloodRaster majority_filter(const BinaryFloodRaster& raster,
                                  int size = 3);

struct ContingencyTable {
  long long tp = 0; ///< wet in both
  long long fp = 0; ///< wet in prediction only
  long long fn = 0; ///< wet in reference only
  long long tn = 0; ///< dry in both
};

/// Pixel-wise comparison. Pixels that are nodata in either raster are
/// excluded. Geometries must agree; mismatch raises DomainError.
ContingencyTable contingency(const BinaryFloodRaster& prediction,
                             const BinaryFloodRaster& reference);

/// Critical success index TP / (TP + FP + FN). Throws DomainError when the
/// denominator is zero (no wet pixels anywhere).
double csi(const ContingencyTable& table);

/// Axis-aligned pixel rectangle used for localized wet-area totals.
struct VirtualBox {
  std::string id;
  int col0 = 0, row0 = 0; ///< inclusive
  int col1 = 0, row1 = 0; ///< inclusive
};

/// Wet pixels inside the box (nodata and dry ignored). The box must lie
/// within the raster.
long long wet_pixel_count(const BinaryFloodRaster& raster,
                          const VirtualBox& box);

/// Independently flip each wet/dry pixel with probability p. Nodata pixels
/// never flip.
BinaryFloodRaster apply_pixel_noise(const BinaryFloodRaster& raster, double p,
                                    Rng& rng);

/// Reference maps for a twin experiment: rasterize the true state, corrupt
/// it with pixel noise, then despeckle with the majority filter. One map
/// per input state, noise drawn in order from rng.
std::vector<BinaryFloodRaster> make_reference_maps(
    const std::vector<HydraulicState>& truth_states, const GridSpec& grid,
    const RasterGeometry& target, double threshold, double p_noise,
    int filter_size, Rng& rng);

/// Raster file round-trip (ESRI ASCII, values 0/1/nodata).
BinaryFloodRaster read_flood_raster(const std::string& path);
void write_flood_raster(const std::string& path,
                        const BinaryFloodRaster& raster);

} // namespace floodda
