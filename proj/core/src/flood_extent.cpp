#include "floodda/flood_extent.hpp"

#include <cmath>

#include "floodda/errors.hpp"
#include "floodda/esri_ascii.hpp"

namespace floodda {

bool RasterGeometry::same_as(const RasterGeometry& other) const {
  const double tol = 1e-6 * cellsize;
  return ncols == other.ncols && nrows == other.nrows &&
         std::abs(cellsize - other.cellsize) <= tol &&
         std::abs(xllcorner - other.xllcorner) <= tol &&
         std::abs(yllcorner - other.yllcorner) <= tol;
}

void RasterGeometry::validate() const {
  if (ncols <= 0 || nrows <= 0)
    throw DomainError("raster dimensions must be positive");
  if (!(cellsize > 0.0)) throw DomainError("raster cellsize must be positive");
}

BinaryFloodRaster rasterize_flood(const HydraulicState& state,
                                  const GridSpec& grid,
                                  const RasterGeometry& target,
                                  double threshold) {
  target.validate();
  state.validate(grid);
  if (!(threshold >= 0.0))
    throw DomainError("rasterize_flood: threshold must be >= 0");

  BinaryFloodRaster out;
  out.geo = target;
  out.cells.assign(static_cast<std::size_t>(target.ncols) * target.nrows, -1);

  long long inside = 0;
  for (int row = 0; row < target.nrows; ++row) {
    const double y =
        target.yllcorner + (target.nrows - row - 0.5) * target.cellsize;
    for (int col = 0; col < target.ncols; ++col) {
      const double x = target.xllcorner + (col + 0.5) * target.cellsize;
      const int ix = static_cast<int>(std::floor((x - grid.x0) / grid.dx));
      const int iy_from_south =
          static_cast<int>(std::floor((y - grid.y0) / grid.dy));
      const int iy = grid.ny - 1 - iy_from_south;
      if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) continue;
      ++inside;
      out.at(col, row) = state.h[grid.idx(ix, iy)] > threshold ? 1 : 0;
    }
  }
  if (inside == 0)
    throw DomainError("rasterize_flood: raster does not overlap the domain");
  return out;
}

BinaryFloodRaster majority_filter(const BinaryFloodRaster& raster, int size) {
  if (size < 1 || size % 2 == 0)
    throw DomainError("majority_filter: size must be odd and >= 1");
  const int half = size / 2;
  BinaryFloodRaster out = raster;
  for (int row = 0; row < raster.geo.nrows; ++row) {
    for (int col = 0; col < raster.geo.ncols; ++col) {
      if (raster.at(col, row) < 0) continue; // nodata never changes
      int wet = 0, dry = 0;
      for (int r = std::max(0, row - half);
           r <= std::min(raster.geo.nrows - 1, row + half); ++r) {
        for (int c = std::max(0, col - half);
             c <= std::min(raster.geo.ncols - 1, col + half); ++c) {
          const std::int8_t v = raster.at(c, r);
          if (v == 1)
            ++wet;
          else if (v == 0)
            ++dry;
        }
      }
      if (wet > dry)
        out.at(col, row) = 1;
      else if (dry > wet)
        out.at(col, row) = 0;
      // tie: keep the original value
    }
  }
  return out;
}

ContingencyTable contingency(const BinaryFloodRaster& prediction,
                             const BinaryFloodRaster& reference) {
  if (!prediction.geo.same_as(reference.geo))
    throw DomainError("contingency: raster geometries differ");
  ContingencyTable t;
  for (std::size_t i = 0; i < prediction.cells.size(); ++i) {
    const std::int8_t p = prediction.cells[i];
    const std::int8_t r = reference.cells[i];
    if (p < 0 || r < 0) continue;
    if (p == 1 && r == 1)
      ++t.tp;
    else if (p == 1)
      ++t.fp;
    else if (r == 1)
      ++t.fn;
    else
      ++t.tn;
  }
  return t;
}

double csi(const ContingencyTable& table) {
  const long long denom = table.tp + table.fp + table.fn;
  if (denom == 0)
    throw DomainError("csi: no wet pixels in prediction or reference");
  return static_cast<double>(table.tp) / static_cast<double>(denom);
}

long long wet_pixel_count(const BinaryFloodRaster& raster,
                          const VirtualBox& box) {
  if (box.col0 > box.col1 || box.row0 > box.row1)
    throw DomainError("wet_pixel_count: box corners out of order");
  if (box.col0 < 0 || box.row0 < 0 || box.col1 >= raster.geo.ncols ||
      box.row1 >= raster.geo.nrows)
    throw DomainError("wet_pixel_count: box outside the raster");
  long long count = 0;
  for (int row = box.row0; row <= box.row1; ++row)
    for (int col = box.col0; col <= box.col1; ++col)
      if (raster.at(col, row) == 1) ++count;
  return count;
}

BinaryFloodRaster apply_pixel_noise(const BinaryFloodRaster& raster, double p,
                                    Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("apply_pixel_noise: p must lie in [0, 1]");
  BinaryFloodRaster out = raster;
  for (auto& v : out.cells) {
    if (v < 0) continue;
    if (rng.uniform() < p) v = static_cast<std::int8_t>(1 - v);
  }
  return out;
}

std::vector<BinaryFloodRaster> make_reference_maps(
    const std::vector<HydraulicState>& truth_states, const GridSpec& grid,
    const RasterGeometry& target, double threshold, double p_noise,
    int filter_size, Rng& rng) {
  std::vector<BinaryFloodRaster> maps;
  maps.reserve(truth_states.size());
  for (const auto& state : truth_states) {
    BinaryFloodRaster r = rasterize_flood(state, grid, target, threshold);
    r = apply_pixel_noise(r, p_noise, rng);
    maps.push_back(majority_filter(r, filter_size));
  }
  return maps;
}

BinaryFloodRaster read_flood_raster(const std::string& path) {
  AsciiGrid g = read_esri_ascii(path);
  BinaryFloodRaster out;
  out.geo = {g.ncols, g.nrows, g.xllcorner, g.yllcorner, g.cellsize};
  out.cells.resize(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double v = g.values[i];
    if (v == g.nodata)
      out.cells[i] = -1;
    else if (v == 0.0)
      out.cells[i] = 0;
    else if (v == 1.0)
      out.cells[i] = 1;
    else
      throw FormatError(path + ": flood raster values must be 0, 1 or nodata");
  }
  return out;
}

void write_flood_raster(const std::string& path,
                        const BinaryFloodRaster& raster) {
  AsciiGrid g;
  g.ncols = raster.geo.ncols;
  g.nrows = raster.geo.nrows;
  g.xllcorner = raster.geo.xllcorner;
  g.yllcorner = raster.geo.yllcorner;
  g.cellsize = raster.geo.cellsize;
  g.nodata = -9999.0;
  g.values.resize(raster.cells.size());
  for (std::size_t i = 0; i < raster.cells.size(); ++i)
    g.values[i] = raster.cells[i] < 0 ? g.nodata : raster.cells[i];
  write_esri_ascii(path, g);
}

} // namespace floodda
