#include <doctest.h>

#include <filesystem>

#include "floodda/errors.hpp"
#include "floodda/flood_extent.hpp"
#include "floodda/grid.hpp"
#include "floodda/rng.hpp"

using namespace floodda;
namespace fs = std::filesystem;

namespace {

BinaryFloodRaster blank(int ncols, int nrows, std::int8_t fill) {
  BinaryFloodRaster r;
  r.geo = {ncols, nrows, 0.0, 0.0, 1.0};
  r.cells.assign(static_cast<std::size_t>(ncols) * nrows, fill);
  return r;
}

} // namespace

TEST_CASE("critical success index hand values") {
  ContingencyTable t;
  t.tp = 3;
  t.fp = 1;
  t.fn = 2;
  t.tn = 1000;
  CHECK(csi(t) == 0.5); // exact: 3 / (3 + 1 + 2)
  ContingencyTable empty;
  empty.tn = 5;
  CHECK_THROWS_AS(csi(empty), DomainError);
}

TEST_CASE("rasterization samples the nearest cell and masks outside") {
  GridSpec g;
  g.nx = 4;
  g.ny = 2;
  g.dx = g.dy = 10.0;
  g.x0 = 0.0;
  g.y0 = 0.0;
  g.zb.assign(8, 0.0);
  HydraulicState s = HydraulicState::zero(g);
  s.h[g.idx(1, 0)] = 0.2;  // north row
  s.h[g.idx(2, 1)] = 0.04; // below the 5 cm threshold

  RasterGeometry target{6, 2, -10.0, 0.0, 10.0};
  BinaryFloodRaster r = rasterize_flood(s, g, target, 0.05);
  CHECK(r.at(0, 0) == -1); // west of the domain
  CHECK(r.at(2, 0) == 1);  // the wet cell
  CHECK(r.at(3, 1) == 0);  // wet but below threshold
  CHECK(r.at(5, 0) == -1); // east of the domain

  RasterGeometry outside{3, 3, 1000.0, 1000.0, 10.0};
  CHECK_THROWS_AS(rasterize_flood(s, g, outside, 0.05), DomainError);
}

TEST_CASE("majority filter removes speckle and keeps nodata") {
  BinaryFloodRaster r = blank(7, 5, 0);
  r.cells[r.geo.ncols * 2 + 3] = 1; // single isolated wet pixel
  BinaryFloodRaster f = majority_filter(r, 3);
  CHECK(f.at(3, 2) == 0);

  // a solid wet block survives
  BinaryFloodRaster w = blank(7, 5, 1);
  w.cells[w.geo.ncols * 2 + 3] = 0;
  BinaryFloodRaster fw = majority_filter(w, 3);
  CHECK(fw.at(3, 2) == 1);
  CHECK(fw.at(0, 0) == 1);

  // nodata neither votes nor changes
  BinaryFloodRaster n = blank(3, 3, 1);
  n.cells[4] = -1;
  BinaryFloodRaster fn_r = majority_filter(n, 3);
  CHECK(fn_r.at(1, 1) == -1);

  // size 1 is the identity
  BinaryFloodRaster id = majority_filter(r, 1);
  for (std::size_t i = 0; i < r.cells.size(); ++i)
    CHECK(id.cells[i] == r.cells[i]);
}

TEST_CASE("majority filter tie keeps the original value") {
  // corner neighborhood of a 2x2 block: 2 wet vs 2 dry
  BinaryFloodRaster r = blank(2, 2, 0);
  r.cells[0] = 1;
  r.cells[3] = 1;
  BinaryFloodRaster f = majority_filter(r, 3);
  CHECK(f.at(0, 0) == 1);
  CHECK(f.at(1, 0) == 0);
}

TEST_CASE("contingency counts cover every unmasked pixel") {
  Rng rng(99, "contingency");
  for (int trial = 0; trial < 200; ++trial) {
    BinaryFloodRaster a = blank(9, 7, 0);
    BinaryFloodRaster b = blank(9, 7, 0);
    long long unmasked = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      const double ua = rng.uniform(), ub = rng.uniform();
      a.cells[i] = ua < 0.15 ? -1 : (ua < 0.55 ? 1 : 0);
      b.cells[i] = ub < 0.15 ? -1 : (ub < 0.55 ? 1 : 0);
      if (a.cells[i] != -1 && b.cells[i] != -1) ++unmasked;
    }
    ContingencyTable t = contingency(a, b);
    CHECK(t.tp + t.fp + t.fn + t.tn == unmasked);
  }

  BinaryFloodRaster geo_mismatch = blank(8, 7, 0);
  CHECK_THROWS_AS(contingency(blank(9, 7, 0), geo_mismatch), DomainError);
}

TEST_CASE("virtual box wet counts") {
  BinaryFloodRaster r = blank(10, 6, 0);
  for (int row = 1; row <= 3; ++row)
    for (int col = 2; col <= 5; ++col) r.cells[row * 10 + col] = 1;
  r.cells[2 * 10 + 3] = -1;
  VirtualBox box{"B", 2, 1, 5, 3};
  CHECK(wet_pixel_count(r, box) == 11); // 12 wet minus one nodata
  VirtualBox outside{"X", 8, 4, 12, 5};
  CHECK_THROWS_AS(wet_pixel_count(r, outside), DomainError);
}

TEST_CASE("pixel noise flips about p of the data pixels") {
  BinaryFloodRaster r = blank(100, 100, 0);
  for (int i = 0; i < 100; ++i) r.cells[i] = -1; // top row masked
  Rng rng(4, "noise");
  BinaryFloodRaster n = apply_pixel_noise(r, 0.02, rng);
  long long flips = 0;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    CHECK((r.cells[i] == -1) == (n.cells[i] == -1));
    if (r.cells[i] != -1 && n.cells[i] != r.cells[i]) ++flips;
  }
  // 9900 data pixels at p=0.02: mean 198, three sigmas is about 42
  CHECK(flips > 150);
  CHECK(flips < 245);
}

TEST_CASE("flood raster files round trip") {
  BinaryFloodRaster r = blank(5, 4, 0);
  r.cells[3] = 1;
  r.cells[7] = -1;
  const fs::path dir = fs::temp_directory_path() / "floodda_raster_test";
  fs::create_directories(dir);
  const std::string path = (dir / "f.asc").string();
  write_flood_raster(path, r);
  BinaryFloodRaster back = read_flood_raster(path);
  CHECK(back.geo.same_as(r.geo));
  for (std::size_t i = 0; i < r.cells.size(); ++i)
    CHECK(back.cells[i] == r.cells[i]);
  fs::remove_all(dir);
}
