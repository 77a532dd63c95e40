#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "floodda/catchment.hpp"
#include "floodda/errors.hpp"
#include "floodda/esri_ascii.hpp"
#include "floodda/grid.hpp"
#include "floodda/rng.hpp"

using namespace floodda;
namespace fs = std::filesystem;

namespace {
fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "floodda_grid_test";
  fs::create_directories(dir);
  return dir;
}
} // namespace

TEST_CASE("grid indexing and cell centers") {
  GridSpec g;
  g.nx = 4;
  g.ny = 3;
  g.dx = 10.0;
  g.dy = 20.0;
  g.x0 = 100.0;
  g.y0 = 1000.0;
  g.zb.assign(12, 0.0);
  g.validate();

  CHECK(g.idx(0, 0) == 0);
  CHECK(g.idx(3, 2) == 11);
  CHECK(g.cell_x(0) == 105.0);
  // row 0 is the northernmost row
  CHECK(g.cell_y(0) == 1050.0);
  CHECK(g.cell_y(2) == 1010.0);

  GridSpec bad = g;
  bad.zb.resize(5);
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("state validation enforces finite non-negative depths") {
  GridSpec g;
  g.nx = 2;
  g.ny = 2;
  g.dx = g.dy = 1.0;
  g.zb.assign(4, 0.0);
  HydraulicState s = HydraulicState::zero(g);
  CHECK_NOTHROW(s.validate(g));
  s.h[1] = -0.01;
  CHECK_THROWS_AS(s.validate(g), DomainError);
  s.h[1] = 0.0;
  s.u[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.validate(g), DomainError);
}

TEST_CASE("esri ascii raster round trip is bit exact") {
  AsciiGrid a;
  a.ncols = 3;
  a.nrows = 2;
  a.xllcorner = -12.5;
  a.yllcorner = 7.25;
  a.cellsize = 2.5;
  a.nodata = -9999.0;
  a.values = {0.1, -1.0 / 3.0, 2.0, 1e-17, 951868800.0, -9999.0};

  const fs::path dir = test_dir();
  const std::string path = (dir / "r.asc").string();
  write_esri_ascii(path, a);
  AsciiGrid b = read_esri_ascii(path);
  CHECK(b.ncols == a.ncols);
  CHECK(b.nrows == a.nrows);
  CHECK(b.xllcorner == a.xllcorner);
  CHECK(b.yllcorner == a.yllcorner);
  CHECK(b.cellsize == a.cellsize);
  CHECK(b.nodata == a.nodata);
  REQUIRE(b.values.size() == a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(b.values[i] == a.values[i]);
  fs::remove_all(dir);
}

TEST_CASE("esri ascii header handling") {
  const fs::path dir = test_dir();
  const std::string path = (dir / "h.asc").string();
  {
    std::ofstream out(path);
    out << "NCOLS 2\nnrows 1\nXLLCORNER 0\nyllcorner 0\nCellSize 1\n1 2\n";
  }
  AsciiGrid g = read_esri_ascii(path);
  CHECK(g.ncols == 2);
  CHECK(g.values[1] == 2.0);

  {
    std::ofstream out(path);
    out << "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1\n";
  }
  CHECK_THROWS_AS(read_esri_ascii(path), FormatError);

  {
    std::ofstream out(path);
    out << "ncols 2\nnrows 1\nxllcorner 0\ncellsize 1\n1 2\n";
  }
  CHECK_THROWS_AS(read_esri_ascii(path), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("restart files reproduce the state exactly") {
  GridSpec g;
  g.nx = 3;
  g.ny = 2;
  g.dx = g.dy = 5.0;
  g.zb = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  HydraulicState s = HydraulicState::zero(g);
  Rng rng(11, "restart");
  for (int i = 0; i < 6; ++i) {
    s.h[i] = rng.uniform();
    s.u[i] = rng.normal(0.0, 1.0);
    s.v[i] = rng.normal(0.0, 1.0);
  }
  s.t = 1234.5678;

  const fs::path dir = test_dir();
  const std::string path = (dir / "restart.txt").string();
  save_restart(path, s, g);
  HydraulicState r = load_restart(path, g);
  CHECK(r.t == s.t);
  for (int i = 0; i < 6; ++i) {
    CHECK(r.h[i] == s.h[i]);
    CHECK(r.u[i] == s.u[i]);
    CHECK(r.v[i] == s.v[i]);
  }

  GridSpec other = g;
  other.nx = 4;
  other.zb.resize(8, 0.0);
  CHECK_THROWS_AS(load_restart(path, other), FormatError);
  fs::remove_all(dir);
}
