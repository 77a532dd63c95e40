#include "floodda/esri_ascii.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "floodda/errors.hpp"
#include "floodda/time_utils.hpp"

namespace floodda {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool looks_numeric(const std::string& tok) {
  char c = tok[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
         c == '+' || c == '.';
}

} // namespace

AsciiGrid read_esri_ascii(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open raster file: " + path);

  AsciiGrid g;
  bool have_ncols = false, have_nrows = false, have_xll = false,
       have_yll = false, have_cell = false;

  // Header: key/value lines until the first purely numeric token.
  std::string tok;
  while (in >> tok) {
    if (looks_numeric(tok)) break;
    std::string key = lower(tok);
    std::string val;
    if (!(in >> val))
      throw FormatError(path + ": header key '" + tok + "' has no value");
    auto num = [&]() {
      try {
        std::size_t pos = 0;
        double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
      } catch (const std::exception&) {
        throw FormatError(path + ": bad value '" + val + "' for header key '" +
                          tok + "'");
      }
    };
    if (key == "ncols") {
      g.ncols = static_cast<int>(num());
      have_ncols = true;
    } else if (key == "nrows") {
      g.nrows = static_cast<int>(num());
      have_nrows = true;
    } else if (key == "xllcorner") {
      g.xllcorner = num();
      have_xll = true;
    } else if (key == "yllcorner") {
      g.yllcorner = num();
      have_yll = true;
    } else if (key == "cellsize") {
      g.cellsize = num();
      have_cell = true;
    } else if (key == "nodata_value") {
      g.nodata = num();
    } else {
      throw FormatError(path + ": unknown header key '" + tok + "'");
    }
  }
  if (!have_ncols || !have_nrows || !have_xll || !have_yll || !have_cell)
    throw FormatError(path + ": incomplete raster header");
  if (g.ncols <= 0 || g.nrows <= 0)
    throw FormatError(path + ": raster dimensions must be positive");
  if (!(g.cellsize > 0.0))
    throw FormatError(path + ": cellsize must be positive");

  const std::size_t n = static_cast<std::size_t>(g.ncols) * g.nrows;
  g.values.reserve(n);
  // First numeric token was already consumed above.
  while (true) {
    try {
      std::size_t pos = 0;
      double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      g.values.push_back(v);
    } catch (const std::exception&) {
      throw FormatError(path + ": bad cell value '" + tok + "'");
    }
    if (g.values.size() == n) break;
    if (!(in >> tok)) break;
  }
  if (g.values.size() != n) {
    std::ostringstream msg;
    msg << path << ": expected " << n << " cell values, got "
        << g.values.size();
    throw FormatError(msg.str());
  }
  if (in >> tok) throw FormatError(path + ": trailing data after cell values");
  return g;
}

void write_esri_ascii(const std::string& path, const AsciiGrid& grid) {
  if (grid.ncols <= 0 || grid.nrows <= 0)
    throw DomainError("raster dimensions must be positive");
  if (grid.values.size() !=
      static_cast<std::size_t>(grid.ncols) * grid.nrows)
    throw DomainError("raster value count does not match dimensions");

  std::ofstream out(path);
  if (!out) throw FormatError("cannot write raster file: " + path);
  out << "ncols " << grid.ncols << '\n';
  out << "nrows " << grid.nrows << '\n';
  out << "xllcorner " << fmt_g17(grid.xllcorner) << '\n';
  out << "yllcorner " << fmt_g17(grid.yllcorner) << '\n';
  out << "cellsize " << fmt_g17(grid.cellsize) << '\n';
  out << "NODATA_value " << fmt_g17(grid.nodata) << '\n';
  for (int r = 0; r < grid.nrows; ++r) {
    for (int c = 0; c < grid.ncols; ++c) {
      if (c) out << ' ';
      out << fmt_g17(grid.values[grid.idx(c, r)]);
    }
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
}

} // namespace floodda
