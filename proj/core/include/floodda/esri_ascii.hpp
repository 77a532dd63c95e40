#pragma once

#include <string>
#include <vector>

namespace floodda {

/// ESRI ASCII grid. Values are row-major, row 0 at the north edge.
struct AsciiGrid {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 0.0;
  double nodata = -9999.0;
  std::vector<double> values;

  std::size_t idx(int col, int row) const {
    return static_cast<std::size_t>(row) * ncols + col;
  }
};

/// Parse an ESRI ASCII grid. Header keys are case-insensitive; NODATA_value
/// defaults to -9999 when absent. Cell count mismatches, non-numeric data
/// and non-positive dimensions raise FormatError with the file position.
AsciiGrid read_esri_ascii(const std::string& path);

/// Write an ESRI ASCII grid. Values print with enough digits to round-trip
/// exactly; integer-valued cells print without a decimal point.
void write_esri_ascii(const std::string& path, const AsciiGrid& grid);

} // namespace floodda
