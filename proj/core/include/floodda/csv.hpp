#pragma once

#include <string>
#include <vector>

namespace floodda {

/// In-memory CSV: one header row plus data rows, all fields as strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index for a header name, -1 if absent.
  int column(const std::string& name) const;
};

/// Read a comma-separated file. Blank lines are skipped, CRLF accepted.
/// Every data row must have the same field count as the header;
/// violations raise FormatError with the offending line number.
CsvTable read_csv(const std::string& path);

/// Write rows joined by commas. Caller formats the fields.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Parse a floating-point field, rejecting trailing garbage.
double parse_double(const std::string& field, const std::string& context);

/// Parse an integer field, rejecting trailing garbage.
long long parse_int(const std::string& field, const std::string& context);

} // namespace floodda
