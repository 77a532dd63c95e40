#pragma once

#include <cstdint>
#include <string>

namespace floodda {

/// Parse "YYYY-MM-DDThh:mm:ss" (optional trailing 'Z') to Unix seconds (UTC).
/// Throws FormatError on malformed input or out-of-range fields.
std::int64_t parse_iso8601(const std::string& s);

/// Format Unix seconds as "YYYY-MM-DDThh:mm:ssZ".
std::string format_iso8601(std::int64_t unix_seconds);

/// Shortest decimal representation that round-trips a double ("%.17g" style).
std::string fmt_g17(double v);

} // namespace floodda
