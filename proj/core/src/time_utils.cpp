#include "floodda/time_utils.hpp"

#include <cstdio>
#include <cstdlib>

#include "floodda/errors.hpp"

namespace floodda {

namespace {

// Days from 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(std::int64_t y, int m) {
  static const int n[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return n[m - 1];
}

} // namespace

std::int64_t parse_iso8601(const std::string& s) {
  // Expected: YYYY-MM-DDThh:mm:ss with optional 'Z' and optional ' ' for 'T'.
  long long y;
  int mo, d, h, mi, se;
  char sep, tail[8] = {0};
  int n = std::sscanf(s.c_str(), "%lld-%2d-%2d%c%2d:%2d:%2d%7s", &y, &mo, &d,
                      &sep, &h, &mi, &se, tail);
  if (n < 7 || (sep != 'T' && sep != ' '))
    throw FormatError("bad ISO-8601 timestamp: '" + s + "'");
  if (n == 8 && !(tail[0] == 'Z' && tail[1] == '\0'))
    throw FormatError("bad ISO-8601 timestamp suffix: '" + s + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h < 0 ||
      h > 23 || mi < 0 || mi > 59 || se < 0 || se > 59)
    throw FormatError("timestamp field out of range: '" + s + "'");
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  std::int64_t y;
  int mo, d;
  civil_from_days(days, y, mo, d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), mo, d,
                static_cast<long long>(sod / 3600),
                static_cast<long long>((sod / 60) % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

std::string fmt_g17(double v) {
  // Shortest of %.15g/%.16g/%.17g that parses back to the same bits.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

} // namespace floodda
