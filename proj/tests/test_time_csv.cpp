#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "floodda/csv.hpp"
#include "floodda/errors.hpp"
#include "floodda/time_utils.hpp"

using namespace floodda;
namespace fs = std::filesystem;

TEST_CASE("iso8601 parse and format round trip") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("2000-03-01T00:00:00Z") == 951868800);
  CHECK(parse_iso8601("2000-03-01 00:00:00") == 951868800);
  CHECK(format_iso8601(951868800) == "2000-03-01T00:00:00Z");
  CHECK(parse_iso8601(format_iso8601(-86400)) == -86400);

  // leap day exists in 2000, not in 1900
  CHECK_NOTHROW(parse_iso8601("2000-02-29T12:00:00Z"));
  CHECK_THROWS_AS(parse_iso8601("1900-02-29T12:00:00Z"), FormatError);
  CHECK_THROWS_AS(parse_iso8601("2000-13-01T00:00:00Z"), FormatError);
  CHECK_THROWS_AS(parse_iso8601("2000-03-01T24:00:00Z"), FormatError);
  CHECK_THROWS_AS(parse_iso8601("garbage"), FormatError);

  for (std::int64_t t : {0LL, 951868800LL, 1234567890LL, -1LL})
    CHECK(parse_iso8601(format_iso8601(t)) == t);
}

TEST_CASE("fmt_g17 round trips doubles exactly") {
  for (double v : {0.0, 1.0, 0.1, -1.0 / 3.0, 1e-300, 1.7976931348623157e308,
                   951868800.0, 0.30000000000000004}) {
    const std::string s = fmt_g17(v);
    CHECK(parse_double(s, "test") == v);
  }
}

TEST_CASE("csv io and errors") {
  const fs::path dir = fs::temp_directory_path() / "floodda_csv_test";
  fs::create_directories(dir);
  const std::string path = (dir / "t.csv").string();

  write_csv(path, {"a", "b"}, {{"1", "x"}, {"2", "y"}});
  CsvTable t = read_csv(path);
  CHECK(t.header.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.column("missing") == -1);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == "y");

  {
    std::ofstream out(path);
    out << "a,b\n1\n";
  }
  CHECK_THROWS_AS(read_csv(path), FormatError);

  CHECK(parse_double("2.5", "x") == 2.5);
  CHECK_THROWS_AS(parse_double("2.5x", "x"), FormatError);
  CHECK_THROWS_AS(parse_double("", "x"), FormatError);
  CHECK(parse_int("-12", "x") == -12);
  CHECK_THROWS_AS(parse_int("1.5", "x"), FormatError);

  fs::remove_all(dir);
}
