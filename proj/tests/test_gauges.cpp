#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "floodda/errors.hpp"
#include "floodda/gauges.hpp"

using namespace floodda;
namespace fs = std::filesystem;

namespace {
GaugeSeries series(std::string name, std::vector<std::int64_t> t,
                   std::vector<double> level) {
  GaugeSeries s;
  s.station = std::move(name);
  s.t = std::move(t);
  s.level = std::move(level);
  s.validate();
  return s;
}
} // namespace

TEST_CASE("gauge series validation") {
  CHECK_NOTHROW(series("G", {0, 60, 120}, {1.0, 1.1, 1.2}));
  GaugeSeries bad;
  bad.station = "G";
  bad.t = {0, 0};
  bad.level = {1.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("gauge csv round trip") {
  GaugeSeries s =
      series("G7", {951868800, 951869700}, {2.25, -0.30000000000000004});
  const fs::path dir = fs::temp_directory_path() / "floodda_gauge_test";
  fs::create_directories(dir);
  const std::string path = (dir / "g7.csv").string();
  save_gauge_csv(path, s);
  GaugeSeries r = load_gauge_csv(path);
  CHECK(r.station == "G7");
  REQUIRE(r.t.size() == 2);
  CHECK(r.t[0] == s.t[0]);
  CHECK(r.level[0] == s.level[0]);
  CHECK(r.level[1] == s.level[1]);
  fs::remove_all(dir);
}

TEST_CASE("rmse and max error over matching timestamps") {
  GaugeSeries a = series("A", {0, 60, 120, 180}, {0.0, 1.0, 2.0, 9.0});
  GaugeSeries b = series("B", {0, 60, 120, 240}, {0.0, 0.0, 0.0, 0.0});
  // only 0, 60, 120 match inside [0, 200]
  CHECK(rmse(a, b, 0, 200) ==
        doctest::Approx(1.2909944487358056).epsilon(1e-14));
  CHECK(max_abs_error(a, b, 0, 200) == 2.0);
  // the window narrows the match set
  CHECK(rmse(a, b, 60, 120) == doctest::Approx(std::sqrt(2.5)));
  CHECK_THROWS_AS(rmse(a, b, 300, 400), DomainError);
}

TEST_CASE("bias diagnosis recovers a constant offset") {
  std::vector<std::int64_t> t;
  std::vector<double> model_lv, obs_lv;
  for (int k = 0; k <= 48; ++k) {
    t.push_back(900 * k);
    model_lv.push_back(3.0);
    obs_lv.push_back(3.0 - 0.72);
  }
  GaugeSeries model = series("G", t, model_lv);
  GaugeSeries obs = series("G", t, obs_lv);
  BiasEstimate est = diagnose_bias(model, obs, 0, 43200);
  CHECK(est.bias == doctest::Approx(0.72).epsilon(1e-12));
  CHECK(est.n == 49);
  CHECK(est.stationary);

  // drifting observations are flagged
  for (int k = 0; k <= 48; ++k) obs_lv[k] = 2.28 + 0.005 * k;
  GaugeSeries drifting = series("G", t, obs_lv);
  BiasEstimate est2 = diagnose_bias(model, drifting, 0, 43200);
  CHECK_FALSE(est2.stationary);

  CHECK_THROWS_AS(diagnose_bias(model, obs, 100000, 200000), DomainError);
}
