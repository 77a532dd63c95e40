#include "floodda/gauges.hpp"

#include <cmath>
#include <filesystem>

#include "floodda/csv.hpp"
#include "floodda/errors.hpp"
#include "floodda/time_utils.hpp"

namespace floodda {

void GaugeSeries::validate() const {
  if (t.size() != level.size())
    throw DomainError("gauge series time/level size mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(level[i]))
      throw DomainError("gauge series level must be finite");
    if (i > 0 && t[i] <= t[i - 1])
      throw DomainError("gauge series timestamps must be strictly increasing");
  }
}

GaugeSeries load_gauge_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  int tcol = table.column("timestamp");
  int lcol = table.column("level");
  if (tcol < 0 || lcol < 0)
    throw FormatError(path + ": need 'timestamp' and 'level' columns");
  int scol = table.column("station");

  GaugeSeries s;
  s.station = std::filesystem::path(path).stem().string();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string ctx = path + " row " + std::to_string(r + 2);
    std::int64_t ts;
    try {
      ts = parse_iso8601(row[tcol]);
    } catch (const FormatError& e) {
      throw FormatError(ctx + ": " + e.what());
    }
    s.t.push_back(ts);
    s.level.push_back(parse_double(row[lcol], ctx));
    if (scol >= 0 && r == 0) s.station = row[scol];
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return s;
}

void save_gauge_csv(const std::string& path, const GaugeSeries& series) {
  series.validate();
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.t.size());
  for (std::size_t i = 0; i < series.t.size(); ++i)
    rows.push_back({format_iso8601(series.t[i]), fmt_g17(series.level[i]),
                    series.station});
  write_csv(path, {"timestamp", "level", "station"}, rows);
}

namespace {

// Visit (model_value, obs_value) at every shared timestamp inside [t0, t1].
template <typename F>
int for_matching(const GaugeSeries& a, const GaugeSeries& b, std::int64_t t0,
                 std::int64_t t1, F&& f) {
  a.validate();
  b.validate();
  if (t1 < t0) throw DomainError("comparison window is empty");
  std::size_t i = 0, j = 0;
  int n = 0;
  while (i < a.t.size() && j < b.t.size()) {
    if (a.t[i] < b.t[j]) {
      ++i;
    } else if (b.t[j] < a.t[i]) {
      ++j;
    } else {
      if (a.t[i] >= t0 && a.t[i] <= t1) {
        f(a.level[i], b.level[j]);
        ++n;
      }
      ++i;
      ++j;
    }
  }
  return n;
}

} // namespace

BiasEstimate diagnose_bias(const GaugeSeries& model, const GaugeSeries& obs,
                           std::int64_t t0, std::int64_t t1) {
  BiasEstimate est;
  est.t0 = t0;
  est.t1 = t1;
  double sum = 0.0, obs_sum = 0.0, obs_sumsq = 0.0;
  est.n = for_matching(model, obs, t0, t1, [&](double m, double o) {
    sum += m - o;
    obs_sum += o;
    obs_sumsq += o * o;
  });
  if (est.n == 0)
    throw DomainError("diagnose_bias: no matching timestamps in window");
  est.bias = sum / est.n;
  double mean_o = obs_sum / est.n;
  double var = obs_sumsq / est.n - mean_o * mean_o;
  est.obs_std = var > 0.0 ? std::sqrt(var) : 0.0;
  est.stationary = est.obs_std <= 0.05;
  return est;
}

double rmse(const GaugeSeries& a, const GaugeSeries& b, std::int64_t t0,
            std::int64_t t1) {
  double sumsq = 0.0;
  int n = for_matching(a, b, t0, t1, [&](double x, double y) {
    double d = x - y;
    sumsq += d * d;
  });
  if (n == 0) throw DomainError("rmse: no matching timestamps in window");
  return std::sqrt(sumsq / n);
}

double max_abs_error(const GaugeSeries& a, const GaugeSeries& b,
                     std::int64_t t0, std::int64_t t1) {
  double worst = 0.0;
  int n = for_matching(a, b, t0, t1, [&](double x, double y) {
    worst = std::max(worst, std::abs(x - y));
  });
  if (n == 0)
    throw DomainError("max_abs_error: no matching timestamps in window");
  return worst;
}

} // namespace floodda
