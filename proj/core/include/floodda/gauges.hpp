#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace floodda {

/// Water-level time series at one station. Timestamps are Unix seconds and
/// strictly increasing; comparisons between series match timestamps exactly.
struct GaugeSeries {
  std::string station;
  std::vector<std::int64_t> t;
  std::vector<double> level;

  void validate() const;
};

/// Read "timestamp,level" CSV with ISO-8601 timestamps. A "station" column
/// is optional; otherwise the station name is the file stem.
GaugeSeries load_gauge_csv(const std::string& path);

/// Write a series in the same format.
void save_gauge_csv(const std::string& path, const GaugeSeries& series);

struct BiasEstimate {
  double bias = 0.0;        ///< mean(model - observed) over the window
  int n = 0;                ///< matched timestamps used
  double obs_std = 0.0;     ///< spread of the observations in the window
  bool stationary = true;   ///< false when obs_std exceeds 0.05 m
  std::int64_t t0 = 0, t1 = 0;
};

/// Mean model-minus-observation offset over [t0, t1]. Only exactly matching
/// timestamps contribute; an empty overlap raises DomainError. A window
/// where the observed level moves more than 0.05 m (one standard deviation)
/// is flagged non-stationary but still returns the mean.
BiasEstimate diagnose_bias(const GaugeSeries& model, const GaugeSeries& obs,
                           std::int64_t t0, std::int64_t t1);

/// Root-mean-square difference over matching timestamps in [t0, t1].
/// Throws DomainError when no timestamps match.
double rmse(const GaugeSeries& a, const GaugeSeries& b, std::int64_t t0,
            std::int64_t t1);

/// Largest absolute difference over matching timestamps in [t0, t1].
double max_abs_error(const GaugeSeries& a, const GaugeSeries& b,
                     std::int64_t t0, std::int64_t t1);

} // namespace floodda
