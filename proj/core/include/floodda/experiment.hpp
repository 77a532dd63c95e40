#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "floodda/catchment.hpp"
#include "floodda/control.hpp"
#include "floodda/enkf.hpp"
#include "floodda/flood_extent.hpp"
#include "floodda/gauges.hpp"

namespace floodda {

/// Synthetic single-wave flood event: base flow, a smooth rise to
/// peak_factor times the base, and a smooth recession back. Sampled every
/// knot_dt into a piecewise-linear hydrograph.
struct EventSpec {
  double duration = 30.0 * 86400.0;
  double base_flow = 150.0;
  double peak_factor = 3.0;
  double rise_start = 8.0 * 86400.0;
  double peak = 12.0 * 86400.0;
  double recede_end = 18.0 * 86400.0;
  double knot_dt = 900.0;

  Hydrograph hydrograph() const;
  void validate() const;
};

/// How the synthetic reality of a twin experiment is produced.
struct TruthSpec {
  ControlVector controls;          ///< true friction and inflow corrections
  double obs_tau = 0.005;          ///< relative gauge noise
  std::vector<double> obs_bias;    ///< per station, added to observations
  double p_noise = 0.01;           ///< reference-map pixel flip probability
  double spinup = 8.0 * 3600.0;    ///< settle time before the event
  int resolution_factor = 1;       ///< >1 runs the truth on a finer grid

  void validate() const;
};

/// One run in the comparison matrix.
struct ExperimentSpec {
  std::string name = "DA";
  bool assimilate = true;
  bool bias_correction = true;
  int ne = 24;
  double tau = 0.15;
  double lambda = 0.3;
  bool friction_only = false;
  int threads = 0;

  void validate() const;
};

/// Where the model catchment comes from: the built-in synthetic valley or a
/// set of user files (grid and zone rasters, rating parameters, hydrograph
/// CSV, gauge list).
struct CatchmentSource {
  bool synthetic = true;
  SyntheticSpec spec;
  // file mode
  std::string grid_path;
  std::string zones_path;
  std::array<double, 4> ks{17.0, 45.0, 38.0, 40.0};
  RatingCurve rating = RatingCurve::power_law(424.0, 0.0, 5.0 / 3.0);
  std::string hydrograph_path;
  std::vector<GaugeStation> gauges;

  /// Build the catchment; the hydrograph CSV is resolved against base_dir
  /// and converted to seconds relative to epoch.
  Catchment build(const std::string& base_dir, std::int64_t epoch,
                  int resolution_factor = 1) const;
};

struct BatchConfig {
  std::int64_t epoch = 951868800; ///< 2000-03-01T00:00:00Z
  CatchmentSource catchment;
  PhysicsParams physics;
  EventSpec event;
  TruthSpec truth;
  double window_length = 43200.0;
  double shift = 21600.0;
  double cadence = 900.0;
  std::vector<double> overpass_times;
  std::vector<VirtualBox> boxes;
  double bias_window_t0 = 0.0;
  double bias_window_t1 = 43200.0;
  double flood_threshold = 0.05;
  int filter_size = 3;
  std::vector<ExperimentSpec> experiments;

  void validate() const;
};

/// Built-in three-day demonstration batch: one truth, two free runs and
/// five assimilation variants.
BatchConfig default_batch_config();

/// Parse a batch/run configuration file (JSON). Missing keys fall back to
/// the defaults above; unknown or malformed content raises ConfigError.
BatchConfig load_batch_config(const std::string& path);

/// Everything derived from the synthetic reality, shared by all
/// experiments of a batch.
struct TruthArtifacts {
  Catchment truth_catchment;
  Catchment model_catchment;
  HydraulicState restart_truth;
  HydraulicState restart_model;
  Hydrograph event_inflow;               ///< base event hydrograph
  std::vector<GaugeSeries> clean;        ///< noise-free truth levels
  std::vector<GaugeSeries> observed;     ///< with noise and bias
  std::vector<BinaryFloodRaster> reference_maps;
  RasterGeometry raster_geo;
  std::vector<double> overpass_times;
};

/// Spin up both grids, run the true event, and synthesize observations and
/// reference flood maps. All noise comes from substreams of seed.
TruthArtifacts generate_truth(const BatchConfig& config, std::uint64_t seed);

/// Corrupt clean gauge series: level + bias + N(0, max(tau |level|, 1 mm)).
std::vector<GaugeSeries> add_observation_noise(
    const std::vector<GaugeSeries>& clean, double tau,
    const std::vector<double>& bias, std::uint64_t seed);

struct StationMetrics {
  std::string station;
  double rmse_obs = 0.0;
  double max_obs = 0.0;
  double rmse_truth = 0.0;
  double max_truth = 0.0;
};

struct OverpassMetrics {
  double t = 0.0;
  ContingencyTable table;
  double csi_value = 0.0;
  std::vector<long long> box_counts; ///< follows BatchConfig::boxes
};

struct ExperimentReport {
  std::string name;
  std::vector<StationMetrics> stations;
  std::vector<OverpassMetrics> overpasses;
  std::vector<double> station_bias; ///< applied bias correction
  int members_failed = 0;
  std::string out_dir;
};

/// Run one experiment against prepared truth artifacts, writing its output
/// files under out_dir: level series, control evolution, flood rasters,
/// contingency and box-count tables, metrics and a machine-readable
/// report.json. Wall-clock timings go to timing.txt and nowhere else, so
/// repeated runs with one seed produce byte-identical results.
ExperimentReport run_experiment(const BatchConfig& config,
                                const TruthArtifacts& truth,
                                const ExperimentSpec& spec,
                                std::uint64_t seed,
                                const std::string& out_dir);

/// Write ranked comparison tables (one CSV per metric, best and second-best
/// marked per column) into out_dir.
void compare_experiments(const std::vector<ExperimentReport>& reports,
                         const std::string& out_dir);

struct BatchResult {
  std::vector<ExperimentReport> reports;
  std::string truth_dir;
};

/// Truth, every configured experiment, comparison tables. Everything below
/// out_dir; rerunning with the same seed reproduces every file except
/// timing.txt byte for byte.
BatchResult run_batch(const BatchConfig& config, std::uint64_t seed,
                      const std::string& out_dir);

/// Write the truth artifacts (rasters, restart files, gauge CSVs,
/// reference maps, box counts) under dir.
void write_truth_artifacts(const BatchConfig& config,
                           const TruthArtifacts& truth,
                           const std::string& dir);

/// Rebuild reports from the report.json files under out_dir's experiment
/// subdirectories and regenerate the comparison tables.
std::vector<ExperimentReport> reload_reports(const std::string& out_dir);

} // namespace floodda
