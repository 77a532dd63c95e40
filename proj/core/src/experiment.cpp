#include "floodda/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "floodda/csv.hpp"
#include "floodda/errors.hpp"
#include "floodda/esri_ascii.hpp"
#include "floodda/time_utils.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace floodda {

Hydrograph EventSpec::hydrograph() const {
  validate();
  const double peak_flow = base_flow * peak_factor;
  auto flow_at = [&](double t) {
    if (t <= rise_start || t >= recede_end) return base_flow;
    if (t <= peak) {
      const double w = (t - rise_start) / (peak - rise_start);
      return base_flow +
             (peak_flow - base_flow) * 0.5 * (1.0 - std::cos(M_PI * w));
    }
    const double w = (t - peak) / (recede_end - peak);
    return base_flow +
           (peak_flow - base_flow) * 0.5 * (1.0 + std::cos(M_PI * w));
  };
  std::vector<double> t, q;
  for (long long k = 0;; ++k) {
    double tk = k * knot_dt;
    if (tk > duration) tk = duration;
    t.push_back(tk);
    q.push_back(flow_at(tk));
    if (tk >= duration) break;
  }
  return Hydrograph(std::move(t), std::move(q));
}

void EventSpec::validate() const {
  if (!(duration > 0.0)) throw ConfigError("event duration must be positive");
  if (!(base_flow > 0.0)) throw ConfigError("base flow must be positive");
  if (!(peak_factor >= 1.0))
    throw ConfigError("peak factor must be at least 1");
  if (!(rise_start >= 0.0 && rise_start < peak && peak < recede_end &&
        recede_end <= duration))
    throw ConfigError("event phases must satisfy 0 <= rise < peak < recede "
                      "<= duration");
  if (!(knot_dt > 0.0)) throw ConfigError("event knot_dt must be positive");
}

void TruthSpec::validate() const {
  controls.validate();
  if (!(obs_tau >= 0.0)) throw ConfigError("truth obs_tau must be >= 0");
  for (double b : obs_bias)
    if (!std::isfinite(b)) throw ConfigError("obs_bias must be finite");
  if (!(p_noise >= 0.0 && p_noise <= 1.0))
    throw ConfigError("p_noise must lie in [0, 1]");
  if (!(spinup >= 0.0)) throw ConfigError("spinup must be >= 0");
  if (resolution_factor < 1)
    throw ConfigError("truth resolution factor must be >= 1");
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("experiment name must not be empty");
  for (char ch : name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
          ch == '-'))
      throw ConfigError("experiment name must be alphanumeric/_/-: " + name);
  if (assimilate && ne < 2)
    throw ConfigError("assimilation needs at least 2 members");
  if (!(tau >= 0.0)) throw ConfigError("tau must be >= 0");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("lambda must lie in [0, 1]");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

Catchment CatchmentSource::build(const std::string& base_dir,
                                 std::int64_t epoch,
                                 int resolution_factor) const {
  if (synthetic) {
    SyntheticSpec s = spec;
    s.resolution_factor = resolution_factor;
    return make_synthetic_catchment(s);
  }
  if (resolution_factor != 1)
    throw ConfigError("resolution refinement requires the synthetic "
                      "catchment");
  auto resolve = [&](const std::string& p) {
    if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base_dir) / p).string();
  };

  Catchment c;
  AsciiGrid grid = read_esri_ascii(resolve(grid_path));
  c.grid.nx = grid.ncols;
  c.grid.ny = grid.nrows;
  c.grid.dx = grid.cellsize;
  c.grid.dy = grid.cellsize;
  c.grid.x0 = grid.xllcorner;
  c.grid.y0 = grid.yllcorner;
  c.grid.zb = grid.values;
  for (double z : c.grid.zb)
    if (z == grid.nodata)
      throw ConfigError(grid_path + ": bed raster must not contain nodata");

  AsciiGrid zones = read_esri_ascii(resolve(zones_path));
  if (zones.ncols != grid.ncols || zones.nrows != grid.nrows)
    throw ConfigError(zones_path + ": zone raster shape differs from grid");
  c.zoning.zone.resize(zones.values.size());
  for (std::size_t i = 0; i < zones.values.size(); ++i) {
    const double v = zones.values[i];
    if (v != std::floor(v) || v < 0 || v > 3)
      throw ConfigError(zones_path + ": zone values must be integers 0..3");
    c.zoning.zone[i] = static_cast<int>(v);
  }
  c.ks_default = ks;

  for (int iy = 0; iy < c.grid.ny; ++iy)
    c.boundary.upstream.push_back({0, iy, Side::west});
  for (int iy = 0; iy < c.grid.ny; ++iy)
    if (c.zoning.zone[c.grid.idx(c.grid.nx - 1, iy)] > 0)
      c.boundary.downstream.push_back({c.grid.nx - 1, iy, Side::east});
  if (c.boundary.downstream.empty())
    throw ConfigError(zones_path +
                      ": no river zone cells on the east edge for the "
                      "rating boundary");
  c.boundary.rating = rating;

  if (hydrograph_path.empty())
    throw ConfigError("file catchment needs a hydrograph CSV");
  CsvTable table = read_csv(resolve(hydrograph_path));
  const int tcol = table.column("timestamp");
  const int qcol = table.column("discharge");
  if (tcol < 0 || qcol < 0)
    throw ConfigError(hydrograph_path +
                      ": need 'timestamp' and 'discharge' columns");
  std::vector<double> t, q;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string ctx = hydrograph_path + " row " + std::to_string(r + 2);
    t.push_back(static_cast<double>(parse_iso8601(table.rows[r][tcol]) -
                                    epoch));
    q.push_back(parse_double(table.rows[r][qcol], ctx));
  }
  c.boundary.inflow = Hydrograph(std::move(t), std::move(q));

  c.gauges = gauges;
  c.validate();
  return c;
}

void BatchConfig::validate() const {
  physics.validate();
  event.validate();
  truth.validate();
  if (catchment.synthetic) catchment.spec.validate();
  if (!(window_length > 0.0) || !(shift > 0.0) || shift > window_length)
    throw ConfigError("window/shift must satisfy 0 < shift <= window");
  if (!(cadence > 0.0)) throw ConfigError("cadence must be positive");
  for (std::size_t i = 0; i < overpass_times.size(); ++i) {
    if (overpass_times[i] < 0.0 || overpass_times[i] > event.duration)
      throw ConfigError("overpass times must lie inside the event");
    if (i > 0 && overpass_times[i] <= overpass_times[i - 1])
      throw ConfigError("overpass times must be strictly increasing");
  }
  std::set<std::string> box_ids;
  for (const auto& b : boxes) {
    if (b.id.empty()) throw ConfigError("virtual box id must not be empty");
    if (!box_ids.insert(b.id).second)
      throw ConfigError("duplicate virtual box id: " + b.id);
  }
  if (!(bias_window_t0 >= 0.0 && bias_window_t0 < bias_window_t1 &&
        bias_window_t1 <= event.duration))
    throw ConfigError("bias window must lie inside the event");
  if (!(flood_threshold >= 0.0))
    throw ConfigError("flood threshold must be >= 0");
  if (filter_size < 1 || filter_size % 2 == 0)
    throw ConfigError("filter size must be odd and >= 1");
  if (experiments.empty())
    throw ConfigError("at least one experiment must be configured");
  std::set<std::string> names;
  for (const auto& e : experiments) {
    e.validate();
    if (!names.insert(e.name).second)
      throw ConfigError("duplicate experiment name: " + e.name);
  }
}

BatchConfig default_batch_config() {
  BatchConfig c;
  c.event.duration = 72.0 * 3600.0;
  c.event.base_flow = 150.0;
  c.event.peak_factor = 3.0;
  c.event.rise_start = 18.0 * 3600.0;
  c.event.peak = 36.0 * 3600.0;
  c.event.recede_end = 60.0 * 3600.0;

  c.truth.controls.ks0 = 15.3;
  c.truth.controls.ks1 = 40.5;
  c.truth.controls.ks2 = 41.8;
  c.truth.controls.ks3 = 36.0;
  c.truth.controls.a = 1.1;
  c.truth.controls.b = 50.0;
  c.truth.controls.c = 900.0;
  c.truth.obs_tau = 0.02;
  c.truth.obs_bias = {0.30, -0.20, 0.15};
  c.truth.p_noise = 0.01;
  c.truth.spinup = 8.0 * 3600.0;

  c.overpass_times = {6.0 * 3600.0, 36.0 * 3600.0, 54.0 * 3600.0};
  c.boxes = {{"B1", 3, 2, 9, 4}, {"B2", 13, 7, 19, 9}, {"B3", 23, 2, 29, 4}};
  c.bias_window_t0 = 0.0;
  c.bias_window_t1 = 12.0 * 3600.0;

  auto exp = [](std::string name, bool assim, bool corr) {
    ExperimentSpec e;
    e.name = std::move(name);
    e.assimilate = assim;
    e.bias_correction = corr;
    return e;
  };
  ExperimentSpec fr1 = exp("FR1", false, false);
  ExperimentSpec fr2 = exp("FR2", false, true);
  ExperimentSpec da1 = exp("DA1", true, false);
  ExperimentSpec da2 = exp("DA2", true, true);
  ExperimentSpec da3 = exp("DA3", true, true);
  da3.tau = 0.01;
  ExperimentSpec da4 = exp("DA4", true, true);
  da4.tau = 0.99;
  ExperimentSpec da5 = exp("DA5", true, true);
  da5.friction_only = true;
  c.experiments = {fr1, fr2, da1, da2, da3, da4, da5};
  return c;
}

namespace {

ControlVector parse_controls(const json& j, const ControlVector& defaults) {
  ControlVector x = defaults;
  const auto& names = ControlVector::names();
  for (int i = 0; i < ControlVector::size; ++i)
    if (j.contains(names[i])) x[i] = j.at(names[i]).get<double>();
  return x;
}

VirtualBox parse_box(const json& j) {
  VirtualBox b;
  b.id = j.at("id").get<std::string>();
  b.col0 = j.at("col0").get<int>();
  b.row0 = j.at("row0").get<int>();
  b.col1 = j.at("col1").get<int>();
  b.row1 = j.at("row1").get<int>();
  return b;
}

ExperimentSpec parse_experiment(const json& j, const ExperimentSpec& base) {
  ExperimentSpec e = base;
  e.name = j.value("name", e.name);
  e.assimilate = j.value("assimilate", e.assimilate);
  e.bias_correction = j.value("bias_correction", e.bias_correction);
  e.ne = j.value("members", e.ne);
  e.tau = j.value("tau", e.tau);
  e.lambda = j.value("lambda", e.lambda);
  e.friction_only = j.value("friction_only", e.friction_only);
  e.threads = j.value("threads", e.threads);
  return e;
}

} // namespace

BatchConfig load_batch_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  BatchConfig c = default_batch_config();
  const std::string base_dir = fs::path(path).parent_path().string();
  try {
    if (j.contains("epoch"))
      c.epoch = parse_iso8601(j.at("epoch").get<std::string>());

    if (j.contains("catchment")) {
      const json& jc = j.at("catchment");
      if (jc.contains("files")) {
        const json& jf = jc.at("files");
        c.catchment.synthetic = false;
        auto resolve = [&](const std::string& p) {
          if (p.empty() || fs::path(p).is_absolute()) return p;
          return (fs::path(base_dir) / p).string();
        };
        c.catchment.grid_path = resolve(jf.at("grid").get<std::string>());
        c.catchment.zones_path = resolve(jf.at("zones").get<std::string>());
        c.catchment.hydrograph_path =
            resolve(jf.at("hydrograph").get<std::string>());
        if (jf.contains("ks")) {
          auto ks = jf.at("ks").get<std::vector<double>>();
          if (ks.size() != 4)
            throw ConfigError("catchment ks needs exactly 4 values");
          std::copy(ks.begin(), ks.end(), c.catchment.ks.begin());
        }
        if (jf.contains("rating")) {
          const json& jr = jf.at("rating");
          const std::string type = jr.value("type", "power_law");
          if (type == "power_law") {
            c.catchment.rating = RatingCurve::power_law(
                jr.at("alpha").get<double>(), jr.value("h0", 0.0),
                jr.value("beta", 5.0 / 3.0));
          } else if (type == "table") {
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : jr.at("points"))
              pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            c.catchment.rating = RatingCurve::table(std::move(pts));
          } else {
            throw ConfigError("unknown rating type: " + type);
          }
        }
        c.catchment.gauges.clear();
        for (const auto& jg : jf.at("gauges")) {
          GaugeStation g;
          g.name = jg.at("name").get<std::string>();
          g.ix = jg.at("ix").get<int>();
          g.iy = jg.at("iy").get<int>();
          g.datum = jg.value("datum", 0.0);
          c.catchment.gauges.push_back(g);
        }
      } else {
        SyntheticSpec& s = c.catchment.spec;
        s.nx = jc.value("nx", s.nx);
        s.ny = jc.value("ny", s.ny);
        s.dx = jc.value("dx", s.dx);
        s.channel_row0 = jc.value("channel_row0", s.channel_row0);
        s.channel_rows = jc.value("channel_rows", s.channel_rows);
        s.z_downstream = jc.value("z_downstream", s.z_downstream);
        s.slope = jc.value("slope", s.slope);
        s.bank_height = jc.value("bank_height", s.bank_height);
        s.cross_step = jc.value("cross_step", s.cross_step);
        s.rough_amp = jc.value("rough_amp", s.rough_amp);
        s.micro_seed = jc.value("micro_seed", s.micro_seed);
        s.base_flow = jc.value("base_flow", s.base_flow);
        s.stage_offset = jc.value("stage_offset", s.stage_offset);
        if (jc.contains("ks")) {
          auto ks = jc.at("ks").get<std::vector<double>>();
          if (ks.size() != 4)
            throw ConfigError("catchment ks needs exactly 4 values");
          std::copy(ks.begin(), ks.end(), s.ks.begin());
        }
      }
    }

    if (j.contains("physics")) {
      const json& jp = j.at("physics");
      c.physics.g = jp.value("g", c.physics.g);
      c.physics.nu_e = jp.value("nu_e", c.physics.nu_e);
      c.physics.h_dry = jp.value("h_dry", c.physics.h_dry);
      c.physics.cfl = jp.value("cfl", c.physics.cfl);
    }

    if (j.contains("event")) {
      const json& je = j.at("event");
      c.event.duration = je.value("duration", c.event.duration);
      c.event.base_flow = je.value("base_flow", c.event.base_flow);
      c.event.peak_factor = je.value("peak_factor", c.event.peak_factor);
      c.event.rise_start = je.value("rise_start", c.event.rise_start);
      c.event.peak = je.value("peak", c.event.peak);
      c.event.recede_end = je.value("recede_end", c.event.recede_end);
      c.event.knot_dt = je.value("knot_dt", c.event.knot_dt);
    }

    if (j.contains("truth")) {
      const json& jt = j.at("truth");
      if (jt.contains("controls"))
        c.truth.controls =
            parse_controls(jt.at("controls"), c.truth.controls);
      c.truth.obs_tau = jt.value("obs_tau", c.truth.obs_tau);
      if (jt.contains("obs_bias"))
        c.truth.obs_bias = jt.at("obs_bias").get<std::vector<double>>();
      c.truth.p_noise = jt.value("p_noise", c.truth.p_noise);
      c.truth.spinup = jt.value("spinup", c.truth.spinup);
      c.truth.resolution_factor =
          jt.value("resolution_factor", c.truth.resolution_factor);
    }

    if (j.contains("assimilation")) {
      const json& ja = j.at("assimilation");
      c.window_length = ja.value("window_length", c.window_length);
      c.shift = ja.value("shift", c.shift);
      c.cadence = ja.value("cadence", c.cadence);
    }

    if (j.contains("validation")) {
      const json& jv = j.at("validation");
      if (jv.contains("overpass_times"))
        c.overpass_times =
            jv.at("overpass_times").get<std::vector<double>>();
      c.flood_threshold = jv.value("threshold", c.flood_threshold);
      c.filter_size = jv.value("filter_size", c.filter_size);
      if (jv.contains("boxes")) {
        c.boxes.clear();
        for (const auto& jb : jv.at("boxes")) c.boxes.push_back(parse_box(jb));
      }
    }

    if (j.contains("bias_window")) {
      const auto& jw = j.at("bias_window");
      c.bias_window_t0 = jw.at(0).get<double>();
      c.bias_window_t1 = jw.at(1).get<double>();
    }

    if (j.contains("experiments")) {
      c.experiments.clear();
      for (const auto& je : j.at("experiments"))
        c.experiments.push_back(parse_experiment(je, ExperimentSpec{}));
    } else if (j.contains("experiment")) {
      c.experiments = {parse_experiment(j.at("experiment"), ExperimentSpec{})};
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  c.validate();
  return c;
}

namespace {

std::vector<double> cadence_ticks(double t_end, double cadence) {
  std::vector<double> ticks;
  for (long long k = 0;; ++k) {
    const double t = k * cadence;
    if (t > t_end + 1e-9) break;
    ticks.push_back(t);
  }
  return ticks;
}

std::vector<GaugeSeries> levels_to_series(
    const std::vector<double>& times,
    const std::vector<std::vector<double>>& levels,
    const std::vector<GaugeStation>& gauges, std::int64_t epoch) {
  std::vector<GaugeSeries> out(gauges.size());
  for (std::size_t s = 0; s < gauges.size(); ++s) {
    out[s].station = gauges[s].name;
    out[s].t.reserve(times.size());
    out[s].level.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      out[s].t.push_back(epoch +
                         static_cast<std::int64_t>(std::llround(times[i])));
      out[s].level.push_back(levels[i][s]);
    }
  }
  return out;
}

ControlVector nominal_controls(const ControlPrior& prior) {
  return ControlVector::from_array(prior.mean);
}

// Fill the domain from dry under constant base inflow, then restamp to t=0.
HydraulicState spin_up(const Catchment& catchment,
                       const PhysicsParams& physics,
                       const ControlVector& controls, double base_flow,
                       double spinup_seconds) {
  Catchment c = catchment;
  c.boundary.inflow = Hydrograph({0.0}, {base_flow});
  HydraulicState state = HydraulicState::zero(c.grid);
  if (spinup_seconds > 0.0) {
    MemberRun run = propagate_member(c, physics, controls, std::move(state),
                                     spinup_seconds, {});
    state = std::move(run.final_state);
  }
  state.t = 0.0;
  return state;
}

} // namespace

TruthArtifacts generate_truth(const BatchConfig& config, std::uint64_t seed) {
  config.validate();

  TruthArtifacts truth;
  truth.truth_catchment =
      config.catchment.build("", config.epoch, config.truth.resolution_factor);
  truth.model_catchment = config.catchment.build("", config.epoch, 1);
  truth.event_inflow = config.event.hydrograph();
  truth.overpass_times = config.overpass_times;
  truth.raster_geo = {truth.model_catchment.grid.nx,
                      truth.model_catchment.grid.ny,
                      truth.model_catchment.grid.x0,
                      truth.model_catchment.grid.y0,
                      truth.model_catchment.grid.dx};

  const ControlPrior prior;
  truth.restart_truth =
      spin_up(truth.truth_catchment, config.physics, config.truth.controls,
              config.event.base_flow, config.truth.spinup);
  truth.restart_model =
      spin_up(truth.model_catchment, config.physics, nominal_controls(prior),
              config.event.base_flow, config.truth.spinup);

  // True event run, sampled at the gauge cadence plus the overpass times.
  Catchment event_catchment = truth.truth_catchment;
  event_catchment.boundary.inflow = truth.event_inflow;
  swe::WindowSampling sampling;
  sampling.gauges = truth.truth_catchment.gauges;
  sampling.gauge_times = cadence_ticks(config.event.duration, config.cadence);
  sampling.snapshot_times = config.overpass_times;
  MemberRun run =
      propagate_member(event_catchment, config.physics, config.truth.controls,
                       truth.restart_truth, config.event.duration, sampling);

  truth.clean = levels_to_series(sampling.gauge_times, run.window.levels,
                                 truth.truth_catchment.gauges, config.epoch);
  std::vector<double> bias = config.truth.obs_bias;
  if (bias.empty()) bias.assign(truth.clean.size(), 0.0);
  truth.observed =
      add_observation_noise(truth.clean, config.truth.obs_tau, bias, seed);

  Rng ref_rng(seed, "refnoise");
  truth.reference_maps = make_reference_maps(
      run.window.snapshots, truth.truth_catchment.grid, truth.raster_geo,
      config.flood_threshold, config.truth.p_noise, config.filter_size,
      ref_rng);
  return truth;
}

std::vector<GaugeSeries> add_observation_noise(
    const std::vector<GaugeSeries>& clean, double tau,
    const std::vector<double>& bias, std::uint64_t seed) {
  if (!bias.empty() && bias.size() != clean.size())
    throw DomainError("add_observation_noise: bias length mismatch");
  std::vector<GaugeSeries> out = clean;
  for (std::size_t s = 0; s < out.size(); ++s) {
    Rng rng(seed, "obsnoise", s);
    const double b = bias.empty() ? 0.0 : bias[s];
    for (double& level : out[s].level) {
      const double sigma = std::max(tau * std::abs(level), 0.001);
      level += b + rng.normal(0.0, sigma);
    }
  }
  return out;
}

namespace {

std::string raster_name(double t) {
  std::ostringstream name;
  name << "flood_t" << static_cast<long long>(std::llround(t)) << "s.asc";
  return name.str();
}

void write_series_files(const std::vector<GaugeSeries>& series,
                        const std::string& dir, const std::string& prefix) {
  for (const auto& s : series)
    save_gauge_csv((fs::path(dir) / (prefix + s.station + ".csv")).string(),
                   s);
}

void write_controls_csv(const std::vector<EnsembleRecord>& records,
                        const std::string& path) {
  const auto& names = ControlVector::names();
  std::vector<std::string> header = {"cycle", "t_start", "t_end", "n_obs",
                                     "n_alive"};
  for (const auto& n : names) {
    header.push_back(n + "_forecast_mean");
    header.push_back(n + "_forecast_std");
    header.push_back(n + "_analysis_mean");
    header.push_back(n + "_analysis_std");
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& rec : records) {
    std::vector<int> alive_idx;
    for (std::size_t i = 0; i < rec.alive.size(); ++i)
      if (rec.alive[i]) alive_idx.push_back(static_cast<int>(i));
    std::vector<std::string> row = {
        std::to_string(rec.cycle), fmt_g17(rec.t_start), fmt_g17(rec.t_end),
        std::to_string(rec.n_obs), std::to_string(alive_idx.size())};
    auto stats = [&](const std::vector<ControlVector>& xs, int c,
                     double& mean, double& sd) {
      mean = 0.0;
      for (int i : alive_idx) mean += xs[i][c];
      mean /= static_cast<double>(alive_idx.size());
      double var = 0.0;
      for (int i : alive_idx) {
        const double d = xs[i][c] - mean;
        var += d * d;
      }
      sd = std::sqrt(var / static_cast<double>(alive_idx.size()));
    };
    for (int c = 0; c < ControlVector::size; ++c) {
      double mf, sf, ma, sa;
      stats(rec.forecast, c, mf, sf);
      stats(rec.analysis, c, ma, sa);
      row.push_back(fmt_g17(mf));
      row.push_back(fmt_g17(sf));
      row.push_back(fmt_g17(ma));
      row.push_back(fmt_g17(sa));
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

} // namespace

ExperimentReport run_experiment(const BatchConfig& config,
                                const TruthArtifacts& truth,
                                const ExperimentSpec& spec,
                                std::uint64_t seed,
                                const std::string& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);
  const auto wall0 = std::chrono::steady_clock::now();

  const Catchment& model = truth.model_catchment;
  const std::size_t n_stations = model.gauges.size();
  const double duration = config.event.duration;
  const ControlPrior prior;
  const ControlVector nominal = nominal_controls(prior);

  Catchment event_model = model;
  event_model.boundary.inflow = truth.event_inflow;

  ExperimentReport report;
  report.name = spec.name;
  report.out_dir = out_dir;
  report.station_bias.assign(n_stations, 0.0);
  std::vector<bool> bias_stationary(n_stations, true);

  // Bias diagnosis against a nominal free run over the stationary window.
  if (spec.bias_correction) {
    swe::WindowSampling bs;
    bs.gauges = model.gauges;
    for (long long k = 0;; ++k) {
      const double t = config.bias_window_t0 + k * config.cadence;
      if (t > config.bias_window_t1 + 1e-9) break;
      bs.gauge_times.push_back(t);
    }
    MemberRun fr = propagate_member(event_model, config.physics, nominal,
                                    truth.restart_model,
                                    config.bias_window_t1, bs);
    std::vector<GaugeSeries> fr_series = levels_to_series(
        bs.gauge_times, fr.window.levels, model.gauges, config.epoch);
    for (std::size_t s = 0; s < n_stations; ++s) {
      BiasEstimate est = diagnose_bias(
          fr_series[s], truth.observed[s],
          config.epoch + static_cast<std::int64_t>(config.bias_window_t0),
          config.epoch + static_cast<std::int64_t>(config.bias_window_t1));
      report.station_bias[s] = est.bias;
      bias_stationary[s] = est.stationary;
    }
  }

  std::vector<GaugeSeries> produced;
  std::vector<MeanField> fields;
  int members_failed = 0;
  std::vector<EnsembleRecord> records;

  if (!spec.assimilate) {
    swe::WindowSampling fs_samp;
    fs_samp.gauges = model.gauges;
    fs_samp.gauge_times = cadence_ticks(duration, config.cadence);
    fs_samp.snapshot_times = truth.overpass_times;
    MemberRun fr =
        propagate_member(event_model, config.physics, nominal,
                         truth.restart_model, duration, fs_samp);
    produced = levels_to_series(fs_samp.gauge_times, fr.window.levels,
                                model.gauges, config.epoch);
    if (spec.bias_correction)
      for (std::size_t s = 0; s < n_stations; ++s)
        for (double& v : produced[s].level) v -= report.station_bias[s];
    for (std::size_t k = 0; k < fr.window.snapshots.size(); ++k)
      fields.push_back(
          {truth.overpass_times[k], fr.window.snapshots[k].h});
  } else {
    EnkfConfig ec;
    ec.ne = spec.ne;
    ec.tau = spec.tau;
    ec.lambda = spec.lambda;
    ec.friction_only = spec.friction_only;
    ec.threads = spec.threads;
    ec.station_bias = report.station_bias;
    CyclePlan plan =
        CyclePlan::cover(0.0, duration, config.window_length, config.shift);
    AssimOptions options;
    options.epoch = config.epoch;
    options.cadence = config.cadence;
    options.snapshot_times = truth.overpass_times;
    AssimilationResult ar =
        run_assimilation(event_model, config.physics, truth.observed, plan,
                         ec, seed, truth.restart_model, options);
    produced = std::move(ar.analyzed);
    fields = std::move(ar.snapshots);
    members_failed = ar.members_failed;
    records = std::move(ar.records);
  }
  report.members_failed = members_failed;

  // Station metrics over the whole event, against both the observations and
  // the noise-free truth.
  const std::int64_t w0 = config.epoch;
  const std::int64_t w1 =
      config.epoch + static_cast<std::int64_t>(std::llround(duration));
  for (std::size_t s = 0; s < n_stations; ++s) {
    StationMetrics m;
    m.station = model.gauges[s].name;
    m.rmse_obs = rmse(produced[s], truth.observed[s], w0, w1);
    m.max_obs = max_abs_error(produced[s], truth.observed[s], w0, w1);
    m.rmse_truth = rmse(produced[s], truth.clean[s], w0, w1);
    m.max_truth = max_abs_error(produced[s], truth.clean[s], w0, w1);
    report.stations.push_back(m);
  }

  // Flood extent validation at each overpass.
  for (std::size_t k = 0; k < fields.size(); ++k) {
    HydraulicState snap = HydraulicState::zero(model.grid);
    snap.t = fields[k].t;
    snap.h = fields[k].h;
    BinaryFloodRaster raster = rasterize_flood(
        snap, model.grid, truth.raster_geo, config.flood_threshold);
    write_flood_raster(
        (fs::path(out_dir) / raster_name(fields[k].t)).string(), raster);
    OverpassMetrics om;
    om.t = fields[k].t;
    om.table = contingency(raster, truth.reference_maps[k]);
    om.csi_value = csi(om.table);
    for (const auto& box : config.boxes)
      om.box_counts.push_back(wet_pixel_count(raster, box));
    report.overpasses.push_back(std::move(om));
  }

  // Output files.
  write_series_files(produced, out_dir, "levels_");
  if (!records.empty())
    write_controls_csv(records,
                       (fs::path(out_dir) / "controls.csv").string());
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : report.stations)
      rows.push_back({m.station, fmt_g17(m.rmse_obs), fmt_g17(m.max_obs),
                      fmt_g17(m.rmse_truth), fmt_g17(m.max_truth)});
    write_csv((fs::path(out_dir) / "metrics.csv").string(),
              {"station", "rmse_obs", "max_abs_obs", "rmse_truth",
               "max_abs_truth"},
              rows);
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& om : report.overpasses)
      rows.push_back({fmt_g17(om.t), std::to_string(om.table.tp),
                      std::to_string(om.table.fp), std::to_string(om.table.fn),
                      std::to_string(om.table.tn), fmt_g17(om.csi_value)});
    write_csv((fs::path(out_dir) / "contingency.csv").string(),
              {"time", "tp", "fp", "fn", "tn", "csi"}, rows);
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& om : report.overpasses)
      for (std::size_t b = 0; b < config.boxes.size(); ++b)
        rows.push_back({fmt_g17(om.t), config.boxes[b].id,
                        std::to_string(om.box_counts[b])});
    write_csv((fs::path(out_dir) / "box_counts.csv").string(),
              {"time", "box", "wet_pixels"}, rows);
  }
  {
    json jr;
    jr["name"] = report.name;
    jr["members_failed"] = report.members_failed;
    jr["station_bias"] = report.station_bias;
    jr["bias_stationary"] = bias_stationary;
    jr["assimilate"] = spec.assimilate;
    jr["bias_correction"] = spec.bias_correction;
    jr["tau"] = spec.tau;
    jr["members"] = spec.ne;
    jr["friction_only"] = spec.friction_only;
    json stations = json::array();
    for (const auto& m : report.stations)
      stations.push_back({{"station", m.station},
                          {"rmse_obs", m.rmse_obs},
                          {"max_abs_obs", m.max_obs},
                          {"rmse_truth", m.rmse_truth},
                          {"max_abs_truth", m.max_truth}});
    jr["stations"] = stations;
    json overpasses = json::array();
    for (const auto& om : report.overpasses) {
      json jo = {{"time", om.t},
                 {"tp", om.table.tp},
                 {"fp", om.table.fp},
                 {"fn", om.table.fn},
                 {"tn", om.table.tn},
                 {"csi", om.csi_value}};
      json boxes = json::array();
      for (std::size_t b = 0; b < config.boxes.size(); ++b)
        boxes.push_back({{"id", config.boxes[b].id},
                         {"wet_pixels", om.box_counts[b]}});
      jo["boxes"] = boxes;
      overpasses.push_back(jo);
    }
    jr["overpasses"] = overpasses;
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << jr.dump(2) << '\n';
    if (!out)
      throw FormatError("cannot write report.json under " + out_dir);
  }
  {
    std::ofstream out(fs::path(out_dir) / "timing.txt");
    out << "wall_seconds "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         wall0)
               .count()
        << '\n';
  }
  return report;
}

void compare_experiments(const std::vector<ExperimentReport>& reports,
                         const std::string& out_dir) {
  if (reports.empty())
    throw DomainError("compare_experiments: no reports given");
  fs::create_directories(out_dir);

  // Rank marks per column: 1 = best, 2 = second best.
  auto rank_marks = [](const std::vector<double>& values, bool lower_better) {
    std::vector<std::string> marks(values.size());
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (values[a] != values[b])
        return lower_better ? values[a] < values[b] : values[a] > values[b];
      return a < b;
    });
    if (!order.empty()) marks[order[0]] = "best";
    if (order.size() > 1) marks[order[1]] = "second";
    return marks;
  };

  auto emit = [&](const std::string& file,
                  const std::vector<std::string>& columns,
                  const std::vector<std::vector<double>>& values,
                  bool lower_better) {
    std::vector<std::string> header = {"experiment"};
    for (const auto& c : columns) {
      header.push_back(c);
      header.push_back(c + "_rank");
    }
    std::vector<std::vector<std::string>> rows(reports.size());
    for (std::size_t r = 0; r < reports.size(); ++r)
      rows[r].push_back(reports[r].name);
    for (std::size_t col = 0; col < columns.size(); ++col) {
      std::vector<double> column(reports.size());
      for (std::size_t r = 0; r < reports.size(); ++r)
        column[r] = values[r][col];
      auto marks = rank_marks(column, lower_better);
      for (std::size_t r = 0; r < reports.size(); ++r) {
        rows[r].push_back(fmt_g17(column[r]));
        rows[r].push_back(marks[r]);
      }
    }
    write_csv((fs::path(out_dir) / file).string(), header, rows);
  };

  const std::size_t n_st = reports.front().stations.size();
  std::vector<std::string> station_cols;
  for (std::size_t s = 0; s < n_st; ++s)
    station_cols.push_back(reports.front().stations[s].station);
  for (const auto& r : reports)
    if (r.stations.size() != n_st)
      throw DomainError("compare_experiments: station lists differ");

  auto station_values = [&](auto getter) {
    std::vector<std::vector<double>> v(reports.size());
    for (std::size_t r = 0; r < reports.size(); ++r)
      for (std::size_t s = 0; s < n_st; ++s)
        v[r].push_back(getter(reports[r].stations[s]));
    return v;
  };
  emit("summary_rmse_obs.csv", station_cols,
       station_values([](const StationMetrics& m) { return m.rmse_obs; }),
       true);
  emit("summary_rmse_truth.csv", station_cols,
       station_values([](const StationMetrics& m) { return m.rmse_truth; }),
       true);
  emit("summary_max_abs_truth.csv", station_cols,
       station_values([](const StationMetrics& m) { return m.max_truth; }),
       true);

  const std::size_t n_op = reports.front().overpasses.size();
  bool uniform = true;
  for (const auto& r : reports)
    if (r.overpasses.size() != n_op) uniform = false;
  if (uniform && n_op > 0) {
    std::vector<std::string> op_cols;
    for (std::size_t k = 0; k < n_op; ++k) {
      std::ostringstream name;
      name << "t" << static_cast<long long>(
                         std::llround(reports.front().overpasses[k].t))
           << "s";
      op_cols.push_back(name.str());
    }
    std::vector<std::vector<double>> v(reports.size());
    for (std::size_t r = 0; r < reports.size(); ++r)
      for (std::size_t k = 0; k < n_op; ++k)
        v[r].push_back(reports[r].overpasses[k].csi_value);
    emit("summary_csi.csv", op_cols, v, false);
  }
}

void write_truth_artifacts(const BatchConfig& config,
                           const TruthArtifacts& truth,
                           const std::string& dir) {
  fs::create_directories(dir);
  const GridSpec& mg = truth.model_catchment.grid;

  auto grid_to_ascii = [](const GridSpec& g, const std::vector<double>& v) {
    AsciiGrid a;
    a.ncols = g.nx;
    a.nrows = g.ny;
    a.xllcorner = g.x0;
    a.yllcorner = g.y0;
    a.cellsize = g.dx;
    a.nodata = -9999.0;
    a.values = v;
    return a;
  };
  write_esri_ascii((fs::path(dir) / "grid.asc").string(),
                   grid_to_ascii(mg, mg.zb));
  {
    std::vector<double> zones(truth.model_catchment.zoning.zone.begin(),
                              truth.model_catchment.zoning.zone.end());
    write_esri_ascii((fs::path(dir) / "zones.asc").string(),
                     grid_to_ascii(mg, zones));
  }
  if (config.truth.resolution_factor > 1) {
    const GridSpec& tg = truth.truth_catchment.grid;
    write_esri_ascii((fs::path(dir) / "truth_grid.asc").string(),
                     grid_to_ascii(tg, tg.zb));
  }

  save_restart((fs::path(dir) / "restart_model.txt").string(),
               truth.restart_model, mg);
  save_restart((fs::path(dir) / "restart_truth.txt").string(),
               truth.restart_truth, truth.truth_catchment.grid);

  auto dump_hydrograph = [&](const Hydrograph& h, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < h.times().size(); ++i)
      rows.push_back(
          {format_iso8601(config.epoch +
                          static_cast<std::int64_t>(
                              std::llround(h.times()[i]))),
           fmt_g17(h.flows()[i])});
    write_csv(path, {"timestamp", "discharge"}, rows);
  };
  dump_hydrograph(truth.event_inflow,
                  (fs::path(dir) / "inflow_event.csv").string());
  dump_hydrograph(
      perturb_hydrograph(truth.event_inflow, config.truth.controls.a,
                         config.truth.controls.b, config.truth.controls.c),
      (fs::path(dir) / "inflow_truth.csv").string());

  write_series_files(truth.clean, dir, "truth_");
  write_series_files(truth.observed, dir, "obs_");

  std::vector<std::vector<std::string>> box_rows;
  for (std::size_t k = 0; k < truth.reference_maps.size(); ++k) {
    std::ostringstream name;
    name << "reference_t"
         << static_cast<long long>(std::llround(truth.overpass_times[k]))
         << "s.asc";
    write_flood_raster((fs::path(dir) / name.str()).string(),
                       truth.reference_maps[k]);
    for (const auto& box : config.boxes)
      box_rows.push_back(
          {fmt_g17(truth.overpass_times[k]), box.id,
           std::to_string(wet_pixel_count(truth.reference_maps[k], box))});
  }
  write_csv((fs::path(dir) / "reference_box_counts.csv").string(),
            {"time", "box", "wet_pixels"}, box_rows);
}

std::vector<ExperimentReport> reload_reports(const std::string& out_dir) {
  std::vector<ExperimentReport> reports;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(out_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "report.json"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    std::ifstream in(dir / "report.json");
    json j;
    try {
      in >> j;
      ExperimentReport r;
      r.name = j.at("name").get<std::string>();
      r.out_dir = dir.string();
      r.members_failed = j.value("members_failed", 0);
      r.station_bias =
          j.value("station_bias", std::vector<double>{});
      for (const auto& js : j.at("stations")) {
        StationMetrics m;
        m.station = js.at("station").get<std::string>();
        m.rmse_obs = js.at("rmse_obs").get<double>();
        m.max_obs = js.at("max_abs_obs").get<double>();
        m.rmse_truth = js.at("rmse_truth").get<double>();
        m.max_truth = js.at("max_abs_truth").get<double>();
        r.stations.push_back(m);
      }
      for (const auto& jo : j.value("overpasses", json::array())) {
        OverpassMetrics om;
        om.t = jo.at("time").get<double>();
        om.table.tp = jo.at("tp").get<long long>();
        om.table.fp = jo.at("fp").get<long long>();
        om.table.fn = jo.at("fn").get<long long>();
        om.table.tn = jo.at("tn").get<long long>();
        om.csi_value = jo.at("csi").get<double>();
        for (const auto& jb : jo.value("boxes", json::array()))
          om.box_counts.push_back(jb.at("wet_pixels").get<long long>());
        r.overpasses.push_back(std::move(om));
      }
      reports.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError((dir / "report.json").string() + ": " + e.what());
    }
  }
  if (reports.empty())
    throw DomainError("no report.json found under " + out_dir);
  return reports;
}

BatchResult run_batch(const BatchConfig& config, std::uint64_t seed,
                      const std::string& out_dir) {
  config.validate();
  fs::create_directories(out_dir);
  const auto t_begin = std::chrono::steady_clock::now();

  TruthArtifacts truth = generate_truth(config, seed);
  const std::string truth_dir = (fs::path(out_dir) / "truth").string();
  write_truth_artifacts(config, truth, truth_dir);

  BatchResult result;
  result.truth_dir = truth_dir;
  std::vector<std::pair<std::string, double>> timings;
  for (const auto& spec : config.experiments) {
    const auto t0 = std::chrono::steady_clock::now();
    result.reports.push_back(
        run_experiment(config, truth, spec, seed,
                       (fs::path(out_dir) / spec.name).string()));
    const auto t1 = std::chrono::steady_clock::now();
    timings.emplace_back(
        spec.name, std::chrono::duration<double>(t1 - t0).count());
  }
  compare_experiments(result.reports, out_dir);

  {
    json meta;
    meta["seed"] = seed;
    meta["epoch"] = format_iso8601(config.epoch);
    json experiments = json::array();
    for (const auto& r : result.reports) experiments.push_back(r.name);
    meta["experiments"] = experiments;
    meta["truth_dir"] = "truth";
    std::ofstream out(fs::path(out_dir) / "batch_meta.json");
    out << meta.dump(2) << '\n';
  }
  {
    // Wall-clock timings live here and only here; everything else written
    // by a batch is a pure function of config and seed.
    std::ofstream out(fs::path(out_dir) / "timing.txt");
    const auto t_end = std::chrono::steady_clock::now();
    out << "total_seconds "
        << std::chrono::duration<double>(t_end - t_begin).count() << '\n';
    for (const auto& [name, secs] : timings)
      out << name << "_seconds " << secs << '\n';
  }
  return result;
}

} // namespace floodda
