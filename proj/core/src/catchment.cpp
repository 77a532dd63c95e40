#include "floodda/catchment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "floodda/errors.hpp"
#include "floodda/rng.hpp"
#include "floodda/time_utils.hpp"

namespace floodda {

RatingCurve RatingCurve::power_law(double alpha, double h0, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw DomainError("rating curve alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw DomainError("rating curve beta must be positive");
  if (!std::isfinite(h0)) throw DomainError("rating curve h0 must be finite");
  RatingCurve rc;
  rc.power_law_ = true;
  rc.alpha_ = alpha;
  rc.h0_ = h0;
  rc.beta_ = beta;
  return rc;
}

RatingCurve RatingCurve::table(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2)
    throw DomainError("rating table needs at least two points");
  if (points.front().second != 0.0)
    throw DomainError("rating table must start at zero discharge");
  std::size_t last_zero = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [h, q] = points[i];
    if (!std::isfinite(h) || !std::isfinite(q) || q < 0.0)
      throw DomainError("rating table values must be finite, discharge >= 0");
    if (i > 0) {
      if (!(h > points[i - 1].first))
        throw DomainError("rating table depths must be strictly increasing");
      if (q < points[i - 1].second)
        throw DomainError("rating table discharge must be non-decreasing");
      if (q == 0.0) last_zero = i;
      // Discharge must rise strictly once positive so the curve inverts.
      if (points[i - 1].second > 0.0 && q == points[i - 1].second)
        throw DomainError("rating table discharge must be strictly "
                          "increasing on the wet range");
    }
  }
  if (last_zero == points.size() - 1)
    throw DomainError("rating table is entirely dry");
  RatingCurve rc;
  rc.power_law_ = false;
  rc.h0_ = points[last_zero].first;
  rc.points_ = std::move(points);
  return rc;
}

double RatingCurve::eval(double h) const {
  if (!std::isfinite(h)) throw DomainError("rating eval: depth must be finite");
  if (power_law_) {
    if (h <= h0_) return 0.0;
    return alpha_ * std::pow(h - h0_, beta_);
  }
  if (h <= points_.front().first) return points_.front().second;
  if (h >= points_.back().first) {
    // Continue the last segment's slope beyond the table.
    const auto& a = points_[points_.size() - 2];
    const auto& b = points_.back();
    double slope = (b.second - a.second) / (b.first - a.first);
    return b.second + slope * (h - b.first);
  }
  auto it = std::upper_bound(points_.begin(), points_.end(), h,
                             [](double x, const std::pair<double, double>& p) {
                               return x < p.first;
                             });
  const auto& b = *it;
  const auto& a = *(it - 1);
  double w = (h - a.first) / (b.first - a.first);
  return a.second + w * (b.second - a.second);
}

double RatingCurve::invert(double q) const {
  if (!std::isfinite(q) || q < 0.0)
    throw DomainError("rating invert: discharge must be finite and >= 0");
  if (q == 0.0) return h0_;
  if (power_law_) return h0_ + std::pow(q / alpha_, 1.0 / beta_);
  if (q > points_.back().second) {
    std::ostringstream msg;
    msg << "rating invert: discharge " << q << " above tabulated maximum "
        << points_.back().second;
    throw DomainError(msg.str());
  }
  auto it = std::lower_bound(points_.begin(), points_.end(), q,
                             [](const std::pair<double, double>& p, double x) {
                               return p.second < x;
                             });
  const auto& b = *it;
  if (b.second == q) return b.first;
  const auto& a = *(it - 1);
  double w = (q - a.second) / (b.second - a.second);
  return a.first + w * (b.first - a.first);
}

double RatingCurve::max_discharge() const {
  if (power_law_) return std::numeric_limits<double>::infinity();
  return points_.back().second;
}

Hydrograph::Hydrograph(std::vector<double> t, std::vector<double> q)
    : t_(std::move(t)), q_(std::move(q)) {
  if (t_.empty() || t_.size() != q_.size())
    throw DomainError("hydrograph needs matching, non-empty time/flow lists");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(q_[i]))
      throw DomainError("hydrograph values must be finite");
    if (q_[i] < 0.0) throw DomainError("hydrograph flow must be >= 0");
    if (i > 0 && !(t_[i] > t_[i - 1]))
      throw DomainError("hydrograph times must be strictly increasing");
  }
}

double Hydrograph::at(double time) const {
  if (t_.empty()) throw DomainError("empty hydrograph");
  if (time <= t_.front()) return q_.front();
  if (time >= t_.back()) return q_.back();
  auto it = std::upper_bound(t_.begin(), t_.end(), time);
  std::size_t i = static_cast<std::size_t>(it - t_.begin());
  double w = (time - t_[i - 1]) / (t_[i] - t_[i - 1]);
  return q_[i - 1] + w * (q_[i] - q_[i - 1]);
}

double inflow_at(const Hydrograph& hydro, double time) {
  return hydro.at(time);
}

void FrictionZoning::validate(const GridSpec& grid) const {
  if (zone.size() != grid.size())
    throw DomainError("zone map size does not match grid");
  for (int z : zone)
    if (z < 0 || z >= n_zones)
      throw DomainError("zone values must lie in 0..3");
}

FrictionField FrictionZoning::to_friction(
    const GridSpec& grid, const std::array<double, 4>& ks) const {
  validate(grid);
  for (double k : ks)
    if (!(k > 0.0) || !std::isfinite(k))
      throw DomainError("zone Strickler values must be positive and finite");
  FrictionField f;
  f.ks.resize(zone.size());
  for (std::size_t i = 0; i < zone.size(); ++i) f.ks[i] = ks[zone[i]];
  return f;
}

namespace {

bool on_side(const GridSpec& grid, const BoundaryCell& c) {
  switch (c.side) {
    case Side::west: return c.ix == 0;
    case Side::east: return c.ix == grid.nx - 1;
    case Side::north: return c.iy == 0;
    case Side::south: return c.iy == grid.ny - 1;
  }
  return false;
}

} // namespace

void BoundaryDriver::validate(const GridSpec& grid) const {
  std::set<std::tuple<int, int, int>> seen;
  auto check_group = [&](const std::vector<BoundaryCell>& group,
                         const char* label) {
    for (const auto& c : group) {
      if (c.ix < 0 || c.ix >= grid.nx || c.iy < 0 || c.iy >= grid.ny)
        throw DomainError(std::string(label) + " boundary cell out of range");
      if (!on_side(grid, c))
        throw DomainError(std::string(label) +
                          " boundary cell is not on its declared side");
      if (!seen.insert({c.ix, c.iy, static_cast<int>(c.side)}).second)
        throw DomainError("boundary face assigned twice");
    }
  };
  check_group(upstream, "upstream");
  check_group(downstream, "downstream");
  if (!upstream.empty() && inflow.empty())
    throw DomainError("upstream boundary declared without a hydrograph");
}

void Catchment::validate() const {
  grid.validate();
  zoning.validate(grid);
  for (double k : ks_default)
    if (!(k > 0.0)) throw DomainError("default Strickler values must be > 0");
  boundary.validate(grid);
  std::set<std::string> names;
  for (const auto& g : gauges) {
    if (g.name.empty()) throw DomainError("gauge name must not be empty");
    if (!names.insert(g.name).second)
      throw DomainError("duplicate gauge name: " + g.name);
    if (g.ix < 0 || g.ix >= grid.nx || g.iy < 0 || g.iy >= grid.ny)
      throw DomainError("gauge cell out of range: " + g.name);
  }
}

void SyntheticSpec::validate() const {
  if (nx < 6 || ny < 3) throw DomainError("synthetic domain too small");
  if (!(dx > 0.0)) throw DomainError("dx must be positive");
  if (channel_rows < 1 || channel_row0 < 0 ||
      channel_row0 + channel_rows > ny)
    throw DomainError("channel rows must fit inside the domain");
  if (channel_row0 == 0 || channel_row0 + channel_rows == ny)
    throw DomainError("channel must not touch the north/south edge");
  if (!(slope > 0.0)) throw DomainError("slope must be positive");
  if (!(bank_height > 0.0)) throw DomainError("bank height must be positive");
  if (cross_step < 0.0 || rough_amp < 0.0)
    throw DomainError("cross_step and rough_amp must be >= 0");
  if (rough_amp >= bank_height)
    throw DomainError("bed roughness must stay below the bank height");
  for (double k : ks)
    if (!(k > 0.0)) throw DomainError("ks values must be positive");
  if (!(base_flow > 0.0)) throw DomainError("base flow must be positive");
  for (double f : gauge_fracs)
    if (!(f > 0.0 && f < 1.0))
      throw DomainError("gauge fractions must lie in (0, 1)");
  if (!std::isfinite(stage_offset) || stage_offset < 0.0)
    throw DomainError("stage offset must be finite and >= 0");
  if (resolution_factor < 1)
    throw DomainError("resolution factor must be >= 1");
}

Catchment make_synthetic_catchment(const SyntheticSpec& spec) {
  spec.validate();
  const int r = spec.resolution_factor;
  const int nx = spec.nx * r;
  const int ny = spec.ny * r;
  const double dx = spec.dx / r;
  const double length = spec.nx * spec.dx;

  Catchment c;
  c.grid.nx = nx;
  c.grid.ny = ny;
  c.grid.dx = dx;
  c.grid.dy = dx;
  c.grid.x0 = 0.0;
  c.grid.y0 = 0.0;
  c.grid.zb.resize(c.grid.size());
  c.zoning.zone.assign(c.grid.size(), 0);
  c.ks_default = spec.ks;

  auto coarse_of = [r](int fine) { return fine / r; };
  auto in_channel = [&](int iyc) {
    return iyc >= spec.channel_row0 &&
           iyc < spec.channel_row0 + spec.channel_rows;
  };

  for (int iy = 0; iy < ny; ++iy) {
    const int iyc = coarse_of(iy);
    for (int ix = 0; ix < nx; ++ix) {
      const int ixc = coarse_of(ix);
      const double x = c.grid.cell_x(ix);
      const double z_channel = spec.z_downstream + spec.slope * (length - x);
      double z = z_channel;
      if (!in_channel(iyc)) {
        int row_dist = iyc < spec.channel_row0
                           ? spec.channel_row0 - iyc
                           : iyc - (spec.channel_row0 + spec.channel_rows - 1);
        z += spec.bank_height + spec.cross_step * (row_dist - 1);
        // Deterministic micro-topography, keyed on the coarse cell so the
        // bed shape is identical across resolution factors.
        Rng rough(spec.micro_seed, "bedrough",
                  static_cast<std::uint64_t>(ixc),
                  static_cast<std::uint64_t>(iyc));
        z += spec.rough_amp * (2.0 * rough.uniform() - 1.0);
      } else {
        int third = ixc * 3 / spec.nx; // 0,1,2 along the reach
        c.zoning.zone[c.grid.idx(ix, iy)] = 1 + std::min(third, 2);
      }
      c.grid.zb[c.grid.idx(ix, iy)] = z;
    }
  }

  // Inflow across the whole west edge; conveyance weighting concentrates it
  // in the channel as soon as the channel is wet.
  for (int iy = 0; iy < ny; ++iy)
    c.boundary.upstream.push_back({0, iy, Side::west});
  c.boundary.inflow = Hydrograph({0.0}, {spec.base_flow});

  // Outflow through the east-edge channel cells, stage set by a rating
  // curve consistent with uniform flow in the downstream reach.
  for (int iy = 0; iy < ny; ++iy)
    if (in_channel(coarse_of(iy)))
      c.boundary.downstream.push_back({nx - 1, iy, Side::east});
  const double channel_width = spec.channel_rows * spec.dx;
  const double alpha = spec.ks[3] * channel_width * std::sqrt(spec.slope);
  c.boundary.rating = RatingCurve::power_law(alpha, 0.0, 5.0 / 3.0);

  const char* names[3] = {"G1", "G2", "G3"};
  for (int k = 0; k < 3; ++k) {
    int ixc = static_cast<int>(spec.gauge_fracs[k] * spec.nx);
    ixc = std::min(ixc, spec.nx - 1);
    GaugeStation g;
    g.name = names[k];
    g.ix = ixc * r + r / 2;
    g.iy = spec.channel_row0 * r + r / 2;
    g.datum = c.grid.zb[c.grid.idx(g.ix, g.iy)] - spec.stage_offset;
    c.gauges.push_back(g);
  }

  c.validate();
  return c;
}

void save_restart(const std::string& path, const HydraulicState& state,
                  const GridSpec& grid) {
  state.validate(grid);
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write restart file: " + path);
  out << "floodda restart 1\n";
  out << "nx " << grid.nx << " ny " << grid.ny << '\n';
  out << "t " << fmt_g17(state.t) << '\n';
  auto dump = [&](const char* label, const std::vector<double>& f) {
    out << label << '\n';
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        if (ix) out << ' ';
        out << fmt_g17(f[grid.idx(ix, iy)]);
      }
      out << '\n';
    }
  };
  dump("h", state.h);
  dump("u", state.u);
  dump("v", state.v);
  if (!out) throw FormatError("write failed: " + path);
}

HydraulicState load_restart(const std::string& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open restart file: " + path);
  std::string w1, w2;
  int version = 0;
  if (!(in >> w1 >> w2 >> version) || w1 != "floodda" || w2 != "restart" ||
      version != 1)
    throw FormatError(path + ": not a restart file");
  std::string key;
  int nx = 0, ny = 0;
  if (!(in >> key >> nx) || key != "nx" || !(in >> key >> ny) || key != "ny")
    throw FormatError(path + ": malformed restart header");
  if (nx != grid.nx || ny != grid.ny) {
    std::ostringstream msg;
    msg << path << ": restart is " << nx << "x" << ny << ", grid is "
        << grid.nx << "x" << grid.ny;
    throw FormatError(msg.str());
  }
  HydraulicState s = HydraulicState::zero(grid);
  if (!(in >> key >> s.t) || key != "t")
    throw FormatError(path + ": malformed restart time");
  auto slurp = [&](const char* label, std::vector<double>& f) {
    if (!(in >> key) || key != label)
      throw FormatError(path + ": expected field '" + std::string(label) +
                        "'");
    for (double& v : f)
      if (!(in >> v))
        throw FormatError(path + ": truncated field '" + std::string(label) +
                          "'");
  };
  slurp("h", s.h);
  slurp("u", s.u);
  slurp("v", s.v);
  s.validate(grid);
  return s;
}

} // namespace floodda
