#include "floodda/swe_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "floodda/errors.hpp"

namespace floodda {
namespace swe {

std::pair<double, double> friction_acceleration(double h, double u, double v,
                                                double ks, double g) {
  if (!(h > 0.0)) throw DomainError("friction: depth must be positive");
  if (!(ks > 0.0)) throw DomainError("friction: ks must be positive");
  double speed = std::sqrt(u * u + v * v);
  double coef = -g * speed / (ks * ks * std::pow(h, 4.0 / 3.0));
  return {coef * u, coef * v};
}

double stable_dt(const HydraulicState& state, const GridSpec& grid,
                 const PhysicsParams& params) {
  const double dmin = std::min(grid.dx, grid.dy);
  double dt = std::numeric_limits<double>::infinity();
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double h = state.h[i];
    if (h < params.h_dry) continue;
    double denom = std::abs(state.u[i]) + std::abs(state.v[i]) +
                   std::sqrt(params.g * h);
    if (denom > 0.0) dt = std::min(dt, dmin / denom);
  }
  if (!std::isfinite(dt))
    throw DomainError("stable_dt: no wet cells in state");
  return params.cfl * dt;
}

double total_volume(const HydraulicState& state, const GridSpec& grid) {
  double sum = 0.0;
  for (double h : state.h) sum += h;
  return sum * grid.cell_area();
}

namespace {

// Rusanov flux across one face, x-normal orientation. The caller rotates
// arguments for y faces. Depths are reconstructed against the higher of the
// two bed levels, so a flat surface over any bed produces a flux that the
// per-cell bed correction cancels exactly.
struct FaceFlux {
  double fh, fqn, fqt; // mass, normal momentum, transverse momentum
  double hls, hrs;     // reconstructed depths
};

inline FaceFlux face_flux(double zbl, double hl, double unl, double utl,
                          double zbr, double hr, double unr, double utr,
                          double g) {
  FaceFlux f;
  const double zf = zbl > zbr ? zbl : zbr;
  f.hls = std::max(0.0, hl + zbl - zf);
  f.hrs = std::max(0.0, hr + zbr - zf);
  if (f.hls <= 0.0 && f.hrs <= 0.0) {
    f.fh = f.fqn = f.fqt = 0.0;
    return f;
  }
  const double cl = std::sqrt(g * f.hls);
  const double cr = std::sqrt(g * f.hrs);
  const double s = std::max(std::abs(unl) + cl, std::abs(unr) + cr);
  const double ql = f.hls * unl;
  const double qr = f.hrs * unr;
  f.fh = 0.5 * (ql + qr) - 0.5 * s * (f.hrs - f.hls);
  f.fqn = 0.5 * (ql * unl + 0.5 * g * f.hls * f.hls + qr * unr +
                 0.5 * g * f.hrs * f.hrs) -
          0.5 * s * (qr - ql);
  f.fqt = 0.5 * (ql * utl + qr * utr) - 0.5 * s * (f.hrs * utr - f.hls * utl);
  return f;
}

} // namespace

SweEngine::SweEngine(const GridSpec& grid, const FrictionField& friction,
                     const PhysicsParams& params,
                     const BoundaryDriver* boundary)
    : grid_(grid), friction_(friction), params_(params), boundary_(boundary) {
  grid_.validate();
  friction_.validate(grid_.size());
  params_.validate();
  dh_.resize(grid_.size());
  dqx_.resize(grid_.size());
  dqy_.resize(grid_.size());
  open_.assign(grid_.size(), 0);
  if (boundary_) {
    boundary_->validate(grid_);
    for (const auto& c : boundary_->downstream) {
      std::uint8_t bit = 0;
      switch (c.side) {
        case Side::east: bit = 1; break;
        case Side::west: bit = 2; break;
        case Side::north: bit = 4; break;
        case Side::south: bit = 8; break;
      }
      open_[grid_.idx(c.ix, c.iy)] |= bit;
    }
  }
}

double SweEngine::rating_stage(const HydraulicState& s) const {
  // Outward discharge through the downstream group sets the target stage.
  double q_out = 0.0;
  for (const auto& c : boundary_->downstream) {
    const std::size_t i = grid_.idx(c.ix, c.iy);
    const double h = s.h[i];
    if (h < params_.h_dry) continue;
    double un = 0.0, len = 0.0;
    switch (c.side) {
      case Side::east: un = s.u[i]; len = grid_.dy; break;
      case Side::west: un = -s.u[i]; len = grid_.dy; break;
      case Side::north: un = s.v[i]; len = grid_.dx; break;
      case Side::south: un = -s.v[i]; len = grid_.dx; break;
    }
    if (un > 0.0) q_out += h * un * len;
  }
  const auto& rating = boundary_->rating;
  q_out = std::min(q_out, rating.max_discharge());
  return rating.invert(q_out);
}

void SweEngine::add_inflow(HydraulicState& s, double dt) {
  const double q_total = boundary_->inflow.at(s.t);
  if (!(q_total > 0.0)) return;
  const auto& cells = boundary_->upstream;
  // Conveyance weights from the pre-step state.
  std::vector<double>& w = inflow_w_;
  w.assign(cells.size(), 0.0);
  double wsum = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::size_t i = grid_.idx(cells[k].ix, cells[k].iy);
    const double h = s.h[i];
    if (h >= params_.h_dry) {
      w[k] = friction_.ks[i] * std::pow(h, 5.0 / 3.0);
      wsum += w[k];
    }
  }
  if (wsum <= 0.0) {
    // Dry start: spread evenly over the lowest-lying cells of the group.
    double zmin = std::numeric_limits<double>::infinity();
    for (const auto& c : cells)
      zmin = std::min(zmin, grid_.zb[grid_.idx(c.ix, c.iy)]);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::size_t i = grid_.idx(cells[k].ix, cells[k].iy);
      w[k] = grid_.zb[i] <= zmin + 0.5 ? 1.0 : 0.0;
      wsum += w[k];
    }
  }
  const double inv_area = 1.0 / grid_.cell_area();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (w[k] <= 0.0) continue;
    const std::size_t i = grid_.idx(cells[k].ix, cells[k].iy);
    dh_[i] += q_total * (w[k] / wsum) * inv_area;
  }
  inflow_volume_ += q_total * dt;
}

void SweEngine::step(HydraulicState& s, double dt) {
  const int nx = grid_.nx, ny = grid_.ny;
  const double g = params_.g;
  const double invdx = 1.0 / grid_.dx;
  const double invdy = 1.0 / grid_.dy;

  std::fill(dh_.begin(), dh_.end(), 0.0);
  std::fill(dqx_.begin(), dqx_.end(), 0.0);
  std::fill(dqy_.begin(), dqy_.end(), 0.0);

  double h_open = 0.0;
  const bool any_open = boundary_ && !boundary_->downstream.empty();
  if (any_open) h_open = rating_stage(s);
  if (boundary_ && !boundary_->upstream.empty()) add_inflow(s, dt);

  const double* h = s.h.data();
  const double* u = s.u.data();
  const double* v = s.v.data();
  const double* zb = grid_.zb.data();

  // x-direction faces, including one wall/open face at each row end.
  for (int iy = 0; iy < ny; ++iy) {
    const std::size_t row = static_cast<std::size_t>(iy) * nx;
    for (int ix = -1; ix < nx; ++ix) {
      const bool has_l = ix >= 0;
      const bool has_r = ix + 1 < nx;
      const std::size_t il = row + ix;
      const std::size_t ir = row + ix + 1;
      FaceFlux f;
      if (has_l && has_r) {
        if (h[il] <= 0.0 && h[ir] <= 0.0) continue;
        f = face_flux(zb[il], h[il], u[il], v[il], zb[ir], h[ir], u[ir],
                      v[ir], g);
      } else if (has_l) { // east edge of the domain
        if (open_[il] & 1u)
          f = face_flux(zb[il], h[il], u[il], v[il], zb[il], h_open, u[il],
                        v[il], g);
        else
          f = face_flux(zb[il], h[il], u[il], v[il], zb[il], h[il], -u[il],
                        v[il], g);
        const double tmp = f.fh * invdx;
        dh_[il] -= tmp;
        dqx_[il] += (-f.fqn + 0.5 * g * f.hls * f.hls) * invdx;
        dqy_[il] -= f.fqt * invdx;
        if (open_[il] & 1u)
          outflow_volume_ += f.fh * grid_.dy * dt;
        continue;
      } else { // west edge of the domain
        if (open_[ir] & 2u)
          f = face_flux(zb[ir], h_open, u[ir], v[ir], zb[ir], h[ir], u[ir],
                        v[ir], g);
        else
          f = face_flux(zb[ir], h[ir], -u[ir], v[ir], zb[ir], h[ir], u[ir],
                        v[ir], g);
        const double tmp = f.fh * invdx;
        dh_[ir] += tmp;
        dqx_[ir] += (f.fqn - 0.5 * g * f.hrs * f.hrs) * invdx;
        dqy_[ir] += f.fqt * invdx;
        if (open_[ir] & 2u)
          outflow_volume_ -= f.fh * grid_.dy * dt;
        continue;
      }
      // Interior face: one rounded mass increment shared by both sides so
      // the domain total telescopes exactly.
      const double tmp = f.fh * invdx;
      dh_[il] -= tmp;
      dh_[ir] += tmp;
      dqx_[il] += (-f.fqn + 0.5 * g * f.hls * f.hls) * invdx;
      dqx_[ir] += (f.fqn - 0.5 * g * f.hrs * f.hrs) * invdx;
      dqy_[il] -= f.fqt * invdx;
      dqy_[ir] += f.fqt * invdx;
    }
  }

  // y-direction faces. Row iy is north of row iy+1, so the normal velocity
  // from row iy+1 toward row iy is +v.
  for (int iy = -1; iy < ny; ++iy) {
    const bool has_n = iy >= 0;
    const bool has_s = iy + 1 < ny;
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t in = static_cast<std::size_t>(iy) * nx + ix;
      const std::size_t is = static_cast<std::size_t>(iy + 1) * nx + ix;
      FaceFlux f;
      if (has_n && has_s) {
        if (h[in] <= 0.0 && h[is] <= 0.0) continue;
        // "Left" of the face is the south cell: flux is positive northward.
        f = face_flux(zb[is], h[is], v[is], u[is], zb[in], h[in], v[in],
                      u[in], g);
        const double tmp = f.fh * invdy;
        dh_[is] -= tmp;
        dh_[in] += tmp;
        dqy_[is] += (-f.fqn + 0.5 * g * f.hls * f.hls) * invdy;
        dqy_[in] += (f.fqn - 0.5 * g * f.hrs * f.hrs) * invdy;
        dqx_[is] -= f.fqt * invdy;
        dqx_[in] += f.fqt * invdy;
      } else if (has_n) { // south edge of the domain (below row ny-1)
        if (open_[in] & 8u)
          f = face_flux(zb[in], h_open, v[in], u[in], zb[in], h[in], v[in],
                        u[in], g);
        else
          f = face_flux(zb[in], h[in], -v[in], u[in], zb[in], h[in], v[in],
                        u[in], g);
        const double tmp = f.fh * invdy;
        dh_[in] += tmp;
        dqy_[in] += (f.fqn - 0.5 * g * f.hrs * f.hrs) * invdy;
        dqx_[in] += f.fqt * invdy;
        if (open_[in] & 8u) outflow_volume_ -= f.fh * grid_.dx * dt;
      } else { // north edge of the domain (above row 0)
        if (open_[is] & 4u)
          f = face_flux(zb[is], h[is], v[is], u[is], zb[is], h_open, v[is],
                        u[is], g);
        else
          f = face_flux(zb[is], h[is], v[is], u[is], zb[is], h[is], -v[is],
                        u[is], g);
        const double tmp = f.fh * invdy;
        dh_[is] -= tmp;
        dqy_[is] += (-f.fqn + 0.5 * g * f.hls * f.hls) * invdy;
        dqx_[is] -= f.fqt * invdy;
        if (open_[is] & 4u) outflow_volume_ += f.fh * grid_.dx * dt;
      }
    }
  }

  // Momentum diffusion with a constant eddy viscosity, conservative form.
  if (params_.nu_e > 0.0) {
    const double nu = params_.nu_e;
    for (int iy = 0; iy < ny; ++iy) {
      const std::size_t row = static_cast<std::size_t>(iy) * nx;
      for (int ix = 0; ix + 1 < nx; ++ix) {
        const std::size_t il = row + ix, ir = row + ix + 1;
        if (h[il] < params_.h_dry || h[ir] < params_.h_dry) continue;
        const double hbar = 0.5 * (h[il] + h[ir]);
        const double fu = nu * hbar * (u[ir] - u[il]) * invdx;
        const double fv = nu * hbar * (v[ir] - v[il]) * invdx;
        dqx_[il] += fu * invdx;
        dqx_[ir] -= fu * invdx;
        dqy_[il] += fv * invdx;
        dqy_[ir] -= fv * invdx;
      }
    }
    for (int iy = 0; iy + 1 < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t in = static_cast<std::size_t>(iy) * nx + ix;
        const std::size_t is = in + nx;
        if (h[in] < params_.h_dry || h[is] < params_.h_dry) continue;
        const double hbar = 0.5 * (h[in] + h[is]);
        const double fu = nu * hbar * (u[in] - u[is]) * invdy;
        const double fv = nu * hbar * (v[in] - v[is]) * invdy;
        dqx_[is] += fu * invdy;
        dqx_[in] -= fu * invdy;
        dqy_[is] += fv * invdy;
        dqy_[in] -= fv * invdy;
      }
    }
  }

  // Conservative update, then point-implicit friction. New depths below
  // h_dry keep their mass but drop their velocity.
  bool bad = false;
  const std::size_t n = grid_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double hn = s.h[i] + dt * dh_[i];
    double qx = s.h[i] * s.u[i] + dt * dqx_[i];
    double qy = s.h[i] * s.v[i] + dt * dqy_[i];
    if (hn < 0.0) hn = 0.0;
    if (hn >= params_.h_dry) {
      double uu = qx / hn;
      double vv = qy / hn;
      const double speed = std::sqrt(uu * uu + vv * vv);
      if (speed > 0.0) {
        const double ks = friction_.ks[i];
        const double denom =
            1.0 + dt * g * speed / (ks * ks * (hn * std::cbrt(hn)));
        uu /= denom;
        vv /= denom;
      }
      s.u[i] = uu;
      s.v[i] = vv;
    } else {
      s.u[i] = 0.0;
      s.v[i] = 0.0;
    }
    s.h[i] = hn;
    bad |= !(std::isfinite(hn) && std::isfinite(s.u[i]) &&
             std::isfinite(s.v[i]));
  }
  s.t += dt;
  if (bad) {
    std::ostringstream msg;
    msg << "solver state went non-finite at t = " << s.t;
    throw SolverError(msg.str());
  }
}

double SweEngine::suggest_dt(const HydraulicState& state, double max_dt) const {
  double dt = max_dt;
  try {
    dt = std::min(dt, stable_dt(state, grid_, params_));
  } catch (const DomainError&) {
    // All dry: caller decides whether a bootstrap step makes sense.
  }
  if (params_.nu_e > 0.0) {
    const double d2 = std::min(grid_.dx * grid_.dx, grid_.dy * grid_.dy);
    dt = std::min(dt, 0.25 * d2 / params_.nu_e);
  }
  return dt;
}

HydraulicState step(const HydraulicState& state, const GridSpec& grid,
                    const FrictionField& friction, const PhysicsParams& params,
                    double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw DomainError("step: dt must be positive and finite");
  HydraulicState out = state;
  SweEngine engine(grid, friction, params, nullptr);
  engine.step(out, dt);
  return out;
}

WindowResult run_window(HydraulicState& state, double t_end,
                        const GridSpec& grid, const FrictionField& friction,
                        const PhysicsParams& params,
                        const BoundaryDriver* boundary,
                        const WindowSampling& sampling) {
  if (!(t_end >= state.t))
    throw DomainError("run_window: t_end precedes the state time");
  state.validate(grid);

  SweEngine engine(grid, friction, params, boundary);

  // Merge sampling instants into one ascending event list ending at t_end.
  std::vector<double> events;
  for (double t : sampling.gauge_times)
    if (t >= state.t && t <= t_end) events.push_back(t);
  for (double t : sampling.snapshot_times)
    if (t >= state.t && t <= t_end) events.push_back(t);
  events.push_back(t_end);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  WindowResult result;
  std::size_t next_gauge = 0;
  while (next_gauge < sampling.gauge_times.size() &&
         sampling.gauge_times[next_gauge] < state.t)
    ++next_gauge;
  std::size_t next_snap = 0;
  while (next_snap < sampling.snapshot_times.size() &&
         sampling.snapshot_times[next_snap] < state.t)
    ++next_snap;

  auto record_if_due = [&](double tol) {
    while (next_gauge < sampling.gauge_times.size() &&
           sampling.gauge_times[next_gauge] <= state.t + tol) {
      std::vector<double> row;
      row.reserve(sampling.gauges.size());
      for (const auto& g : sampling.gauges) {
        const std::size_t i = grid.idx(g.ix, g.iy);
        row.push_back(grid.zb[i] + state.h[i] - g.datum);
      }
      result.levels.push_back(std::move(row));
      ++next_gauge;
    }
    while (next_snap < sampling.snapshot_times.size() &&
           sampling.snapshot_times[next_snap] <= state.t + tol) {
      result.snapshots.push_back(state);
      ++next_snap;
    }
  };

  record_if_due(0.0);
  for (double t_evt : events) {
    while (state.t < t_evt) {
      double remaining = t_evt - state.t;
      if (remaining <= 1e-9) {
        state.t = t_evt;
        break;
      }
      double dt = engine.suggest_dt(state, remaining);
      if (!(dt > 0.0) || !std::isfinite(dt))
        throw SolverError("run_window: no positive stable dt");
      if (dt >= remaining - 1e-9) dt = remaining;
      bool all_dry = true;
      for (double h : state.h)
        if (h >= params.h_dry) {
          all_dry = false;
          break;
        }
      if (all_dry) {
        if (!boundary || boundary->upstream.empty())
          throw SolverError("run_window: domain dry with no inflow");
        dt = std::min(remaining, 1.0); // bootstrap until water arrives
      }
      engine.step(state, dt);
      if (dt == remaining) state.t = t_evt;
    }
    record_if_due(1e-9);
  }

  result.inflow_volume = engine.inflow_volume();
  result.outflow_volume = engine.outflow_volume();
  return result;
}

} // namespace swe
} // namespace floodda
