#include "floodda/grid.hpp"

#include <cmath>
#include <sstream>

#include "floodda/errors.hpp"

namespace floodda {

void GridSpec::validate() const {
  if (nx <= 0 || ny <= 0)
    throw DomainError("grid dimensions must be positive");
  if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy))
    throw DomainError("grid spacings must be positive and finite");
  if (zb.size() != size()) {
    std::ostringstream msg;
    msg << "bed elevation has " << zb.size() << " entries, expected "
        << size();
    throw DomainError(msg.str());
  }
  for (double z : zb)
    if (!std::isfinite(z)) throw DomainError("bed elevation must be finite");
}

void PhysicsParams::validate() const {
  if (!(g > 0.0)) throw DomainError("g must be positive");
  if (!(nu_e >= 0.0)) throw DomainError("nu_e must be non-negative");
  if (!(h_dry > 0.0)) throw DomainError("h_dry must be positive");
  if (!(cfl > 0.0) || cfl > 1.0)
    throw DomainError("cfl must lie in (0, 1]");
}

void FrictionField::validate(std::size_t ncells) const {
  if (ks.size() != ncells)
    throw DomainError("friction field size does not match grid");
  for (double k : ks)
    if (!(k > 0.0) || !std::isfinite(k))
      throw DomainError("Strickler coefficients must be positive and finite");
}

HydraulicState HydraulicState::zero(const GridSpec& grid) {
  HydraulicState s;
  s.h.assign(grid.size(), 0.0);
  s.u.assign(grid.size(), 0.0);
  s.v.assign(grid.size(), 0.0);
  return s;
}

void HydraulicState::validate(const GridSpec& grid) const {
  const std::size_t n = grid.size();
  if (h.size() != n || u.size() != n || v.size() != n)
    throw DomainError("state field size does not match grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(h[i]) || !std::isfinite(u[i]) || !std::isfinite(v[i]))
      throw DomainError("state contains non-finite values");
    if (h[i] < 0.0) throw DomainError("negative depth in state");
  }
}

} // namespace floodda
