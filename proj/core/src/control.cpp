#include "floodda/control.hpp"

#include <cmath>

#include "floodda/errors.hpp"

namespace floodda {

double& ControlVector::operator[](int i) {
  switch (i) {
    case 0: return ks0;
    case 1: return ks1;
    case 2: return ks2;
    case 3: return ks3;
    case 4: return a;
    case 5: return b;
    case 6: return c;
  }
  throw DomainError("control index out of range");
}

double ControlVector::operator[](int i) const {
  return const_cast<ControlVector*>(this)->operator[](i);
}

std::array<double, ControlVector::size> ControlVector::to_array() const {
  return {ks0, ks1, ks2, ks3, a, b, c};
}

ControlVector ControlVector::from_array(
    const std::array<double, size>& arr) {
  ControlVector x;
  for (int i = 0; i < size; ++i) x[i] = arr[i];
  return x;
}

const std::array<std::string, ControlVector::size>& ControlVector::names() {
  static const std::array<std::string, size> n = {"ks0", "ks1", "ks2", "ks3",
                                                  "a",   "b",   "c"};
  return n;
}

void ControlVector::clamp(double ks_floor) {
  ks0 = std::max(ks0, ks_floor);
  ks1 = std::max(ks1, ks_floor);
  ks2 = std::max(ks2, ks_floor);
  ks3 = std::max(ks3, ks_floor);
  a = std::max(a, 0.05);
}

void ControlVector::validate() const {
  for (int i = 0; i < size; ++i)
    if (!std::isfinite((*this)[i]))
      throw DomainError("control vector contains non-finite values");
  if (!(ks0 > 0.0 && ks1 > 0.0 && ks2 > 0.0 && ks3 > 0.0))
    throw DomainError("Strickler controls must be positive");
  if (!(a > 0.0)) throw DomainError("inflow multiplier must be positive");
}

void ControlPrior::validate() const {
  for (int i = 0; i < ControlVector::size; ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(sigma[i]))
      throw DomainError("prior moments must be finite");
    if (sigma[i] < 0.0) throw DomainError("prior sigma must be >= 0");
  }
}

Hydrograph perturb_hydrograph(const Hydrograph& base, double a, double b,
                              double c) {
  if (base.empty()) throw DomainError("perturb_hydrograph: empty hydrograph");
  if (!(a > 0.0) || !std::isfinite(a))
    throw DomainError("perturb_hydrograph: multiplier must be positive");
  if (!std::isfinite(b) || !std::isfinite(c))
    throw DomainError("perturb_hydrograph: offsets must be finite");

  const auto& t = base.times();
  const auto& q = base.flows();
  std::vector<double> tt, qq;
  tt.reserve(t.size() + 4);
  qq.reserve(t.size() + 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double ti = t[i] + c;
    double vi = a * q[i] + b;
    if (i > 0) {
      // Keep the zero clamp exact by inserting the crossing as a knot.
      double prev_v = a * q[i - 1] + b;
      if ((prev_v < 0.0) != (vi < 0.0) && prev_v != vi) {
        double w = (0.0 - prev_v) / (vi - prev_v);
        if (w > 0.0 && w < 1.0) {
          double tc = (t[i - 1] + c) + w * (ti - (t[i - 1] + c));
          if (tc > tt.back() && tc < ti) {
            tt.push_back(tc);
            qq.push_back(0.0);
          }
        }
      }
    }
    tt.push_back(ti);
    qq.push_back(std::max(0.0, vi));
  }
  return Hydrograph(std::move(tt), std::move(qq));
}

ControlVector sample_control(const ControlPrior& prior, Rng& rng) {
  prior.validate();
  ControlVector x;
  for (int i = 0; i < ControlVector::size; ++i)
    x[i] = rng.normal(prior.mean[i], prior.sigma[i]);
  return x;
}

std::array<double, ControlVector::size> sample_theta(const ControlPrior& prior,
                                                     Rng& rng) {
  prior.validate();
  std::array<double, ControlVector::size> th;
  for (int i = 0; i < ControlVector::size; ++i)
    th[i] = rng.normal(0.0, prior.sigma[i]);
  return th;
}

} // namespace floodda
