#pragma once

#include <array>
#include <string>

#include "floodda/catchment.hpp"
#include "floodda/rng.hpp"

namespace floodda {

/// The seven estimated quantities: four zone Strickler coefficients and the
/// multiplicative / additive / time-shift inflow corrections (a, b, c).
struct ControlVector {
  static constexpr int size = 7;

  double ks0 = 17.0; ///< floodplain
  double ks1 = 45.0; ///< upstream reach
  double ks2 = 38.0; ///< middle reach
  double ks3 = 40.0; ///< downstream reach
  double a = 1.0;    ///< inflow multiplier
  double b = 0.0;    ///< inflow offset [m3/s]
  double c = 0.0;    ///< inflow time shift [s]

  double& operator[](int i);
  double operator[](int i) const;
  std::array<double, size> to_array() const;
  static ControlVector from_array(const std::array<double, size>& a);
  static const std::array<std::string, size>& names();

  std::array<double, 4> ks() const { return {ks0, ks1, ks2, ks3}; }

  /// Clamp to the physically valid region: Strickler values at or above
  /// ks_floor, multiplier strictly positive.
  void clamp(double ks_floor = 1.0);
  void validate() const;
};

/// Independent Gaussian prior for each control.
struct ControlPrior {
  std::array<double, ControlVector::size> mean{17.0, 45.0, 38.0,
                                               40.0, 1.0,  0.0, 0.0};
  std::array<double, ControlVector::size> sigma{0.85, 2.25,  1.9, 2.0,
                                                0.06, 100.0, 900.0};

  void validate() const;
};

/// Apply the inflow correction: Q~(t) = a Q(t - c) + b, clamped at zero.
///
/// The result is again piecewise linear: knots are shifted by c and scaled,
/// and a knot is inserted wherever a segment crosses zero so the clamp is
/// exact, not sampled. Composing two corrections equals a single correction
/// with (a1 a2, a2 b1 + b2, c1 + c2) as long as no clamping occurred.
Hydrograph perturb_hydrograph(const Hydrograph& base, double a, double b,
                              double c);

/// Draw one control vector from the prior (no clamping applied).
ControlVector sample_control(const ControlPrior& prior, Rng& rng);

/// Draw a zero-mean perturbation with the prior's spread.
std::array<double, ControlVector::size> sample_theta(const ControlPrior& prior,
                                                     Rng& rng);

} // namespace floodda
