#pragma once

// Adaptive Simpson quadrature and the five-node panel rules used by the
// coefficient tables.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kgvac/error.hpp"

namespace kgvac::quad {

/// Node positions of a panel, as fractions of its length.
inline constexpr std::array<double, 5> kPanelNodes{0.0, 0.25, 0.5, 0.75, 1.0};

/// kCumulative[j][i]: integral over [0, s_j] of the i-th Lagrange basis polynomial
/// on kPanelNodes (unit panel). Row 4 is Boole's rule.
extern const std::array<std::array<double, 5>, 5> kCumulative;

/// Coarse Simpson (nodes 0, 2, 4) and composite Simpson (all five) over a panel of length h.
template <class V>
V simpson_coarse(const std::array<V, 5>& f, double h) {
  return (f[0] + 4.0 * f[2] + f[4]) * (h / 6.0);
}
template <class V>
V simpson_fine(const std::array<V, 5>& f, double h) {
  return (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]) * (h / 12.0);
}

/// Integral from the panel start to node j, exact for quartic integrands.
template <class V>
V cumulative(const std::array<V, 5>& f, double h, int j) {
  V acc = f[0] * kCumulative[j][0];
  for (int i = 1; i < 5; ++i) acc += f[i] * kCumulative[j][i];
  return acc * h;
}

struct SimpsonResult {
  double value = 0.0;
  double error = 0.0;     ///< sum of accepted local error estimates
  long evaluations = 0;
};

/// Classic recursive adaptive Simpson with absolute tolerance `tol`.
/// Throws QuadratureError (carrying the worst interval) if `max_depth` is hit
/// before the local estimate meets its share of the tolerance.
SimpsonResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_depth = 48);

}  // namespace kgvac::quad
