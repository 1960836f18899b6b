#pragma once

// Smooth, compactly supported homogeneous potentials f(t) = a * b(t).

#include <span>
#include <vector>

#include "kgvac/jet.hpp"

namespace kgvac {

/// Parameters of the bump profile
///   b(t) = exp(s * (1 - w^2 / (4 (t - l)(r - t)))),  l = c - w/2, r = c + w/2,
/// which is C-infinity, supported on (l, r) and equal to 1 at t = c.
/// The canonical family uses c = T/2, w = T, s = 4.
struct BumpShape {
  double center = 0.5;
  double width = 1.0;
  double sharpness = 4.0;
};

struct SupNorms {
  double f = 0.0;     ///< sup_t |f(t)|
  double fdot = 0.0;  ///< sup_t |f'(t)|
};

class Potential {
 public:
  /// Canonical bump on (0, T).
  static Potential bump(int dim, std::vector<double> amplitude, double T);
  static Potential bump(int dim, std::vector<double> amplitude, double T, BumpShape shape);

  int dim() const { return static_cast<int>(amplitude_.size()); }
  double period_end() const { return T_; }
  const BumpShape& shape() const { return shape_; }
  std::span<const double> amplitude() const { return amplitude_; }
  bool is_zero() const { return zero_; }

  /// Open support (l, r) of the profile; f vanishes identically outside.
  double support_begin() const { return lo_; }
  double support_end() const { return hi_; }

  // Scalar profile b(t) and its derivatives (closed form, zero off support).
  double profile(double t) const;
  double profile_deriv(double t) const;
  /// Taylor jet of b at t: coefficients b, b', b''/2, b'''/6.
  Jet<double, 3> profile_jet(double t) const;

  std::vector<double> value(double t) const;
  std::vector<double> deriv(double t) const;
  std::vector<double> second_deriv(double t) const;

  /// Time of the (first) maximum of |b'(t)|, found with the same search as sup_norms.
  double argmax_fdot() const;

 private:
  Potential(std::vector<double> amplitude, double T, BumpShape shape);

  std::vector<double> amplitude_;
  double T_;
  BumpShape shape_;
  double lo_;
  double hi_;
  bool zero_;
};

// Free-function surface.
Potential make_bump(int dim, std::vector<double> amplitude, double T);
std::vector<double> eval_potential(const Potential& spec, double t);
std::vector<double> eval_potential_deriv(const Potential& spec, double t);

/// (|f|_inf, |f'|_inf): dense sampling followed by Brent refinement of the best sample.
SupNorms sup_norms(const Potential& spec);

}  // namespace kgvac
