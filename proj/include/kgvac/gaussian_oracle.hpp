#pragma once

// Exact per-mode evolution of the two-quadrature Gaussian vacuum and its
// projections onto the instantaneous pair basis.

#include <complex>
#include <span>
#include <vector>

#include "kgvac/mode_core.hpp"
#include "kgvac/potential.hpp"

namespace kgvac {

/// Evolved Gaussian of one quadrature pair. The one-variable wave function is
///   psi(Q) = (omega0 / pi hbar)^{1/4} conj(u)^{-1/2} e^{i phase/2} e^{-width Q^2 / (2 hbar^2)}
/// (width in energy units), identical in Q and Qbar.
struct GaussianModeState {
  double t = 0.0;
  double hbar = 1.0;
  cx u{1.0, 0.0};
  cx udot{0.0, 0.0};
  double phase = 0.0;   ///< integral of omega from 0 to t
  double arg_u = 0.0;   ///< continuous branch of arg u
  cx width{1.0, 0.0};   ///< hbar * alpha, alpha = -i conj(udot / u); equals eps(0) at t = 0
  double omega0 = 1.0;  ///< omega at t = 0
  double norm_check = 0.0;  ///< max relative drift of Im(conj(u) udot) + omega0 along the path
};

/// Integrates u'' + omega^2(t) u = 0, u(0) = 1, u'(0) = -i omega(0), by
/// Runge-Kutta-Fehlberg 7(8) with relative tolerance `tol`.
/// Throws NumericalError on step-size underflow or Wronskian drift > 1e-6.
GaussianModeState evolve_mode(const ModeIndex& k, double hbar, const Potential& spec,
                              double t_end, double tol = 1e-11);
GaussianModeState evolve_momentum(std::span<const double, 3> x, double hbar, const Potential& spec,
                                  double t_end, double tol = 1e-11);

/// The one-variable evolved wave function psi(Q) at the state's time.
cx gaussian_wavefunction(const GaussianModeState& state, double Q);

/// Instantaneous oscillator basis at one time: Hermite functions of frequency omega
/// and the pair states phi^{s,r} = (a+)^s (b+)^r / sqrt(s! r!) phi^{0,0}, with
/// a+ = (c1+ - i c2+)/sqrt2, b+ = (c1+ + i c2+)/sqrt2.
class InstantaneousBasis {
 public:
  /// Builds the basis and verifies orthonormality of phi^{s,r}, s, r <= s_max, by
  /// quadrature to 1e-10 (NumericalError otherwise).
  InstantaneousBasis(double omega, double hbar, int s_max = 3);
  static InstantaneousBasis at(const ModeIndex& k, double t, double hbar, const Potential& spec,
                               int s_max = 3);

  double omega() const { return omega_; }
  double eps() const { return omega_ * hbar_; }
  double hbar() const { return hbar_; }
  int s_max() const { return s_max_; }
  /// Largest deviation of the Gram matrix from the identity found at build time.
  double orthonormality_error() const { return gram_error_; }

  /// One-variable Hermite functions h_0..h_n at Q.
  std::vector<double> hermite(int n, double Q) const;
  /// phi^{s,r}(Q, Qbar).
  cx pair_state(int s, int r, double Q, double Qbar) const;

  /// Coefficients of phi^{s,r} on product Hermite states |n, s+r-n>, n = 0..s+r.
  static std::vector<cx> product_coefficients(int s, int r);

 private:
  double omega_;
  double hbar_;
  int s_max_;
  double gram_error_ = 0.0;
};

/// <h_n | psi> for the one-variable Gaussian, n = 0..n_max (odd entries vanish).
std::vector<cx> one_variable_overlaps(const GaussianModeState& state, const InstantaneousBasis& basis,
                                      int n_max);
/// <phi^{s,s}(t) | evolved state>.
cx overlap_basis(const GaussianModeState& state, const InstantaneousBasis& basis, int s);
/// <phi^{s,r}(t) | evolved state>; vanishes for s != r.
cx overlap_basis_mixed(const GaussianModeState& state, const InstantaneousBasis& basis, int s, int r);

/// Exact pair-ladder overlaps c0^2 z^s with z = (omega - alpha)/(omega + alpha).
struct LadderOverlaps {
  cx c0sq;     ///< overlap with phi^{0,0}
  cx z;     ///< ratio between consecutive diagonal overlaps
  double q() const { return std::norm(c0sq); }
  double p() const { return std::norm(c0sq) * std::norm(z); }
  /// sum_{s > s_max} |overlap(s)|^2
  double tail_weight(int s_max) const;
};
LadderOverlaps ladder_overlaps(const GaussianModeState& state, double omega);

/// sup over a grid of | d/dt phi^{s,s} - (eps'/2eps)(s phi^{s-1,s-1} - (s+1) phi^{s+1,s+1}) |,
/// relative to the largest term, with a central difference of step `step`.
double basis_derivative_check(const ModeIndex& k, double t, double hbar, const Potential& spec,
                              int s, double step = 1e-6);

struct GridParameters {
  int points = 2048;
  double extent_sigmas = 10.0;   ///< half-width of the grid in units of the widest standard deviation
  double dt_factor = 1e-3;       ///< time step = dt_factor / omega_max
};

struct GridOverlaps {
  std::vector<cx> one_variable;  ///< <h_n | psi>, n = 0..2 s_max
  std::vector<cx> diagonal;      ///< <phi^{s,s} | Psi>, s = 0..s_max
  double norm_drift = 0.0;       ///< | ||psi|| - 1 | at the end
  double dx = 0.0;
  int steps = 0;
};

/// Crank-Nicolson evolution of i hbar psi_t = (-hbar^2/2) psi'' + omega^2 Q^2 psi / 2 - (eps/2) psi
/// with a fourth-order finite-difference Laplacian. Throws NumericalError if the norm drifts
/// by more than 1e-8 per unit time.
GridOverlaps grid_evolve_mode(const ModeIndex& k, double hbar, const Potential& spec, double t_end,
                              const GridParameters& grid = {}, int s_max = 3);

/// Norm of the difference between the evolved state and the truncated semiclassical
/// state sum_{s+j<=3} hbar^{s+j} A^j_s phi^{s,s}; computed exactly from the ladder overlaps.
double semiclassical_residual_norm(const LadderOverlaps& exact, const CoeffSet& coeffs, double hbar);

struct ResidualCalibration {
  double constant = 0.0;    ///< safety * max ratio
  double max_ratio = 0.0;   ///< max residual_norm * eps0^4 / hbar^3
  int samples = 0;
};

/// Calibrates the residual constant c in residual_bound = c hbar^3 / eps0^4 against the
/// oracle on the given sample (all combinations of modes and hbar, times `times`).
ResidualCalibration calibrate_residual_constant(const Potential& spec, std::span<const ModeIndex> modes,
                                                std::span<const double> hbars,
                                                std::span<const double> times, double safety = 4.0);

}  // namespace kgvac
