#pragma once

// Truncation of the Fourier lattice and aggregation of per-mode amplitudes into
// vacuum persistence and pair-number distributions.

#include <span>
#include <utility>
#include <vector>

#include "kgvac/mode_core.hpp"
#include "kgvac/potential.hpp"

namespace kgvac {

struct ModeSet {
  int dim = 1;
  double hbar = 1.0;
  std::vector<ModeIndex> modes;  ///< every k with |hbar k| <= cutoff_radius, sorted by mode_less
  double cutoff_radius = 0.0;    ///< in hbar k units
  double tail_log_mass = 0.0;    ///< bound on sum over excluded k of |log q_k|
};

struct ModeSetOptions {
  double cutoff_override = 0.0;     ///< > 0: use this radius instead of solving for tail_tol
  std::size_t max_modes = 30000000; ///< memory guard
  double safety = 2.0;              ///< multiplier on the leading-order per-mode decay
};

/// Continuum bound on the excluded log-mass for cutoff R:
///   safety * hbar^{2-n} |f'|^2/16 * int_{|y| > R - hbar sqrt(n)/2} d^n y / (((|y| - hbar sqrt n) - |f|)_+^2 + 1)^2.
double tail_log_mass(int dim, double hbar, const Potential& spec, double R, double safety = 2.0);

/// Per-mode version of the same decay model: safety * hbar^2 |f'|^2 / (16 ((|x| - |f|)_+^2 + 1)^2).
double tail_mode_bound(double x_norm, double hbar, const Potential& spec, double safety = 2.0);
/// Same two quantities from precomputed sup norms.
double tail_mode_bound(double x_norm, double hbar, const SupNorms& norms, double safety = 2.0);
double tail_log_mass(int dim, double hbar, const SupNorms& norms, double R, double safety = 2.0);

/// Throws InvalidArgument for tail_tol outside (1e-12, 1e-2] (unless a cutoff override is given)
/// and when the set would exceed max_modes.
ModeSet build_mode_set(int dim, double hbar, const Potential& spec, double tail_tol,
                       const ModeSetOptions& options = {});

struct PairDistribution {
  double t = 0.0;
  double hbar = 1.0;
  double p0 = 1.0;
  std::vector<double> pn;  ///< P^1 .. P^{n_max}
  double tail_error = 0.0;
  int n_max = 6;
  double log_p0 = 0.0;
};

/// (prod q_k, width of the tail-induced uncertainty interval). Throws NumericalError for q <= 0.
std::pair<double, double> vacuum_persistence(std::span<const std::pair<ModeIndex, double>> mode_q,
                                             double tail_log_mass);

/// P^0 .. P^{n_max} from per-mode (p, q), via elementary symmetric polynomials of r = p/q.
PairDistribution pair_distribution(std::span<const std::pair<double, double>> mode_pq, int n_max,
                                   double tail_log_mass);

/// The explicit one-pair sum  sum_k p_k prod_{l != k} q_l.
double pair_one_explicit(std::span<const std::pair<double, double>> mode_pq);

/// Checks (sum f)^n - sum_{distinct ordered} f_k1..f_kn <= n(n-1)/2 (sum f)^{n-2} sum f^2
/// by enumeration (a relative slack of 1e-12 absorbs rounding in equality cases).
bool product_sum_inequality_check(std::span<const double> f, int n);

enum class AmplitudeSource { semiclassical, oracle };

/// Per-mode amplitudes over a mode set at time t. Modes with the same
/// (<hbar k, a>, |hbar k|^2) share dispersion and are evaluated once.
/// Output order follows set.modes. Work is split over `threads` workers.
std::vector<ModeAmplitudes> lattice_amplitudes(const ModeSet& set, const Potential& spec, double t,
                                               AmplitudeSource source, double residual_constant = 0.0,
                                               int threads = 1, double quad_tol = 1e-9, double ode_tol = 1e-11);

/// Convenience: amplitudes and distribution in one call.
PairDistribution lattice_distribution(const ModeSet& set, const Potential& spec, double t,
                                      AmplitudeSource source, int n_max = 6, int threads = 1,
                                      double quad_tol = 1e-9, double ode_tol = 1e-11);

}  // namespace kgvac
