#pragma once

// Per-mode dispersion and the semiclassical coefficient recurrences
//   T_hbar phi^{0,0}(0) ~ sum_{s+j<=3} hbar^{s+j} A^j_s(t) phi^{s,s}(t).

#include <array>
#include <complex>
#include <compare>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "kgvac/jet.hpp"
#include "kgvac/potential.hpp"

namespace kgvac {

using cx = std::complex<double>;

/// Integer Fourier label k in Z^dim (dim <= 3).
struct ModeIndex {
  std::array<int, 3> k{};
  int dim = 1;

  ModeIndex() = default;
  ModeIndex(std::initializer_list<int> values);
  static ModeIndex from_span(std::span<const int> values);

  int operator[](int i) const { return k[i]; }
  long long norm2() const;
  /// hbar * k, padded with zeros to length 3.
  std::array<double, 3> momentum(double hbar) const;
  std::string to_string() const;

  bool operator==(const ModeIndex&) const = default;
};

/// Deterministic lattice order: |k|^2 first, then lexicographic.
bool mode_less(const ModeIndex& a, const ModeIndex& b);

struct Dispersion {
  double eps = 1.0;       ///< sqrt(|hbar k + f(t)|^2 + 1)
  double eps_dot = 0.0;   ///< <hbar k + f, f'> / eps
  double eps_ddot = 0.0;
  double omega = 1.0;     ///< eps / hbar
  double eps0 = 1.0;      ///< static value sqrt(|hbar k|^2 + 1)
};

Dispersion dispersion(const ModeIndex& k, double t, double hbar, const Potential& spec);

/// Taylor jet of eps(t) at t for momentum x = hbar k.
Jet<double, 3> epsilon_jet(const Potential& spec, std::span<const double, 3> x, double t);
/// Same, from a precomputed profile jet b(t).
Jet<double, 3> epsilon_jet(std::span<const double> amplitude, const Jet<double, 3>& profile,
                           std::span<const double, 3> x);

/// The ten coefficients A^j_s, s + j <= 3.
struct CoeffSet {
  std::array<std::array<cx, 4>, 4> a{};  // a[s][j]

  cx operator()(int s, int j) const { return a[s][j]; }
  cx& operator()(int s, int j) { return a[s][j]; }
};

/// Coefficients A^j_s sampled on an adaptive time grid. The three integrated
/// coefficients A^1_0, A^2_0, A^3_0 are stored with their exact time
/// derivatives and interpolated by cubic Hermite; the algebraic ones are
/// recomputed from the recurrences at the query time.
class CoeffTable {
 public:
  const ModeIndex& mode() const { return mode_; }
  double hbar() const { return hbar_; }
  double t_end() const { return t_end_; }
  std::span<const double> time_grid() const { return nodes_; }
  /// Sum of accepted Simpson error estimates (max over the three integrals).
  double error_estimate() const { return error_estimate_; }

  CoeffSet at(double t) const;

 private:
  friend CoeffTable coeff_table(const ModeIndex&, double, const Potential&, double, double);

  std::array<cx, 3> integrals_at(double t) const;

  const Potential* spec_ = nullptr;
  ModeIndex mode_;
  double hbar_ = 1.0;
  double t_end_ = 0.0;
  double t_start_ = 0.0;
  std::array<double, 3> x_{};
  std::vector<double> nodes_;
  std::vector<std::array<cx, 3>> values_;
  std::vector<std::array<cx, 3>> slopes_;
  double error_estimate_ = 0.0;
};

/// Build the coefficient table on [0, t_end]. The potential must outlive the table.
/// Throws QuadratureError if the adaptive Simpson refinement cannot reach `tol`.
CoeffTable coeff_table(const ModeIndex& k, double hbar, const Potential& spec, double t_end,
                       double tol = 1e-10);

/// Algebraic part of the recurrence at one time, given the integrated
/// coefficients (A^1_0, A^2_0, A^3_0). Used by the table and by tests.
CoeffSet coefficients_from_integrals(const Jet<double, 3>& eps, const std::array<cx, 3>& integrals);

/// sum_{j<=3} hbar^j A^j_0(t).
cx survival_amplitude(const CoeffTable& table, double t, double hbar);
/// hbar A^0_1 + hbar^2 A^1_1 + hbar^3 A^2_1; leading term -i hbar eps'/(4 eps^2).
cx pair_amplitude(const CoeffTable& table, double t, double hbar);
/// 1 - hbar^2 eps'^2 / (16 eps^4).
double amplitude_square_expansion(const ModeIndex& k, double t, double hbar, const Potential& spec);

struct ModeAmplitudes {
  cx survive{1.0, 0.0};
  cx pair{0.0, 0.0};
  double q = 1.0;  ///< |survive|^2
  double p = 0.0;  ///< |pair|^2
  double residual_bound = 0.0;
};

/// Residual bound model: c * hbar^3 / eps0^4.
double residual_bound(double residual_constant, double hbar, double eps0);

ModeAmplitudes mode_amplitudes(const CoeffTable& table, double t, double hbar,
                               double residual_constant);

/// Evaluates the truncated amplitudes of many modes at a single time on one
/// shared quadrature grid. The grid is refined until a set of probe modes
/// (those whose momentum crosses -f during the pulse, where eps varies fastest)
/// meet the relative tolerance; the profile jets at the nodes are cached.
class FixedTimeEvaluator {
 public:
  FixedTimeEvaluator(const Potential& spec, double t, double rel_tol = 1e-9);

  double time() const { return t_; }
  std::size_t panel_count() const { return panel_edges_.size() - 1; }

  ModeAmplitudes evaluate(const ModeIndex& k, double hbar, double residual_constant = 0.0) const;
  ModeAmplitudes evaluate_momentum(std::span<const double, 3> x, double hbar,
                                   double residual_constant = 0.0) const;
  /// The integrated coefficients (A^1_0, A^2_0, A^3_0) at the evaluation time.
  std::array<cx, 3> integrals(std::span<const double, 3> x) const;

 private:
  struct PanelSums {
    double i1 = 0.0, i3 = 0.0, err1 = 0.0, err3 = 0.0, mag1 = 0.0, mag3 = 0.0;
  };
  PanelSums integrate_panel(std::size_t panel, std::span<const double, 3> x, double i1_start) const;

  const Potential* spec_;
  double t_;
  double t_stop_;
  std::vector<double> panel_edges_;
  std::vector<std::array<Jet<double, 3>, 5>> jets_;  // profile jets at the five panel nodes
  Jet<double, 3> jet_at_t_;
};

}  // namespace kgvac
