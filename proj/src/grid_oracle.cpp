#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kgvac/error.hpp"
#include "kgvac/gaussian_oracle.hpp"

namespace kgvac {

namespace {

// Banded Crank-Nicolson propagator for the one-variable problem on a uniform grid.
class CrankNicolson {
 public:
  CrankNicolson(int n, double dx, double L, double hbar, double dt)
      : n_(n), dx_(dx), L_(L), hbar_(hbar), dt_(dt), lu_(kLdab * n), ipiv_(n) {}

  void step(std::vector<cx>& psi, double omega) {
    if (omega != factored_omega_) factor(omega);
    // rhs = (1 - i dt H / 2 hbar) psi
    rhs_.resize(n_);
    const cx k(0.0, -0.5 * dt_ / hbar_);
    const double off1 = -0.5 * hbar_ * hbar_ * 16.0 / (12.0 * dx_ * dx_);
    const double off2 = -0.5 * hbar_ * hbar_ * -1.0 / (12.0 * dx_ * dx_);
    for (int j = 0; j < n_; ++j) {
      cx acc = diag(j, omega) * psi[j];
      if (j >= 1) acc += off1 * psi[j - 1];
      if (j >= 2) acc += off2 * psi[j - 2];
      if (j + 1 < n_) acc += off1 * psi[j + 1];
      if (j + 2 < n_) acc += off2 * psi[j + 2];
      rhs_[j] = psi[j] + k * acc;
    }
    const lapack_int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n_, 2, 2, 1, lu_.data(), kLdab,
                                           ipiv_.data(), rhs_.data(), n_);
    if (info != 0) throw NumericalError("grid_evolve_mode: banded solve failed");
    psi.swap(rhs_);
  }

  double x(int j) const { return -L_ + j * dx_; }

 private:
  static constexpr int kLdab = 7;  // 2 kl + ku + 1 with kl = ku = 2

  double diag(int j, double omega) const {
    const double q = x(j);
    return -0.5 * hbar_ * hbar_ * -30.0 / (12.0 * dx_ * dx_) + 0.5 * omega * omega * q * q -
           0.5 * hbar_ * omega;
  }

  cx h_entry(int i, int j, double omega) const {
    static constexpr double w[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
    const double lap = w[j - i + 2] / (12.0 * dx_ * dx_);
    double v = -0.5 * hbar_ * hbar_ * lap;
    if (i == j) {
      const double q = x(i);
      v += 0.5 * omega * omega * q * q - 0.5 * hbar_ * omega;
    }
    return v;
  }

  void factor(double omega) {
    std::fill(lu_.begin(), lu_.end(), cx(0.0));
    const double k = 0.5 * dt_ / hbar_;
    for (int j = 0; j < n_; ++j)
      for (int i = std::max(0, j - 2); i <= std::min(n_ - 1, j + 2); ++i) {
        cx a = cx(0.0, k) * h_entry(i, j, omega);
        if (i == j) a += 1.0;
        lu_[kLdab * j + (4 + i - j)] = a;
      }
    const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, 2, 2, lu_.data(), kLdab, ipiv_.data());
    if (info != 0) throw NumericalError("grid_evolve_mode: banded factorization failed");
    factored_omega_ = omega;
  }

  int n_;
  double dx_, L_, hbar_, dt_;
  std::vector<cx> lu_, rhs_;
  std::vector<lapack_int> ipiv_;
  double factored_omega_ = -1.0;
};

}  // namespace

GridOverlaps grid_evolve_mode(const ModeIndex& k, double hbar, const Potential& spec, double t_end,
                              const GridParameters& grid, int s_max) {
  if (grid.points < 64) throw InvalidArgument("grid_evolve_mode: need at least 64 grid points");
  if (!(t_end >= 0.0)) throw InvalidArgument("grid_evolve_mode: t_end must be nonnegative");

  const double t0 = std::min(std::max(0.0, spec.support_begin()), t_end);
  // Frequency range and the widest Gaussian along the path.
  double w_min = 1e300, w_max = 0.0, re_alpha_min = 1e300;
  constexpr int kProbe = 64;
  for (int i = 0; i <= kProbe; ++i) {
    const double t = t0 + (t_end - t0) * i / kProbe;
    const double w = dispersion(k, t, hbar, spec).omega;
    w_min = std::min(w_min, w);
    w_max = std::max(w_max, w);
    const auto st = evolve_mode(k, hbar, spec, t);
    re_alpha_min = std::min(re_alpha_min, st.width.real() / hbar);
  }
  const double sigma = std::max(std::sqrt(hbar / (2.0 * w_min)), std::sqrt(hbar / (2.0 * re_alpha_min)));
  const double L = grid.extent_sigmas * sigma;
  const int n = grid.points;
  const double dx = 2.0 * L / (n - 1);

  const double span = t_end - t0;
  const int steps = span > 0.0 ? std::max(1, int(std::ceil(span * w_max / grid.dt_factor))) : 0;
  const double dt = steps > 0 ? span / steps : 0.0;

  // Initial state: the instantaneous ground state at t0 (the exact evolution is stationary before).
  const InstantaneousBasis b0 = InstantaneousBasis::at(k, t0, hbar, spec, s_max);
  CrankNicolson cn(n, dx, L, hbar, dt);
  std::vector<cx> psi(n);
  double norm0 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double v = b0.hermite(0, cn.x(j))[0];
    psi[j] = {v, 0.0};
    norm0 += v * v * dx;
  }
  for (int s = 0; s < steps; ++s) {
    const double tm = t0 + (s + 0.5) * dt;
    cn.step(psi, dispersion(k, tm, hbar, spec).omega);
  }

  GridOverlaps out;
  out.dx = dx;
  out.steps = steps;
  double norm = 0.0;
  for (const auto& v : psi) norm += std::norm(v) * dx;
  out.norm_drift = std::abs(std::sqrt(norm) - std::sqrt(norm0));
  if (out.norm_drift > 1e-8 * std::max(1.0, span))
    throw NumericalError("grid_evolve_mode: norm drift " + std::to_string(out.norm_drift));

  const InstantaneousBasis b1 = InstantaneousBasis::at(k, t_end, hbar, spec, s_max);
  const int nmax = 2 * s_max;
  out.one_variable.assign(nmax + 1, cx(0.0));
  for (int j = 0; j < n; ++j) {
    const auto h = b1.hermite(nmax, cn.x(j));
    const cx v = psi[j];
    for (int m = 0; m <= nmax; ++m) out.one_variable[m] += h[m] * v * dx;
  }
  for (int s = 0; s <= s_max; ++s) {
    const auto c = InstantaneousBasis::product_coefficients(s, s);
    cx v = 0.0;
    for (int m = 0; m <= 2 * s; ++m) v += std::conj(c[m]) * out.one_variable[m] * out.one_variable[2 * s - m];
    out.diagonal.push_back(v);
  }
  return out;
}

}  // namespace kgvac
