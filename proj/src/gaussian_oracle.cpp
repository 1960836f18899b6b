#include "kgvac/gaussian_oracle.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <string>

#include "kgvac/error.hpp"

namespace kgvac {

namespace {

using OdeState = std::array<double, 6>;  // Re u, Im u, Re u', Im u', phase, arg u

double omega_at(const Potential& spec, std::span<const double, 3> x, double hbar, double t) {
  const double b = spec.profile(t);
  const auto a = spec.amplitude();
  double s = 1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double y = x[i] + (i < a.size() ? a[i] * b : 0.0);
    s += y * y;
  }
  return std::sqrt(s) / hbar;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

GaussianModeState finish(GaussianModeState st) {
  st.width = st.hbar * cx(0.0, -1.0) * std::conj(st.udot / st.u);
  return st;
}

}  // namespace

// ---------------------------------------------------------------- mode ODE

GaussianModeState evolve_momentum(std::span<const double, 3> x, double hbar, const Potential& spec,
                                  double t_end, double tol) {
  if (!(hbar > 0.0)) throw InvalidArgument("evolve_mode: hbar must be positive");
  if (!(tol > 1e-13 && tol < 1e-6)) throw InvalidArgument("evolve_mode: tol must lie in (1e-13, 1e-6)");
  if (!(t_end >= 0.0)) throw InvalidArgument("evolve_mode: t_end must be nonnegative");

  const double w0 = omega_at(spec, x, hbar, 0.0);
  // Before the support the vacuum is an exact plane wave.
  const double tau0 = std::min(std::max(0.0, spec.support_begin()), t_end);
  OdeState y{std::cos(w0 * tau0), -std::sin(w0 * tau0), 0.0, 0.0, w0 * tau0, -w0 * tau0};
  y[2] = w0 * y[1];
  y[3] = -w0 * y[0];

  GaussianModeState st;
  st.hbar = hbar;
  st.omega0 = w0;

  if (t_end > tau0 && !spec.is_zero()) {
    auto rhs = [&](const OdeState& s, OdeState& d, double t) {
      const double w = omega_at(spec, x, hbar, t);
      d[0] = s[2];
      d[1] = s[3];
      d[2] = -w * w * s[0];
      d[3] = -w * w * s[1];
      d[4] = w;
      const double n2 = s[0] * s[0] + s[1] * s[1];
      d[5] = (s[0] * s[3] - s[1] * s[2]) / n2;  // Im(u'/u)
    };
    double drift = 0.0;
    auto observe = [&](const OdeState& s, double t) {
      const double W = s[0] * s[3] - s[1] * s[2];
      drift = std::max(drift, std::abs(W + w0) / w0);
      if (drift > 1e-6)
        throw NumericalError("evolve_mode: Wronskian drift " + std::to_string(drift) + " at t = " +
                             std::to_string(t));
    };
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_fehlberg78<OdeState>());
    const double dt0 = std::min(t_end - tau0, 0.05 / std::max(w0, 1.0));
    try {
      ode::integrate_adaptive(stepper, rhs, y, tau0, t_end, dt0, observe);
    } catch (const NumericalError&) {
      throw;
    } catch (const std::exception& e) {
      throw NumericalError(std::string("evolve_mode: integrator failure: ") + e.what());
    }
    st.norm_check = drift;
  } else if (t_end > tau0) {
    y = {std::cos(w0 * t_end), -std::sin(w0 * t_end), 0.0, 0.0, w0 * t_end, -w0 * t_end};
    y[2] = w0 * y[1];
    y[3] = -w0 * y[0];
  }
  st.t = t_end;
  st.u = {y[0], y[1]};
  st.udot = {y[2], y[3]};
  st.phase = y[4];
  st.arg_u = y[5];
  st = finish(st);
  if (!(st.width.real() > 0.0)) throw NumericalError("evolve_mode: width lost normalizability");
  return st;
}

GaussianModeState evolve_mode(const ModeIndex& k, double hbar, const Potential& spec, double t_end,
                              double tol) {
  if (k.dim != spec.dim()) throw InvalidArgument("evolve_mode: mode dimension mismatch");
  const auto x = k.momentum(hbar);
  return evolve_momentum(x, hbar, spec, t_end, tol);
}

cx gaussian_wavefunction(const GaussianModeState& st, double Q) {
  const double mag = std::pow(st.omega0 / (M_PI * st.hbar), 0.25) / std::sqrt(std::abs(st.u));
  const cx phase = std::polar(1.0, 0.5 * (st.arg_u + st.phase));
  return mag * phase * std::exp(-st.width * Q * Q / (2.0 * st.hbar * st.hbar));
}

// ---------------------------------------------------------------- basis

std::vector<cx> InstantaneousBasis::product_coefficients(int s, int r) {
  const int N = s + r;
  std::vector<cx> c(N + 1, cx(0.0));
  const cx mi(0.0, -1.0), pi(0.0, 1.0);
  const double norm = std::pow(2.0, 0.5 * N) * std::sqrt(factorial(s) * factorial(r));
  for (int a = 0; a <= s; ++a)
    for (int b = 0; b <= r; ++b) {
      const int n1 = a + b;
      c[n1] += binomial(s, a) * binomial(r, b) * std::pow(mi, s - a) * std::pow(pi, r - b) *
               std::sqrt(factorial(n1) * factorial(N - n1)) / norm;
    }
  return c;
}

InstantaneousBasis::InstantaneousBasis(double omega, double hbar, int s_max)
    : omega_(omega), hbar_(hbar), s_max_(s_max) {
  if (!(omega > 0.0) || !(hbar > 0.0)) throw InvalidArgument("InstantaneousBasis: omega and hbar must be positive");
  if (s_max < 0 || s_max > 8) throw InvalidArgument("InstantaneousBasis: s_max must lie in [0, 8]");

  // One-variable Gram matrix by the trapezoid rule, then the pair states through
  // their product expansion.
  const int nmax = 2 * s_max;
  const double sigma = std::sqrt(hbar / omega);
  const double L = 14.0 * sigma;
  const int M = 801;
  const double dx = 2.0 * L / (M - 1);
  std::vector<std::vector<double>> G(nmax + 1, std::vector<double>(nmax + 1, 0.0));
  for (int i = 0; i < M; ++i) {
    const auto h = hermite(nmax, -L + i * dx);
    for (int n = 0; n <= nmax; ++n)
      for (int m = 0; m <= nmax; ++m) G[n][m] += h[n] * h[m] * dx;
  }
  std::vector<std::vector<cx>> coeffs;
  std::vector<int> order;
  for (int s = 0; s <= s_max; ++s)
    for (int r = 0; r <= s_max; ++r) {
      coeffs.push_back(product_coefficients(s, r));
      order.push_back(s + r);
    }
  for (std::size_t a = 0; a < coeffs.size(); ++a)
    for (std::size_t b = 0; b < coeffs.size(); ++b) {
      cx g = 0.0;
      for (int n = 0; n <= order[a]; ++n)
        for (int m = 0; m <= order[b]; ++m)
          g += std::conj(coeffs[a][n]) * coeffs[b][m] * G[n][m] * G[order[a] - n][order[b] - m];
      gram_error_ = std::max(gram_error_, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  if (gram_error_ > 1e-10)
    throw NumericalError("InstantaneousBasis: orthonormality check failed (" + std::to_string(gram_error_) + ")");
}

InstantaneousBasis InstantaneousBasis::at(const ModeIndex& k, double t, double hbar,
                                          const Potential& spec, int s_max) {
  return InstantaneousBasis(dispersion(k, t, hbar, spec).omega, hbar, s_max);
}

std::vector<double> InstantaneousBasis::hermite(int n, double Q) const {
  std::vector<double> h(n + 1);
  const double xi = Q * std::sqrt(omega_ / hbar_);
  h[0] = std::pow(omega_ / (M_PI * hbar_), 0.25) * std::exp(-0.5 * xi * xi);
  if (n >= 1) h[1] = std::sqrt(2.0) * xi * h[0];
  for (int m = 1; m < n; ++m)
    h[m + 1] = std::sqrt(2.0 / (m + 1)) * xi * h[m] - std::sqrt(double(m) / (m + 1)) * h[m - 1];
  return h;
}

cx InstantaneousBasis::pair_state(int s, int r, double Q, double Qbar) const {
  const int N = s + r;
  const auto c = product_coefficients(s, r);
  const auto h1 = hermite(N, Q);
  const auto h2 = hermite(N, Qbar);
  cx v = 0.0;
  for (int n = 0; n <= N; ++n) v += c[n] * h1[n] * h2[N - n];
  return v;
}

// ---------------------------------------------------------------- overlaps

namespace {

// c0 = <h_0 | psi> and z = (omega - alpha)/(omega + alpha).
std::pair<cx, cx> ground_overlap(const GaussianModeState& st, double omega) {
  const cx alpha = st.width / st.hbar;
  if (!(alpha.real() > 0.0)) throw NumericalError("overlap: non-normalizable width");
  const cx sum = omega + alpha;
  const double mag = std::sqrt(2.0) * std::pow(omega * st.omega0, 0.25) /
                     std::sqrt(std::abs(st.u) * std::abs(sum));
  const double ph = 0.5 * (st.phase + st.arg_u - std::arg(sum));
  return {std::polar(mag, ph), (omega - alpha) / sum};
}

}  // namespace

std::vector<cx> one_variable_overlaps(const GaussianModeState& state, const InstantaneousBasis& basis,
                                      int n_max) {
  auto [c0, z] = ground_overlap(state, basis.omega());
  std::vector<cx> g(n_max + 1, cx(0.0));
  cx term = c0;  // c0 (z/2)^m sqrt((2m)!) / m!
  for (int m = 0; 2 * m <= n_max; ++m) {
    g[2 * m] = term * std::sqrt(factorial(2 * m)) / factorial(m);
    term *= 0.5 * z;
  }
  return g;
}

cx overlap_basis_mixed(const GaussianModeState& state, const InstantaneousBasis& basis, int s, int r) {
  if (s < 0 || r < 0 || s > basis.s_max() || r > basis.s_max())
    throw InvalidArgument("overlap_basis: index exceeds s_max");
  const int N = s + r;
  const auto g = one_variable_overlaps(state, basis, N);
  const auto c = InstantaneousBasis::product_coefficients(s, r);
  cx v = 0.0;
  for (int n = 0; n <= N; ++n) v += std::conj(c[n]) * g[n] * g[N - n];
  return v;
}

cx overlap_basis(const GaussianModeState& state, const InstantaneousBasis& basis, int s) {
  return overlap_basis_mixed(state, basis, s, s);
}

LadderOverlaps ladder_overlaps(const GaussianModeState& state, double omega) {
  auto [c0, z] = ground_overlap(state, omega);
  return {c0 * c0, z};
}

double LadderOverlaps::tail_weight(int s_max) const {
  const double z2 = std::norm(z);
  return std::norm(c0sq) * std::pow(z2, s_max + 1) / (1.0 - z2);
}

// ---------------------------------------------------------------- derivative lemma

double basis_derivative_check(const ModeIndex& k, double t, double hbar, const Potential& spec, int s,
                              double step) {
  if (s < 1 || s > 2) throw InvalidArgument("basis_derivative_check: s must be 1 or 2");
  const auto d = dispersion(k, t, hbar, spec);
  const InstantaneousBasis b0(d.omega, hbar, s + 1);
  const InstantaneousBasis bp = InstantaneousBasis::at(k, t + step, hbar, spec, s + 1);
  const InstantaneousBasis bm = InstantaneousBasis::at(k, t - step, hbar, spec, s + 1);
  const double ratio = d.eps_dot / (2.0 * d.eps);
  const double sigma = std::sqrt(hbar / d.omega);
  const int M = 41;
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double Q = -5.0 * sigma + 10.0 * sigma * i / (M - 1);
      const double Qb = -5.0 * sigma + 10.0 * sigma * j / (M - 1);
      const cx lhs = (bp.pair_state(s, s, Q, Qb) - bm.pair_state(s, s, Q, Qb)) / (2.0 * step);
      const cx down = ratio * double(s) * b0.pair_state(s - 1, s - 1, Q, Qb);
      const cx up = ratio * double(s + 1) * b0.pair_state(s + 1, s + 1, Q, Qb);
      worst = std::max(worst, std::abs(lhs - (down - up)));
      scale = std::max({scale, std::abs(lhs), std::abs(down), std::abs(up)});
    }
  return scale > 0.0 ? worst / scale : worst;
}

// ---------------------------------------------------------------- residual and calibration

double semiclassical_residual_norm(const LadderOverlaps& exact, const CoeffSet& A, double hbar) {
  double sum = exact.tail_weight(3);
  cx o = exact.c0sq;
  for (int s = 0; s <= 3; ++s) {
    cx approx = 0.0;
    for (int j = 3 - s; j >= 0; --j) approx = approx * hbar + A(s, j);
    approx *= std::pow(hbar, s);
    sum += std::norm(o - approx);
    o *= exact.z;
  }
  return std::sqrt(sum);
}

ResidualCalibration calibrate_residual_constant(const Potential& spec, std::span<const ModeIndex> modes,
                                                std::span<const double> hbars,
                                                std::span<const double> times, double safety) {
  ResidualCalibration cal;
  if (times.empty()) return cal;
  const double t_max = *std::max_element(times.begin(), times.end());
  for (double hb : hbars)
    for (const auto& k : modes) {
      const auto tab = coeff_table(k, hb, spec, t_max);
      const auto x = k.momentum(hb);
      const double e0 = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + 1.0);
      for (double t : times) {
        const auto st = evolve_mode(k, hb, spec, t);
        const auto lad = ladder_overlaps(st, dispersion(k, t, hb, spec).omega);
        const double r = semiclassical_residual_norm(lad, tab.at(t), hb);
        cal.max_ratio = std::max(cal.max_ratio, r * std::pow(e0, 4) / std::pow(hb, 3));
        ++cal.samples;
      }
    }
  cal.constant = safety * cal.max_ratio;
  return cal;
}

}  // namespace kgvac
