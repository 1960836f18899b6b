#include "kgvac/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kgvac/error.hpp"

namespace kgvac {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

template <class F>
double gk_line(F&& f, double tol = 1e-11) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -kInf, kInf, 15, tol);
}

void require_hbar(double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive and finite");
}

long long explicit_terms(double hbar) {
  return std::max<long long>(50, static_cast<long long>(std::ceil(100.0 / hbar)));
}

}  // namespace

double riemann_explicit_radius(double hbar) {
  require_hbar(hbar);
  return hbar * static_cast<double>(explicit_terms(hbar));
}

double riemann_check_1d(double hbar) {
  require_hbar(hbar);
  const long long K = explicit_terms(hbar);
  auto g = [hbar](double k) { return hbar / (hbar * hbar * k * k + 1.0); };
  // Sum from the small terms inwards.
  double sum = 0.0;
  for (long long k = K; k >= 1; --k) sum += 2.0 * g(static_cast<double>(k));
  sum += g(0.0);
  const double u = hbar * K;
  const double w = u * u + 1.0;
  const double integral = kPi / 2.0 - std::atan(u);
  const double d1 = hbar * hbar * (-2.0 * u / (w * w));
  const double d3 = std::pow(hbar, 4) * (-24.0 * u * (u * u - 1.0) / (w * w * w * w));
  const double tail = integral - g(static_cast<double>(K)) / 2.0 - d1 / 12.0 + d3 / 720.0;
  return sum + 2.0 * tail;
}

double riemann_check_2d(double hbar) {
  require_hbar(hbar);
  const long long K = explicit_terms(hbar);
  // sum_{m in Z} 1/(m^2 + c^2)^2 = pi/(2c^3) coth(pi c) + pi^2/(2c^2) csch^2(pi c)
  auto row = [hbar](double k1) {
    const double b2 = 1.0 + hbar * hbar * k1 * k1;
    const double c = std::sqrt(b2) / hbar;
    const double x = kPi * c;
    const double coth = 1.0 / std::tanh(x);
    const double csch = x > 350.0 ? 0.0 : 1.0 / std::sinh(x);
    const double inner = kPi / (2.0 * c * c * c) * coth + kPi * kPi / (2.0 * c * c) * csch * csch;
    return inner / (hbar * hbar);
  };
  double sum = 0.0;
  for (long long k = K; k >= 1; --k) sum += 2.0 * row(static_cast<double>(k));
  sum += row(0.0);
  // Beyond K the rows equal pi hbar / (2 (1 + (hbar k)^2)^{3/2}) up to e^{-2 pi K}.
  const double u = hbar * K;
  const double w = 1.0 + u * u;
  const double integral = kPi / 2.0 * (1.0 - u / std::sqrt(w));
  const double G = kPi * hbar / (2.0 * std::pow(w, 1.5));
  const double dG = kPi * hbar * hbar / 2.0 * (-3.0 * u) * std::pow(w, -2.5);
  const double tail = integral - G / 2.0 - dG / 12.0;
  return sum + 2.0 * tail;
}

double riemann_integral_2d() {
  return gk_line([](double x) {
    return gk_line([x](double y) {
      const double d = x * x + y * y + 1.0;
      return 1.0 / (d * d);
    });
  });
}

double lambda_intensity(int dim, std::span<const double> fdot) {
  if (dim != 2 && dim != 3) throw InvalidArgument("lambda is defined for dimensions 2 and 3");
  if (static_cast<int>(fdot.size()) != dim) throw InvalidArgument("fdot has the wrong dimension");
  double n2 = 0.0;
  for (double v : fdot) n2 += v * v;
  if (n2 == 0.0) return 0.0;
  if (dim == 2) {
    const double a = fdot[0], b = fdot[1];
    return gk_line([&](double x) {
             return gk_line([&](double y) {
               const double d = x * x + y * y + 1.0;
               const double s = a * x + b * y;
               return s * s / (d * d * d);
             });
           }) /
           16.0;
  }
  const double a = fdot[0], b = fdot[1], c = fdot[2];
  return gk_line(
             [&](double x) {
               return gk_line(
                   [&](double y) {
                     return gk_line(
                         [&](double z) {
                           const double d = x * x + y * y + z * z + 1.0;
                           const double s = a * x + b * y + c * z;
                           return s * s / (d * d * d);
                         },
                         1e-10);
                   },
                   1e-10);
             },
             1e-10) /
         16.0;
}

double lambda_radial_constant(int dim) {
  if (dim != 2 && dim != 3) throw InvalidArgument("lambda is defined for dimensions 2 and 3");
  boost::math::quadrature::exp_sinh<double> integrator;
  const double radial = integrator.integrate(
      [dim](double r) {
        if (r > 1e60) return 0.0;
        const double d = r * r + 1.0;
        return std::pow(r, dim + 1) / (d * d * d);
      },
      0.0, kInf);
  const double area = dim == 2 ? 2.0 * kPi : 4.0 * kPi;
  return area / dim * radial;
}

bool fdot_vanishes(const Potential& spec, double t) {
  if (spec.is_zero()) return true;
  const auto fd = eval_potential_deriv(spec, t);
  double n2 = 0.0;
  for (double v : fd) n2 += v * v;
  return std::sqrt(n2) < 1e-12 * sup_norms(spec).fdot;
}

double lambda_at(const Potential& spec, double t) {
  if (spec.dim() == 1 || fdot_vanishes(spec, t)) return 0.0;
  const auto fd = eval_potential_deriv(spec, t);
  return lambda_intensity(spec.dim(), fd);
}

double poisson_law(double lambda, int n) {
  if (n < 0) throw InvalidArgument("n must be non-negative");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(lambda) - lambda - std::lgamma(n + 1.0));
}

Extrapolation richardson(std::span<const double> h, std::span<const double> values, double fallback_order) {
  if (h.size() != values.size() || h.size() < 2) throw InvalidArgument("need at least two points");
  const std::size_t n = h.size();
  Extrapolation out;
  const double v3 = values[n - 1], v2 = values[n - 2];
  const double rho = h[n - 2] / h[n - 1];
  if (!(rho > 1.0)) throw InvalidArgument("h must be decreasing");
  double order = fallback_order;
  if (n >= 3) {
    const double v1 = values[n - 3];
    const double rho1 = h[n - 3] / h[n - 2];
    const double d12 = v2 - v1, d23 = v3 - v2;
    if (std::abs(rho1 - rho) < 1e-9 * rho && d12 != 0.0 && d23 != 0.0 && d12 * d23 > 0.0) {
      const double fitted = std::log(d12 / d23) / std::log(rho);
      if (fitted >= 0.5 && fitted <= 8.0) {
        order = fitted;
        out.order_fitted = true;
      }
    }
  }
  out.order = order;
  out.value = v3 + (v3 - v2) / (std::pow(rho, order) - 1.0);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::limit_one: return "limit-one";
    case Verdict::limit_exp: return "limit-exp";
    default: return "limit-zero";
  }
}

LimitReport limit_verdict(int dim, const Potential& spec, double t,
                          std::span<const std::pair<double, PairDistribution>> sweep) {
  if (dim < 1 || dim > 3 || spec.dim() != dim) throw InvalidArgument("dimension mismatch");
  if (sweep.size() < 3) throw InvalidArgument("limit sweep needs at least three hbar values");
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (!(sweep[i].first < sweep[i - 1].first))
      throw InvalidArgument("limit sweep must be strictly decreasing in hbar");

  LimitReport r;
  r.dim = dim;
  r.t = t;
  const bool still = fdot_vanishes(spec, t);
  r.verdict = (dim == 1 || still) ? Verdict::limit_one : (dim == 2 ? Verdict::limit_exp : Verdict::limit_zero);
  r.lambda = dim == 1 ? 0.0 : lambda_at(spec, t);

  std::vector<double> hs, p0s;
  int n_max = 0;
  for (const auto& [h, d] : sweep) {
    SweepRow row;
    row.hbar = h;
    row.p0 = d.p0;
    row.pn = d.pn;
    row.tail_error = d.tail_error;
    r.sweep.push_back(row);
    hs.push_back(h);
    p0s.push_back(d.p0);
    n_max = std::max<int>(n_max, static_cast<int>(d.pn.size()));
  }

  const double fallback = dim == 2 ? 2.0 : 1.0;
  const Extrapolation ex = richardson(hs, p0s, fallback);
  r.p0_extrapolated = ex.value;
  r.extrapolation_order = ex.order;
  r.order_fitted = ex.order_fitted;
  if (r.verdict == Verdict::limit_zero) r.p0_extrapolated = std::clamp(ex.value, 0.0, 1.0);

  const double target = std::exp(-r.lambda);
  r.relative_deviation = std::abs(r.p0_extrapolated - target) / target;

  for (int n = 0; n <= n_max; ++n) r.poisson.push_back(poisson_law(r.lambda, n));
  for (const auto& row : r.sweep) {
    std::vector<double> errs;
    for (std::size_t n = 1; n <= row.pn.size(); ++n) {
      const double ref = r.poisson[n];
      errs.push_back(ref > 0.0 ? std::abs(row.pn[n - 1] - ref) / ref : std::abs(row.pn[n - 1]));
    }
    r.poisson_relative_error.push_back(std::move(errs));
    r.scaled_log_p0.push_back(row.p0 > 0.0 ? -row.hbar * std::log(row.p0) : kInf);
  }

  switch (r.verdict) {
    case Verdict::limit_one: {
      bool ok = true;
      for (std::size_t i = 1; i < p0s.size(); ++i) ok = ok && (1.0 - p0s[i]) <= (1.0 - p0s[i - 1]) + 1e-12;
      r.evidence_consistent = ok;
      break;
    }
    case Verdict::limit_exp:
      r.evidence_consistent = r.relative_deviation <= 0.05;
      break;
    case Verdict::limit_zero: {
      bool ok = true;
      for (std::size_t i = 1; i < p0s.size(); ++i) ok = ok && p0s[i] < p0s[i - 1];
      r.evidence_consistent = ok;
      break;
    }
  }
  return r;
}

double comparison_sum(int dim, const Potential& spec, double t, double hbar, double R) {
  require_hbar(hbar);
  if (spec.dim() != dim) throw InvalidArgument("dimension mismatch");
  if (spec.is_zero()) return 0.0;
  const auto f = eval_potential(spec, t);
  const auto fd = eval_potential_deriv(spec, t);
  const int K = static_cast<int>(std::floor(R / hbar + 1e-12));
  const long long K2 = static_cast<long long>(std::floor((R / hbar) * (R / hbar) * (1.0 + 1e-14)));
  const int K1 = dim >= 2 ? K : 0, K3 = dim >= 3 ? K : 0;
  double sum = 0.0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K1; b <= K1; ++b)
      for (int c = -K3; c <= K3; ++c) {
        if (1LL * a * a + 1LL * b * b + 1LL * c * c > K2) continue;
        const int k[3] = {a, b, c};
        double e2 = 1.0, dot = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double y = hbar * k[i] + f[i];
          e2 += y * y;
          dot += y * fd[i];
        }
        sum += dot * dot / (16.0 * e2 * e2 * e2);
      }
  return hbar * hbar * sum;
}

double calibrate_decay_constant(std::span<const DecaySample> samples, double safety) {
  double best = 0.0;
  for (const auto& s : samples) {
    require_hbar(s.hbar);
    const double e4 = s.eps0 * s.eps0 * s.eps0 * s.eps0;
    best = std::max(best, std::abs(1.0 - s.q) * e4 / (s.hbar * s.hbar));
  }
  return safety * best;
}

double persistence_deficit_bound(double K, double hbar) { return std::expm1(K * hbar * (kPi + hbar)); }

}  // namespace kgvac
