#include "kgvac/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kgvac/error.hpp"
#include "kgvac/gaussian_oracle.hpp"

namespace kgvac {
namespace {

// Compensated summation.
class Neumaier {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double sphere_area(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    default: return 4.0 * std::numbers::pi;
  }
}

double ball_volume(int dim, double r) {
  switch (dim) {
    case 1: return 2.0 * r;
    case 2: return std::numbers::pi * r * r;
    default: return 4.0 / 3.0 * std::numbers::pi * r * r * r;
  }
}

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dimension must be 1, 2 or 3");
}

}  // namespace

double tail_mode_bound(double x_norm, double hbar, const Potential& spec, double safety) {
  return tail_mode_bound(x_norm, hbar, sup_norms(spec), safety);
}

double tail_mode_bound(double x_norm, double hbar, const SupNorms& s, double safety) {
  const double gap = std::max(0.0, x_norm - s.f);
  const double d = gap * gap + 1.0;
  return safety * hbar * hbar * s.fdot * s.fdot / (16.0 * d * d);
}

double tail_log_mass(int dim, double hbar, const Potential& spec, double R, double safety) {
  if (spec.is_zero()) return 0.0;
  return tail_log_mass(dim, hbar, sup_norms(spec), R, safety);
}

double tail_log_mass(int dim, double hbar, const SupNorms& s, double R, double safety) {
  check_dim(dim);
  if (!(hbar > 0.0)) throw InvalidArgument("hbar must be positive");
  if (s.fdot == 0.0) return 0.0;
  const double shift = hbar * std::sqrt(static_cast<double>(dim));
  const double rho = std::max(0.0, R - 0.5 * shift);
  const double F = s.f;
  auto g = [&](double r) {
    if (r > 1e60) return 0.0;
    const double gap = std::max(0.0, std::max(0.0, r - shift) - F);
    const double d = gap * gap + 1.0;
    return std::pow(r, dim - 1) / (d * d);
  };
  // g is smooth away from r = F + shift; split there.
  const double kink = F + shift;
  double integral = 0.0;
  double start = rho;
  if (rho < kink) {
    integral += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, rho, kink, 15, 1e-13);
    start = kink;
  }
  boost::math::quadrature::exp_sinh<double> tail;
  integral += tail.integrate([&](double u) { return g(start + u); }, 0.0,
                             std::numeric_limits<double>::infinity());
  return safety * std::pow(hbar, 2 - dim) * s.fdot * s.fdot / 16.0 * sphere_area(dim) * integral;
}

ModeSet build_mode_set(int dim, double hbar, const Potential& spec, double tail_tol,
                       const ModeSetOptions& options) {
  check_dim(dim);
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be positive and finite");
  if (spec.dim() != dim) throw InvalidArgument("potential dimension does not match the lattice");
  const bool overridden = options.cutoff_override > 0.0;
  if (!overridden && !(tail_tol > 1e-12 && tail_tol <= 1e-2))
    throw InvalidArgument("tail_tol must lie in (1e-12, 1e-2]");

  ModeSet set;
  set.dim = dim;
  set.hbar = hbar;

  const SupNorms norms = spec.is_zero() ? SupNorms{} : sup_norms(spec);
  double R = 0.0;
  if (overridden) {
    R = options.cutoff_override;
  } else if (!spec.is_zero()) {
    auto tail = [&](double r) { return tail_log_mass(dim, hbar, norms, r, options.safety); };
    double lo = 0.0;
    double hi = std::max(1.0, hbar);
    if (tail(lo) > tail_tol) {
      while (tail(hi) > tail_tol) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) throw InvalidArgument("tail tolerance unreachable");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) > tail_tol ? lo : hi) = mid;
      }
      R = hi;
    }
  }
  set.cutoff_radius = R;
  set.tail_log_mass = tail_log_mass(dim, hbar, norms, R, options.safety);

  const double kmax = R / hbar;
  const double estimate = ball_volume(dim, kmax + std::sqrt(static_cast<double>(dim)));
  if (estimate > static_cast<double>(options.max_modes))
    throw InvalidArgument("mode set would hold about " + std::to_string(static_cast<long long>(estimate)) +
                          " modes, above the limit; increase hbar or loosen tail_tol");

  const int K = static_cast<int>(std::floor(kmax + 1e-12));
  const long long K2 = static_cast<long long>(std::floor(kmax * kmax * (1.0 + 1e-14)));
  set.modes.reserve(static_cast<std::size_t>(estimate) + 8);
  const int K1 = dim >= 2 ? K : 0;
  const int K3 = dim >= 3 ? K : 0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K1; b <= K1; ++b)
      for (int c = -K3; c <= K3; ++c) {
        const long long n2 = 1LL * a * a + 1LL * b * b + 1LL * c * c;
        if (n2 > K2) continue;
        ModeIndex m;
        m.dim = dim;
        m.k = {a, b, c};
        set.modes.push_back(m);
      }
  std::sort(set.modes.begin(), set.modes.end(), mode_less);
  return set;
}

std::pair<double, double> vacuum_persistence(std::span<const std::pair<ModeIndex, double>> mode_q,
                                             double tail_log_mass) {
  if (!(tail_log_mass >= 0.0)) throw InvalidArgument("tail_log_mass must be non-negative");
  std::vector<std::pair<ModeIndex, double>> sorted(mode_q.begin(), mode_q.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return mode_less(a.first, b.first); });
  Neumaier log_sum;
  for (const auto& [k, q] : sorted) {
    if (!(q > 0.0) || !std::isfinite(q))
      throw NumericalError("non-positive survival probability for mode " + k.to_string());
    log_sum.add(std::log(q));
  }
  const double p0 = std::exp(log_sum.value());
  return {p0, p0 * -std::expm1(-tail_log_mass)};
}

PairDistribution pair_distribution(std::span<const std::pair<double, double>> mode_pq, int n_max,
                                   double tail_log_mass) {
  if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
  if (!(tail_log_mass >= 0.0)) throw InvalidArgument("tail_log_mass must be non-negative");
  std::vector<std::pair<double, double>> sorted(mode_pq.begin(), mode_pq.end());
  std::sort(sorted.begin(), sorted.end());

  Neumaier log_q, log_norm;
  std::vector<double> e(static_cast<std::size_t>(n_max) + 1, 0.0);
  e[0] = 1.0;
  for (const auto& [p, q] : sorted) {
    if (!(q > 0.0) || !std::isfinite(q) || !(p >= 0.0) || !std::isfinite(p))
      throw NumericalError("invalid per-mode probabilities");
    log_q.add(std::log(q));
    log_norm.add(std::log1p(p / q));
    const double r = p / q;
    for (int n = n_max; n >= 1; --n) e[n] += r * e[n - 1];
  }

  PairDistribution out;
  out.n_max = n_max;
  out.log_p0 = log_q.value();
  out.p0 = std::exp(out.log_p0);
  out.pn.resize(n_max);
  double listed = out.p0;
  for (int n = 1; n <= n_max; ++n) {
    out.pn[n - 1] = e[n] > 0.0 ? std::exp(out.log_p0 + std::log(e[n])) : 0.0;
    listed += out.pn[n - 1];
  }
  // prod (q + p) is the total mass of the product measure.
  const double total = std::exp(out.log_p0 + log_norm.value());
  out.tail_error = -std::expm1(-tail_log_mass) + std::max(0.0, total - listed) + std::max(0.0, total - 1.0);
  return out;
}

double pair_one_explicit(std::span<const std::pair<double, double>> mode_pq) {
  const std::size_t n = mode_pq.size();
  std::vector<double> prefix(n + 1, 0.0), suffix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mode_pq[i].second > 0.0)) throw NumericalError("non-positive survival probability");
    prefix[i + 1] = prefix[i] + std::log(mode_pq[i].second);
  }
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + std::log(mode_pq[i].second);
  Neumaier sum;
  for (std::size_t i = 0; i < n; ++i) {
    if (mode_pq[i].first > 0.0) sum.add(mode_pq[i].first * std::exp(prefix[i] + suffix[i + 1]));
  }
  return sum.value();
}

bool product_sum_inequality_check(std::span<const double> f, int n) {
  if (n < 1) throw InvalidArgument("n must be positive");
  if (f.size() > 16) throw InvalidArgument("enumeration is limited to 16 values");
  for (double v : f)
    if (!(v >= 0.0)) throw InvalidArgument("values must be non-negative");
  const std::size_t m = f.size();
  double sum = 0.0, sum2 = 0.0;
  for (double v : f) {
    sum += v;
    sum2 += v * v;
  }
  // Enumerate all ordered n-tuples; those with distinct indices form the subtracted sum.
  long double all = 0.0L, distinct = 0.0L;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  if (m > 0) {
    while (true) {
      long double prod = 1.0L;
      bool unique = true;
      for (int i = 0; i < n; ++i) {
        prod *= f[idx[i]];
        for (int j = 0; j < i && unique; ++j)
          if (idx[j] == idx[i]) unique = false;
      }
      all += prod;
      if (unique) distinct += prod;
      int pos = n - 1;
      while (pos >= 0 && ++idx[pos] == m) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  const long double lhs = all - distinct;
  const long double rhs = n >= 2 ? 0.5L * n * (n - 1) * std::pow(static_cast<long double>(sum), n - 2) * sum2 : 0.0L;
  const long double slack = 1e-12L * std::max<long double>(std::abs(all), 1e-300L);
  return lhs <= rhs + slack;
}

std::vector<ModeAmplitudes> lattice_amplitudes(const ModeSet& set, const Potential& spec, double t,
                                               AmplitudeSource source, double residual_constant,
                                               int threads, double quad_tol, double ode_tol) {
  if (spec.dim() != set.dim) throw InvalidArgument("potential dimension does not match the lattice");
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be non-negative");
  const double hbar = set.hbar;
  const auto amp = spec.amplitude();
  double anorm = 0.0;
  for (double a : amp) anorm += a * a;
  anorm = std::sqrt(anorm);

  // Group modes by (<k, a>, |k|^2): equal keys give identical dispersion.
  std::map<std::pair<double, long long>, std::size_t> keys;
  std::vector<std::size_t> key_of(set.modes.size());
  std::vector<std::size_t> representative;
  for (std::size_t i = 0; i < set.modes.size(); ++i) {
    const ModeIndex& m = set.modes[i];
    double par = 0.0;
    for (int d = 0; d < set.dim; ++d) par += m.k[d] * (anorm > 0.0 ? amp[d] / anorm : 0.0);
    const auto [it, inserted] = keys.try_emplace({par, m.norm2()}, representative.size());
    if (inserted) representative.push_back(i);
    key_of[i] = it->second;
  }

  std::vector<ModeAmplitudes> unique(representative.size());
  std::unique_ptr<FixedTimeEvaluator> evaluator;
  if (source == AmplitudeSource::semiclassical && !spec.is_zero())
    evaluator = std::make_unique<FixedTimeEvaluator>(spec, t, quad_tol);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t u = begin; u < end; ++u) {
      const ModeIndex& m = set.modes[representative[u]];
      if (spec.is_zero()) {
        unique[u] = ModeAmplitudes{};
        continue;
      }
      if (source == AmplitudeSource::semiclassical) {
        unique[u] = evaluator->evaluate(m, hbar, residual_constant);
      } else {
        const auto x = m.momentum(hbar);
        const GaussianModeState st = evolve_momentum(x, hbar, spec, t, ode_tol);
        const Dispersion disp = dispersion(m, t, hbar, spec);
        const LadderOverlaps lo = ladder_overlaps(st, disp.omega);
        ModeAmplitudes a;
        a.survive = lo.c0sq;
        a.pair = lo.c0sq * lo.z;
        a.q = lo.q();
        a.p = lo.p();
        unique[u] = a;
      }
    }
  };

  const std::size_t n = unique.size();
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
      pool.emplace_back([&, b, e, w] {
        try {
          work(b, e);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  std::vector<ModeAmplitudes> out(set.modes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = unique[key_of[i]];
  return out;
}

PairDistribution lattice_distribution(const ModeSet& set, const Potential& spec, double t,
                                      AmplitudeSource source, int n_max, int threads, double quad_tol,
                                      double ode_tol) {
  const auto amps = lattice_amplitudes(set, spec, t, source, 0.0, threads, quad_tol, ode_tol);
  std::vector<std::pair<double, double>> pq;
  pq.reserve(amps.size());
  for (const auto& a : amps) pq.emplace_back(a.p, a.q);
  PairDistribution d = pair_distribution(pq, n_max, set.tail_log_mass);
  d.t = t;
  d.hbar = set.hbar;
  return d;
}

}  // namespace kgvac
