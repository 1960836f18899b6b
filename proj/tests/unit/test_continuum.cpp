#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "generators.hpp"
#include "kgvac/continuum.hpp"
#include "kgvac/error.hpp"

using namespace kgvac;

namespace {
constexpr double pi = std::numbers::pi;

PairDistribution row(double h, double p0, std::vector<double> pn = {}) {
  PairDistribution d;
  d.hbar = h;
  d.p0 = p0;
  d.pn = std::move(pn);
  return d;
}
}  // namespace

TEST_CASE("one-dimensional Riemann sum") {
  CHECK(riemann_check_1d(1.0) <= pi + 1.0);
  CHECK(std::abs(riemann_check_1d(0.01) - pi) < 0.02);
  // exact value pi coth(pi / hbar)
  for (double h : {2.0, 1.0, 0.5, 0.3})
    CHECK(riemann_check_1d(h) == doctest::Approx(pi / std::tanh(pi / h)).epsilon(1e-13));
  double prev = 1e9;
  for (double h : {1.0, 0.5, 0.25, 0.125}) {
    const double v = riemann_check_1d(h);
    CHECK(v <= pi + h);
    CHECK(std::abs(v - pi) <= 2 * h);
    CHECK(std::abs(v - pi) < prev);
    prev = std::abs(v - pi);
  }
}

TEST_CASE("two-dimensional Riemann sum") {
  CHECK(riemann_integral_2d() == doctest::Approx(pi).epsilon(1e-8));
  CHECK(std::abs(riemann_check_2d(0.05) - pi) < 0.05);
  double prev = 1e9;
  for (double h : {1.0, 0.7, 0.4, 0.2}) {
    const double v = riemann_check_2d(h);
    CHECK(std::abs(v - pi) <= 2 * h);
    CHECK(std::abs(v - pi) < prev);
    prev = std::abs(v - pi);
  }
  // brute-force box sum with a continuum correction outside the box
  const double h = 0.5;
  const int K = 400;
  double box = 0.0;
  for (int a = -K; a <= K; ++a)
    for (int b = -K; b <= K; ++b) {
      const double d = h * h * (double(a) * a + double(b) * b) + 1.0;
      box += h * h / (d * d);
    }
  // the box covers the square |x|_inf <= L; integrate the remainder of the plane
  const double L = h * (K + 0.5);
  const double square = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [L](double x) {
        const double a2 = 1.0 + x * x, a = std::sqrt(a2);
        return L / (a2 * (a2 + L * L)) + std::atan(L / a) / (a2 * a);
      },
      -L, L, 20, 1e-14);
  CHECK(box + (pi - square) == doctest::Approx(riemann_check_2d(h)).epsilon(1e-9));
  // closed-form inner sums against direct summation
  for (double c : {0.3, 1.0, 2.5}) {
    double direct = 0.0;
    for (int m = -200000; m <= 200000; ++m) direct += 1.0 / std::pow(double(m) * m + c * c, 2);
    const double closed = pi / (2 * c * c * c) / std::tanh(pi * c) + pi * pi / (2 * c * c) / std::pow(std::sinh(pi * c), 2);
    CHECK(direct == doctest::Approx(closed).epsilon(1e-12));
  }
}

TEST_CASE("lambda intensity") {
  const double zero2[2] = {0.0, 0.0};
  CHECK(lambda_intensity(2, zero2) == 0.0);
  const double e1[2] = {1.0, 0.0};
  const double l1 = lambda_intensity(2, e1);
  CHECK(lambda_radial_constant(2) == doctest::Approx(pi / 4).epsilon(1e-10));
  CHECK(lambda_radial_constant(3) == doctest::Approx(pi * pi / 4).epsilon(1e-10));
  CHECK(l1 == doctest::Approx(lambda_radial_constant(2) / 16).epsilon(1e-8));
  const double twice[2] = {2.0, 0.0};
  CHECK(lambda_intensity(2, twice) == doctest::Approx(4 * l1).epsilon(1e-10));
  for (int trial = 0; trial < 5; ++trial) {
    const double v2[2] = {gen::uniform(-3, 3), gen::uniform(-3, 3)};
    const double n2 = v2[0] * v2[0] + v2[1] * v2[1];
    CHECK(lambda_intensity(2, v2) == doctest::Approx(n2 * lambda_radial_constant(2) / 16).epsilon(1e-8));
    const double v3[3] = {gen::uniform(-3, 3), gen::uniform(-3, 3), gen::uniform(-3, 3)};
    const double n3 = v3[0] * v3[0] + v3[1] * v3[1] + v3[2] * v3[2];
    CHECK(lambda_intensity(3, v3) == doctest::Approx(n3 * lambda_radial_constant(3) / 16).epsilon(1e-8));
  }
  const double one[1] = {1.0};
  CHECK_THROWS_AS(lambda_intensity(1, one), InvalidArgument);
  CHECK_THROWS_AS(lambda_intensity(3, e1), InvalidArgument);
}

TEST_CASE("Poisson law") {
  CHECK(poisson_law(0.0, 0) == 1.0);
  for (int n = 1; n < 5; ++n) CHECK(poisson_law(0.0, n) == 0.0);
  for (double lam : {0.1, 0.88, 2.5, 5.0}) {
    double s = 0.0;
    for (int n = 0; n <= 40; ++n) s += poisson_law(lam, n);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(poisson_law(lam, 3) == doctest::Approx(lam * lam * lam * std::exp(-lam) / 6).epsilon(1e-12));
  }
  CHECK(poisson_law(800.0, 800) > 0.0);  // no overflow
  CHECK_THROWS_AS(poisson_law(1.0, -1), InvalidArgument);
}

TEST_CASE("Richardson extrapolation") {
  std::vector<double> h = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> v;
  for (double x : h) v.push_back(2.0 + 3.0 * x * x + x * x * x);
  auto e = richardson(h, v, 1.0);
  CHECK(e.order_fitted);
  CHECK(e.order == doctest::Approx(2.0).epsilon(0.1));
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-3));
  // oscillating data falls back to the given order
  std::vector<double> w = {1.0, 1.1, 1.05, 1.07};
  e = richardson(h, w, 2.0);
  CHECK_FALSE(e.order_fitted);
  CHECK(e.order == 2.0);
  CHECK(e.value == doctest::Approx(1.07 + 0.02 / 3).epsilon(1e-14));
}

TEST_CASE("log-log slope") {
  std::vector<double> x = {0.4, 0.2, 0.1}, y;
  for (double v : x) y.push_back(5.0 / v);
  CHECK(loglog_slope(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("verdict trichotomy") {
  // still times: t after the pulse, or at the extremum of the profile
  for (int dim = 1; dim <= 3; ++dim) {
    std::vector<double> amp(dim, 0.0);
    amp[0] = 1.0;
    const auto spec = make_bump(dim, amp, 1.0);
    const std::vector<std::pair<double, PairDistribution>> sweep = {
        {0.4, row(0.4, 0.9)}, {0.2, row(0.2, 0.8)}, {0.1, row(0.1, 0.7)}};
    for (double t : {0.3, 1.5}) {
      const auto r = limit_verdict(dim, spec, t, sweep);
      const bool moving = t < 1.0;
      Verdict expect = Verdict::limit_one;
      if (moving && dim == 2) expect = Verdict::limit_exp;
      if (moving && dim == 3) expect = Verdict::limit_zero;
      CHECK(r.verdict == expect);
      CHECK(fdot_vanishes(spec, t) == !moving);
    }
    const auto zero = make_bump(dim, std::vector<double>(dim, 0.0), 1.0);
    const std::vector<std::pair<double, PairDistribution>> ones = {
        {0.4, row(0.4, 1.0)}, {0.2, row(0.2, 1.0)}, {0.1, row(0.1, 1.0)}};
    const auto r = limit_verdict(dim, zero, 0.3, ones);
    CHECK(r.verdict == Verdict::limit_one);
    CHECK(r.evidence_consistent);
    CHECK(r.p0_extrapolated == 1.0);
  }
  CHECK(to_string(Verdict::limit_exp) == "limit-exp");
}

TEST_CASE("verdict argument checks and Poisson entries") {
  const auto spec = make_bump(2, {1.0, 0.0}, 1.0);
  const std::vector<std::pair<double, PairDistribution>> two = {{0.4, row(0.4, 0.5)}, {0.2, row(0.2, 0.5)}};
  CHECK_THROWS_AS(limit_verdict(2, spec, 0.3, two), InvalidArgument);
  const std::vector<std::pair<double, PairDistribution>> bad = {
      {0.4, row(0.4, 0.5)}, {0.1, row(0.1, 0.5)}, {0.2, row(0.2, 0.5)}};
  CHECK_THROWS_AS(limit_verdict(2, spec, 0.3, bad), InvalidArgument);

  const double lam = lambda_at(spec, 0.3);
  const double e = std::exp(-lam);
  const std::vector<std::pair<double, PairDistribution>> good = {
      {0.4, row(0.4, e * 1.02, {0.1, 0.1})}, {0.2, row(0.2, e * 1.005, {0.1, 0.1})}, {0.1, row(0.1, e * 1.00125, {0.1, 0.1})}};
  const auto r = limit_verdict(2, spec, 0.3, good);
  CHECK(r.verdict == Verdict::limit_exp);
  CHECK(r.order_fitted);
  CHECK(r.relative_deviation < 1e-3);
  CHECK(r.evidence_consistent);
  REQUIRE(r.poisson.size() == 3);
  for (int n = 0; n < 3; ++n) CHECK(r.poisson[n] == doctest::Approx(std::pow(lam, n) * e / std::tgamma(n + 1.0)).epsilon(1e-12));
}

TEST_CASE("d=1 sweep: persistence rises toward one") {
  const auto spec = make_bump(1, {1.0}, 1.0);
  std::vector<std::pair<double, PairDistribution>> sweep;
  for (double h : {0.2, 0.1, 0.05}) {
    const ModeSet set = build_mode_set(1, h, spec, 1e-6);
    sweep.push_back({h, lattice_distribution(set, spec, 0.3, AmplitudeSource::semiclassical)});
  }
  const auto r = limit_verdict(1, spec, 0.3, sweep);
  CHECK(r.verdict == Verdict::limit_one);
  CHECK(r.evidence_consistent);
  // 1 - p0 = O(hbar): roughly halves with hbar
  const double ratio = (1 - sweep[1].second.p0) / (1 - sweep[2].second.p0);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("d=1 error constant is shape independent after normalization") {
  // 1 - P0 ~ hbar |fdot(t)|^2 (pi/8)/16 at leading order; the fitted constant divided by |fdot(t)|^2
  // must agree across bump shapes.
  std::vector<double> normalized;
  for (BumpShape shape : {BumpShape{}, BumpShape{0.45, 0.35, 2.0}}) {
    const auto spec = Potential::bump(1, {1.0}, 1.0, shape);
    const double t = spec.argmax_fdot();
    const double fd = eval_potential_deriv(spec, t)[0];
    double c = 0.0;
    for (double h : {0.1, 0.05, 0.025}) {
      const ModeSet set = build_mode_set(1, h, spec, 1e-6);
      const auto d = lattice_distribution(set, spec, t, AmplitudeSource::semiclassical);
      c = std::max(c, std::log(2.0 - d.p0) / h);
    }
    normalized.push_back(c / (fd * fd));
  }
  CHECK(normalized[1] == doctest::Approx(normalized[0]).epsilon(0.2));
  CHECK(normalized[0] == doctest::Approx(pi / 128).epsilon(0.2));
}

TEST_CASE("d=3 comparison sum diverges like 1/hbar") {
  const auto spec = make_bump(3, {1.0, 0.0, 0.0}, 1.0);
  std::vector<double> h = {0.4, 0.2, 0.1}, s;
  for (double x : h) s.push_back(comparison_sum(3, spec, 0.3, x, 6.0));
  CHECK(loglog_slope(h, s) == doctest::Approx(-1.0).epsilon(0.15));
  CHECK(comparison_sum(3, spec, 1.5, 0.2, 6.0) == 0.0);
}

TEST_CASE("decay constant calibration") {
  std::vector<DecaySample> s = {{0.1, 1.0, 0.99}, {0.2, 2.0, 0.999}};
  CHECK(calibrate_decay_constant(s, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(calibrate_decay_constant(s) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(persistence_deficit_bound(1.0, 0.1) == doctest::Approx(std::expm1(0.1 * (pi + 0.1))));
}
