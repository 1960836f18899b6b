#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "kgvac/error.hpp"
#include "kgvac/mode_core.hpp"
#include "kgvac/quadrature.hpp"

using namespace kgvac;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("dispersion examples") {
  const auto zero1 = make_bump(1, {0.0}, 1.0);
  for (double hb : {1.0, 0.3}) {
    auto d = dispersion(ModeIndex{0}, 0.4, hb, zero1);
    CHECK(d.eps == 1.0);
    CHECK(d.eps_dot == 0.0);
    CHECK(d.omega == doctest::Approx(1.0 / hb));
  }
  const auto zero2 = make_bump(2, {0.0, 0.0}, 1.0);
  CHECK(dispersion(ModeIndex{3, 4}, 0.5, 1.0, zero2).eps == doctest::Approx(std::sqrt(26.0)).epsilon(1e-15));

  // f = (1, 0), f' = (1, 0) at the expansion point
  Jet<double, 3> prof;
  prof.c = {1.0, 1.0, 0.0, 0.0};
  const std::array<double, 3> x{1.0, 0.0, 0.0};  // hbar k = 0.5 * (2, 0)
  const std::vector<double> amp{1.0, 0.0};
  const auto e = epsilon_jet(amp, prof, x);
  CHECK(e.value() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(e.deriv(1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));

  CHECK_THROWS_AS(dispersion(ModeIndex{1}, 0.1, 0.0, zero1), InvalidArgument);
  CHECK_THROWS_AS(dispersion(ModeIndex{1, 2}, 0.1, 0.5, zero1), InvalidArgument);
}

TEST_CASE("dispersion derivatives match finite differences; eps bounds") {
  const auto p = make_bump(2, {1.0, 0.5}, 1.0);
  const double C = 2.0 * (1.0 + std::pow(sup_norms(p).f, 2));
  for (int i = 0; i < 200; ++i) {
    const ModeIndex k{gen::integer(-20, 20), gen::integer(-20, 20)};
    const double hb = gen::uniform(0.02, 0.5);
    const double t = gen::uniform(0.05, 0.95);
    const auto d = dispersion(k, t, hb, p);
    const double h = 1e-6;
    const double fd = (dispersion(k, t + h, hb, p).eps - dispersion(k, t - h, hb, p).eps) / (2 * h);
    CHECK(d.eps_dot == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    CHECK(d.eps >= 1.0);
    CHECK(d.omega * hb == doctest::Approx(d.eps).epsilon(1e-15));
    CHECK(d.eps0 * d.eps0 <= C * d.eps * d.eps);
    const auto f = eval_potential(p, t);
    const auto x = k.momentum(hb);
    CHECK(d.eps == doctest::Approx(std::sqrt(std::pow(x[0] + f[0], 2) + std::pow(x[1] + f[1], 2) + 1)).epsilon(1e-15));
  }
}

TEST_CASE("zero potential: all coefficients vanish") {
  const auto z = make_bump(2, {0.0, 0.0}, 1.0);
  const auto tab = coeff_table(ModeIndex{1, 2}, 0.2, z, 1.0);
  for (double t : {0.0, 0.3, 1.0}) {
    const auto c = tab.at(t);
    for (int s = 0; s <= 3; ++s)
      for (int j = 0; s + j <= 3; ++j) CHECK(c(s, j) == (s == 0 && j == 0 ? cx(1.0) : cx(0.0)));
    CHECK(survival_amplitude(tab, t, 0.2) == cx(1.0));
    CHECK(pair_amplitude(tab, t, 0.2) == cx(0.0));
  }
  CHECK(amplitude_square_expansion(ModeIndex{1, 2}, 0.5, 0.2, z) == 1.0);
  const FixedTimeEvaluator ev(z, 0.7);
  const auto m = ev.evaluate(ModeIndex{3, -1}, 0.1);
  CHECK(m.survive == cx(1.0));
  CHECK(m.pair == cx(0.0));
}

TEST_CASE("coefficients at t = 0 and argument checks") {
  const auto p = make_bump(1, {1.0}, 1.0);
  const auto tab = coeff_table(ModeIndex{2}, 0.2, p, 1.0);
  const auto c = tab.at(0.0);
  CHECK(c(0, 1) == cx(0.0));
  CHECK(c(0, 2) == cx(0.0));
  CHECK(c(0, 3) == cx(0.0));
  CHECK(c(0, 0) == cx(1.0));
  CHECK_THROWS_AS(coeff_table(ModeIndex{2}, 0.2, p, 1.0, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(coeff_table(ModeIndex{2}, -0.2, p, 1.0), InvalidArgument);
  const auto part = coeff_table(ModeIndex{2}, 0.2, p, 0.5);
  CHECK_THROWS_AS(part.at(0.7), InvalidArgument);
}

TEST_CASE("A^1_0 agrees with an independent quadrature") {
  const auto p = make_bump(1, {1.0}, 1.0);
  const ModeIndex k{5};
  const double hb = 0.2, t = 0.75;
  const auto tab = coeff_table(k, hb, p, 1.0, 1e-10);
  auto integrand = [&](double s) {
    const auto d = dispersion(k, s, hb, p);
    return d.eps_dot * d.eps_dot / (8.0 * d.eps * d.eps * d.eps);
  };
  const double ref = quad::adaptive_simpson(integrand, 0.0, t, 1e-12).value;
  const cx a = tab.at(t)(0, 1);
  CHECK(std::abs(a.real()) < 1e-12);
  CHECK(a.imag() == doctest::Approx(ref).epsilon(1e-10).scale(1e-10));
  CHECK(std::abs(a.imag() - ref) < 1e-10);
}

TEST_CASE("phase structure and closed form of A^2_0") {
  for (auto shape : {BumpShape{0.5, 1.0, 4.0}, BumpShape{0.4, 0.6, 2.0}}) {
    const auto p = Potential::bump(2, {1.0, 0.3}, 1.0, shape);
    for (const ModeIndex& k : {ModeIndex{0, 0}, ModeIndex{-3, 1}, ModeIndex{4, -2}}) {
      const double hb = 0.25;
      const auto tab = coeff_table(k, hb, p, 1.0, 1e-11);
      for (double t : {0.3, 0.55, 0.8, 1.0}) {
        const auto c = tab.at(t);
        CHECK(std::abs(c(0, 1).real()) < 1e-12);
        CHECK(std::abs(c(0, 2).imag()) < 1e-10);
        CHECK(std::abs(c(0, 3).real()) < 1e-10);
        const auto d = dispersion(k, t, hb, p);
        const double I = c(0, 1).imag();
        const double closed = -d.eps_dot * d.eps_dot / (32 * std::pow(d.eps, 4)) - 0.5 * I * I;
        CHECK(std::abs(c(0, 2).real() - closed) < 1e-10);
        CHECK(c(1, 0) == cx(0.0, -d.eps_dot / (4 * d.eps * d.eps)));
      }
    }
  }
}

TEST_CASE("freeze-out after the support") {
  const auto p = make_bump(1, {1.0}, 1.0);
  const auto tab = coeff_table(ModeIndex{1}, 0.3, p, 2.0);
  const auto a = survival_amplitude(tab, 1.0, 0.3);
  const auto b = pair_amplitude(tab, 1.0, 0.3);
  for (double t : {1.2, 1.5, 2.0}) {
    CHECK(survival_amplitude(tab, t, 0.3) == a);
    CHECK(pair_amplitude(tab, t, 0.3) == b);
  }
  const FixedTimeEvaluator e1(p, 1.0), e2(p, 1.7);
  const auto m1 = e1.evaluate(ModeIndex{1}, 0.3);
  const auto m2 = e2.evaluate(ModeIndex{1}, 0.3);
  CHECK(m1.q == doctest::Approx(m2.q).epsilon(1e-14));
  CHECK(m1.p == doctest::Approx(m2.p).epsilon(1e-14));
}

TEST_CASE("shared-grid evaluator agrees with per-mode tables") {
  for (auto shape : {BumpShape{0.5, 1.0, 4.0}, BumpShape{0.4, 0.6, 2.0}}) {
    const auto p = Potential::bump(2, {1.0, -0.5}, 1.0, shape);
    for (double t : {0.3, 0.5, 1.0}) {
      const FixedTimeEvaluator ev(p, t, 1e-10);
      for (int i = 0; i < 12; ++i) {
        const ModeIndex k{gen::integer(-12, 12), gen::integer(-12, 12)};
        const double hb = gen::uniform(0.05, 0.4);
        const auto tab = coeff_table(k, hb, p, 1.0, 1e-12);
        const auto m = ev.evaluate(k, hb);
        const auto s = survival_amplitude(tab, t, hb);
        const auto c = pair_amplitude(tab, t, hb);
        CHECK(std::abs(m.survive - s) < 1e-11);
        CHECK(std::abs(m.pair - c) < 1e-11);
      }
    }
  }
}

TEST_CASE("amplitude square expansion") {
  const auto p = make_bump(1, {1.0}, 1.0);
  const double t = 0.3, hb = 0.1;
  const double f = eval_potential(p, t)[0];
  const double fd = eval_potential_deriv(p, t)[0];
  const double eps = std::sqrt(f * f + 1.0);
  const double epsd = f * fd / eps;
  CHECK(amplitude_square_expansion(ModeIndex{0}, t, hb, p) ==
        doctest::Approx(1.0 - hb * hb * epsd * epsd / (16.0 * std::pow(eps, 4))).epsilon(1e-15));

  // |A_k|^2 from the truncated series minus the expansion is O(hbar^4) at fixed hbar k
  std::vector<double> lx, ly;
  for (double h : {0.4, 0.2, 0.1, 0.05}) {
    const ModeIndex k{0};
    const auto tab = coeff_table(k, h, p, 1.0, 1e-12);
    for (double tt : {0.3}) {
      const double err = std::abs(std::norm(survival_amplitude(tab, tt, h)) - amplitude_square_expansion(k, tt, h, p));
      lx.push_back(std::log(h));
      ly.push_back(std::log(err));
    }
  }
  CHECK(slope(lx, ly) >= 3.5);
}

TEST_CASE("pair amplitude leading order") {
  const auto p = make_bump(1, {1.0}, 1.0);
  const double t = 0.3, x = 0.4;
  std::vector<double> dev;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    const ModeIndex k{int(std::lround(x / h))};
    const auto tab = coeff_table(k, h, p, 1.0);
    const auto d = dispersion(k, t, h, p);
    const double lead = h * std::abs(d.eps_dot) / (4 * d.eps * d.eps);
    dev.push_back(std::abs(std::abs(pair_amplitude(tab, t, h)) / lead - 1.0));
  }
  for (std::size_t i = 1; i < dev.size(); ++i) {
    CHECK(dev[i] < dev[i - 1]);
    CHECK(dev[i] / dev[i - 1] == doctest::Approx(0.5).epsilon(0.35));
  }
}

TEST_CASE("bound lemma: scaled coefficients stay bounded") {
  const auto p = make_bump(1, {1.0}, 1.0);
  double worst = 0.0;
  std::vector<double> maxima;
  for (double h : {0.4, 0.2, 0.1}) {
    double m = 0.0;
    for (int base : {1, 2, 3}) {
      for (int mult : {1, 4, 16, 64}) {
        const ModeIndex k{base * mult};
        const auto tab = coeff_table(k, h, p, 1.0);
        const double e0 = std::sqrt(std::pow(h * k[0], 2) + 1.0);
        for (double t : {0.2, 0.3, 0.5, 0.7, 1.0}) {
          const auto c = tab.at(t);
          for (int s = 0; s <= 3; ++s)
            for (int j = 0; s + j <= 3; ++j) {
              if (s == 0 && j == 0) continue;
              const int pw = s > 0 ? 2 * s + j : 2 + j;
              m = std::max(m, std::abs(c(s, j)) * std::pow(e0, pw));
            }
        }
      }
    }
    maxima.push_back(m);
    worst = std::max(worst, m);
  }
  CHECK(worst < 50.0);
  // the bound does not grow as hbar shrinks
  CHECK(maxima.back() <= 1.5 * maxima.front());
}
