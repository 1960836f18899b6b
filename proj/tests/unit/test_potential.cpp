#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "kgvac/error.hpp"
#include "kgvac/potential.hpp"

using namespace kgvac;

TEST_CASE("make_bump validates its arguments") {
  CHECK_THROWS_AS(make_bump(0, {}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_bump(4, {1, 0, 0, 0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_bump(1, {1}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_bump(1, {1}, -2.0), InvalidArgument);
  CHECK_THROWS_AS(make_bump(2, {1}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Potential::bump(1, {1}, 1.0, BumpShape{0.9, 0.5, 4.0}), InvalidArgument);
}

TEST_CASE("zero amplitude gives the zero potential") {
  const auto p = make_bump(1, {0.0}, 1.0);
  CHECK(p.is_zero());
  for (double t : {-1.0, 0.2, 0.5, 0.9, 3.0}) {
    CHECK(eval_potential(p, t)[0] == 0.0);
    CHECK(eval_potential_deriv(p, t)[0] == 0.0);
  }
}

TEST_CASE("canonical bump values") {
  const auto p = make_bump(2, {1.0, 0.0}, 1.0);
  auto mid = eval_potential(p, 0.5);
  CHECK(mid[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mid[1] == 0.0);
  // exp(4 - T^2/(t(T-t))) at t = 1/4, T = 1
  CHECK(eval_potential(p, 0.25)[0] == doctest::Approx(std::exp(4.0 - 16.0 / 3.0)).epsilon(1e-14));
  CHECK(eval_potential(p, 0.25)[0] == doctest::Approx(0.26359713811572677).epsilon(1e-14));

  const auto q = make_bump(1, {2.0}, 2.0);
  CHECK(eval_potential(q, 1.0)[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval_potential(q, -1.0)[0] == 0.0);
  CHECK(eval_potential(q, 2.0)[0] == 0.0);
  CHECK(eval_potential_deriv(q, 1.0)[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("derivative matches a central difference at t = 0.25") {
  const auto p = make_bump(1, {1.0}, 1.0);
  const double h = 1e-6;
  const double fd = (eval_potential(p, 0.25 + h)[0] - eval_potential(p, 0.25 - h)[0]) / (2 * h);
  CHECK(eval_potential_deriv(p, 0.25)[0] == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("profile jet derivatives match finite differences") {
  for (auto shape : {BumpShape{0.5, 1.0, 4.0}, BumpShape{0.4, 0.6, 2.0}}) {
    const auto p = Potential::bump(1, {1.0}, 1.0, shape);
    for (double t : {0.2, 0.33, 0.45, 0.6}) {
      if (p.profile(t) == 0.0) continue;
      const double h = 1e-3;
      auto d5 = [&](int order) {
        return (-p.profile_jet(t + 2 * h).deriv(order) + 8 * p.profile_jet(t + h).deriv(order) -
                8 * p.profile_jet(t - h).deriv(order) + p.profile_jet(t - 2 * h).deriv(order)) /
               (12 * h);
      };
      const auto j = p.profile_jet(t);
      CHECK(j.deriv(2) == doctest::Approx(d5(1)).epsilon(1e-6));
      CHECK(j.deriv(3) == doctest::Approx(d5(2)).epsilon(1e-6));
    }
  }
}

TEST_CASE("sup norms") {
  CHECK(sup_norms(make_bump(1, {0.0}, 1.0)).f == 0.0);
  CHECK(sup_norms(make_bump(1, {0.0}, 1.0)).fdot == 0.0);
  CHECK(sup_norms(make_bump(1, {3.0}, 1.0)).f == doctest::Approx(3.0).epsilon(1e-12));

  const auto p = make_bump(1, {1.0}, 1.0);
  double grid_max = 0.0;
  const int n = 100000;
  for (int i = 0; i <= n; ++i) grid_max = std::max(grid_max, std::abs(eval_potential_deriv(p, double(i) / n)[0]));
  const auto s = sup_norms(p);
  CHECK(s.fdot == doctest::Approx(grid_max).epsilon(1e-3));
  CHECK(s.fdot >= grid_max * (1 - 1e-12));
  CHECK(s.fdot <= grid_max * 1.001);
  CHECK(p.argmax_fdot() == doctest::Approx(0.3033).epsilon(1e-3));
}

TEST_CASE("compact support, smooth junction and derivative consistency") {
  for (auto shape : {BumpShape{0.5, 1.0, 4.0}, BumpShape{0.4, 0.6, 2.0}}) {
    const auto p = Potential::bump(2, {0.7, -1.3}, 1.0, shape);
    const double l = p.support_begin(), r = p.support_end();
    for (int i = 0; i < 10000; ++i) {
      const double t = gen::integer(0, 1) ? gen::uniform(-5.0, l) : gen::uniform(r, 6.0);
      const auto f = eval_potential(p, t);
      const auto d = eval_potential_deriv(p, t);
      REQUIRE(f[0] == 0.0);
      REQUIRE(f[1] == 0.0);
      REQUIRE(d[0] == 0.0);
      REQUIRE(d[1] == 0.0);
    }
    const double fmax = sup_norms(p).f;
    CHECK(std::abs(eval_potential(p, l + 1e-3)[1]) <= 1e-12 * fmax);
    CHECK(std::abs(eval_potential(p, r - 1e-3)[1]) <= 1e-12 * fmax);

    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const double t = gen::uniform(l, r);
      const double h = 1e-6;
      const double fd = (eval_potential(p, t + h)[1] - eval_potential(p, t - h)[1]) / (2 * h);
      const double an = eval_potential_deriv(p, t)[1];
      const double scale = std::max(std::abs(an), 1e-6 * sup_norms(p).fdot);
      if (std::abs(fd - an) > 1e-6 * scale) ++bad;
    }
    CHECK(bad == 0);
  }
}
