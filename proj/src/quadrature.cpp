#include "kgvac/quadrature.hpp"

#include <cmath>
#include <limits>

namespace kgvac::quad {

namespace {

std::array<std::array<double, 5>, 5> build_cumulative() {
  // Lagrange basis on the unit panel, integrated exactly via monomial expansion.
  std::array<std::array<double, 5>, 5> w{};
  for (int i = 0; i < 5; ++i) {
    // coefficients of prod_{m != i} (s - s_m) / (s_i - s_m), lowest degree first
    std::array<double, 5> poly{1.0, 0.0, 0.0, 0.0, 0.0};
    int deg = 0;
    double denom = 1.0;
    for (int m = 0; m < 5; ++m) {
      if (m == i) continue;
      std::array<double, 5> next{};
      for (int d = 0; d <= deg; ++d) {
        next[d + 1] += poly[d];
        next[d] -= poly[d] * kPanelNodes[m];
      }
      poly = next;
      ++deg;
      denom *= kPanelNodes[i] - kPanelNodes[m];
    }
    for (int j = 0; j < 5; ++j) {
      const double s = kPanelNodes[j];
      double acc = 0.0;
      double sp = s;
      for (int d = 0; d <= 4; ++d) {
        acc += poly[d] * sp / (d + 1);
        sp *= s;
      }
      w[j][i] = acc / denom;
    }
  }
  return w;
}

struct Worst {
  double lo = 0.0, hi = 0.0, err = -1.0;
};

double recurse(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth, SimpsonResult& out, Worst& worst,
               bool& failed) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  out.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double est = std::abs(delta) / 15.0;
  if (est <= tol || depth <= 0 || !(b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(m))) {
    if (est > tol) {
      failed = true;
      if (est > worst.err) worst = {a, b, est};
    }
    out.error += est;
    return left + right + delta / 15.0;
  }
  return recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out, worst, failed) +
         recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out, worst, failed);
}

}  // namespace

const std::array<std::array<double, 5>, 5> kCumulative = build_cumulative();

SimpsonResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_depth) {
  SimpsonResult out;
  if (a == b) return out;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  out.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  Worst worst;
  bool failed = false;
  out.value = recurse(f, a, b, fa, fm, fb, whole, tol, max_depth, out, worst, failed);
  if (failed)
    throw QuadratureError("adaptive Simpson did not converge on [" + std::to_string(worst.lo) +
                              ", " + std::to_string(worst.hi) + "]",
                          worst.lo, worst.hi, worst.err);
  return out;
}

}  // namespace kgvac::quad
