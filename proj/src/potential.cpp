#include "kgvac/potential.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "kgvac/error.hpp"

namespace kgvac {

namespace {

struct ProfileTerms {
  double b;    // profile value
  double g1;   // derivatives of the exponent g(t) = s (1 - h/u)
  double g2;
  double g3;
};

// u = (t - l)(r - t); zero (and no exponent) when u is at the underflow guard.
bool exponent_terms(const BumpShape& sh, double lo, double hi, double scale2, double t,
                    ProfileTerms& out) {
  if (!(t > lo && t < hi)) return false;
  const double u = (t - lo) * (hi - t);
  if (u <= 1e-300 * scale2) return false;
  const double h = 0.25 * sh.width * sh.width;
  const double s = sh.sharpness;
  const double g = s * (1.0 - h / u);
  const double b = std::exp(g);
  if (b == 0.0) return false;
  const double u1 = lo + hi - 2.0 * t;  // u'
  const double u2 = u * u;
  const double sh_ = s * h;
  out.b = b;
  out.g1 = sh_ * u1 / u2;
  out.g2 = sh_ * (-2.0 * u - 2.0 * u1 * u1) / (u2 * u);
  out.g3 = sh_ * (12.0 * u1 / (u2 * u) + 6.0 * u1 * u1 * u1 / (u2 * u2));
  return true;
}

}  // namespace

Potential::Potential(std::vector<double> amplitude, double T, BumpShape shape)
    : amplitude_(std::move(amplitude)),
      T_(T),
      shape_(shape),
      lo_(shape.center - 0.5 * shape.width),
      hi_(shape.center + 0.5 * shape.width),
      zero_(std::all_of(amplitude_.begin(), amplitude_.end(), [](double a) { return a == 0.0; })) {}

Potential Potential::bump(int dim, std::vector<double> amplitude, double T) {
  return bump(dim, std::move(amplitude), T, BumpShape{0.5 * T, T, 4.0});
}

Potential Potential::bump(int dim, std::vector<double> amplitude, double T, BumpShape shape) {
  if (dim < 1 || dim > 3) throw InvalidArgument("potential: dim must be 1, 2 or 3");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("potential: T must be positive");
  if (static_cast<int>(amplitude.size()) != dim)
    throw InvalidArgument("potential: amplitude has length " + std::to_string(amplitude.size()) +
                          ", expected " + std::to_string(dim));
  for (double a : amplitude)
    if (!std::isfinite(a)) throw InvalidArgument("potential: amplitude must be finite");
  if (!(shape.width > 0.0) || !(shape.sharpness > 0.0))
    throw InvalidArgument("potential: bump width and sharpness must be positive");
  const double lo = shape.center - 0.5 * shape.width;
  const double hi = shape.center + 0.5 * shape.width;
  if (lo < -1e-12 * T || hi > T * (1.0 + 1e-12))
    throw InvalidArgument("potential: bump support must lie inside [0, T]");
  return Potential(std::move(amplitude), T, shape);
}

double Potential::profile(double t) const {
  ProfileTerms p{};
  if (zero_ || !exponent_terms(shape_, lo_, hi_, T_ * T_, t, p)) return 0.0;
  return p.b;
}

double Potential::profile_deriv(double t) const {
  ProfileTerms p{};
  if (zero_ || !exponent_terms(shape_, lo_, hi_, T_ * T_, t, p)) return 0.0;
  return p.b * p.g1;
}

Jet<double, 3> Potential::profile_jet(double t) const {
  Jet<double, 3> j;
  ProfileTerms p{};
  if (zero_ || !exponent_terms(shape_, lo_, hi_, T_ * T_, t, p)) return j;
  j.c[0] = p.b;
  j.c[1] = p.b * p.g1;
  j.c[2] = p.b * (p.g2 + p.g1 * p.g1) / 2.0;
  j.c[3] = p.b * (p.g3 + 3.0 * p.g1 * p.g2 + p.g1 * p.g1 * p.g1) / 6.0;
  return j;
}

std::vector<double> Potential::value(double t) const {
  std::vector<double> out(amplitude_);
  const double b = profile(t);
  for (auto& v : out) v *= b;
  return out;
}

std::vector<double> Potential::deriv(double t) const {
  std::vector<double> out(amplitude_);
  const double b = profile_deriv(t);
  for (auto& v : out) v *= b;
  return out;
}

std::vector<double> Potential::second_deriv(double t) const {
  std::vector<double> out(amplitude_);
  const double b = profile_jet(t).deriv(2);
  for (auto& v : out) v *= b;
  return out;
}

namespace {

// Maximize |g| over (lo, hi): dense grid then Brent on the bracket around the best sample.
template <class G>
std::pair<double, double> maximize(G g, double lo, double hi) {
  constexpr int kSamples = 4096;
  const double h = (hi - lo) / kSamples;
  int best = 1;
  double best_val = -1.0;
  for (int i = 1; i < kSamples; ++i) {
    const double v = std::abs(g(lo + i * h));
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = lo + (best - 1) * h;
  const double b = lo + (best + 1) * h;
  std::uintmax_t iters = 200;
  auto neg = [&](double t) { return -std::abs(g(t)); };
  auto [tm, fm] = boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<double>::digits / 2, iters);
  if (-fm >= best_val) return {tm, -fm};
  return {lo + best * h, best_val};
}

}  // namespace

double Potential::argmax_fdot() const {
  auto [t, v] = maximize([this](double s) { return profile_deriv(s); }, lo_, hi_);
  (void)v;
  return t;
}

Potential make_bump(int dim, std::vector<double> amplitude, double T) {
  return Potential::bump(dim, std::move(amplitude), T);
}

std::vector<double> eval_potential(const Potential& spec, double t) { return spec.value(t); }

std::vector<double> eval_potential_deriv(const Potential& spec, double t) { return spec.deriv(t); }

SupNorms sup_norms(const Potential& spec) {
  if (spec.is_zero()) return {};
  const auto a = spec.amplitude();
  const double anorm = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  auto [tb, bmax] = maximize([&](double t) { return spec.profile(t); }, spec.support_begin(),
                             spec.support_end());
  auto [td, dmax] = maximize([&](double t) { return spec.profile_deriv(t); }, spec.support_begin(),
                             spec.support_end());
  (void)tb;
  (void)td;
  return {anorm * bmax, anorm * dmax};
}

}  // namespace kgvac
