#include "kgvac/mode_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kgvac/error.hpp"
#include "kgvac/quadrature.hpp"

namespace kgvac {

namespace {

constexpr cx kI{0.0, 1.0};

template <int N>
Jet<cx, N> cplx(const Jet<double, N>& a) {
  return complexify(a);
}

struct NodeEval {
  CoeffSet coeffs;
  std::array<cx, 3> slopes;  // time derivatives of A^1_0, A^2_0, A^3_0
};

// The recurrence at one instant. Superscript j / subscript s of the text map to a[s][j].
NodeEval recurrence(const Jet<double, 3>& e3, const std::array<cx, 3>& integrals) {
  const Jet<double, 2> d2 = e3.derivative();
  const Jet<double, 2> e2 = e3.truncate<2>();
  const Jet<double, 2> r2 = d2 / (2.0 * e2);          // eps'/(2 eps)
  const Jet<double, 2> q2 = d2 / (4.0 * e2 * e2);     // eps'/(4 eps^2)
  const Jet<double, 1> e1 = e2.truncate<1>();
  const Jet<double, 1> r1 = r2.truncate<1>();
  const double e0 = e2.value();
  const double r0 = r2.value();

  NodeEval out;
  CoeffSet& A = out.coeffs;
  A(0, 0) = 1.0;

  const Jet<cx, 2> a10 = cplx(q2) * (-kI);
  const Jet<cx, 2> a01 = (cplx(-r2) * a10).integral(integrals[0]).truncate<2>();
  const Jet<cx, 1> a11 =
      (a10.derivative() * kI - cplx(r1) * a01.truncate<1>() * kI) / cplx(2.0 * e1);
  const Jet<cx, 1> a20 = cplx(q2.truncate<1>()) * a10.truncate<1>() * (-kI);
  const Jet<cx, 1> a02 = (cplx(-r1) * a11).integral(integrals[1]).truncate<1>();
  const cx a12 = (kI * a11.derivative().value() + kI * r0 * (2.0 * a20.value() - a02.value())) /
                 (2.0 * e0);
  const cx a30 = -kI * q2.value() * a20.value();
  const cx a21 = (kI * a20.derivative().value() - kI * (2.0 * r0) * a11.value()) / (4.0 * e0);

  A(1, 0) = a10.value();
  A(0, 1) = integrals[0];
  A(1, 1) = a11.value();
  A(2, 0) = a20.value();
  A(0, 2) = integrals[1];
  A(1, 2) = a12;
  A(3, 0) = a30;
  A(0, 3) = integrals[2];
  A(2, 1) = a21;

  out.slopes = {-r0 * A(1, 0), -r0 * A(1, 1), -r0 * A(1, 2)};
  return out;
}

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

// ---------------------------------------------------------------- ModeIndex

ModeIndex::ModeIndex(std::initializer_list<int> values) {
  if (values.size() < 1 || values.size() > 3)
    throw InvalidArgument("mode index must have 1 to 3 components");
  dim = static_cast<int>(values.size());
  std::copy(values.begin(), values.end(), k.begin());
}

ModeIndex ModeIndex::from_span(std::span<const int> values) {
  if (values.size() < 1 || values.size() > 3)
    throw InvalidArgument("mode index must have 1 to 3 components");
  ModeIndex m;
  m.dim = static_cast<int>(values.size());
  std::copy(values.begin(), values.end(), m.k.begin());
  return m;
}

long long ModeIndex::norm2() const {
  long long s = 0;
  for (int i = 0; i < dim; ++i) s += static_cast<long long>(k[i]) * k[i];
  return s;
}

std::array<double, 3> ModeIndex::momentum(double hbar) const {
  std::array<double, 3> x{};
  for (int i = 0; i < dim; ++i) x[i] = hbar * k[i];
  return x;
}

std::string ModeIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? " " : "") << k[i];
  os << ')';
  return os.str();
}

bool mode_less(const ModeIndex& a, const ModeIndex& b) {
  const long long na = a.norm2(), nb = b.norm2();
  if (na != nb) return na < nb;
  return std::lexicographical_compare(a.k.begin(), a.k.begin() + a.dim, b.k.begin(),
                                      b.k.begin() + b.dim);
}

// ---------------------------------------------------------------- dispersion

Jet<double, 3> epsilon_jet(std::span<const double> amplitude, const Jet<double, 3>& profile,
                           std::span<const double, 3> x) {
  Jet<double, 3> s(1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = i < amplitude.size() ? amplitude[i] : 0.0;
    const Jet<double, 3> y = profile * a + x[i];
    s += y * y;
  }
  return sqrt(s);
}

Jet<double, 3> epsilon_jet(const Potential& spec, std::span<const double, 3> x, double t) {
  return epsilon_jet(spec.amplitude(), spec.profile_jet(t), x);
}

Dispersion dispersion(const ModeIndex& k, double t, double hbar, const Potential& spec) {
  if (!(hbar > 0.0)) throw InvalidArgument("dispersion: hbar must be positive");
  if (k.dim != spec.dim()) throw InvalidArgument("dispersion: mode dimension mismatch");
  const auto x = k.momentum(hbar);
  const auto e = epsilon_jet(spec, x, t);
  Dispersion d;
  d.eps = e.value();
  d.eps_dot = e.deriv(1);
  d.eps_ddot = e.deriv(2);
  d.omega = d.eps / hbar;
  d.eps0 = std::sqrt(dot3(x, x) + 1.0);
  return d;
}

// ---------------------------------------------------------------- CoeffTable

CoeffSet coefficients_from_integrals(const Jet<double, 3>& eps,
                                     const std::array<cx, 3>& integrals) {
  return recurrence(eps, integrals).coeffs;
}

CoeffTable coeff_table(const ModeIndex& k, double hbar, const Potential& spec, double t_end,
                       double tol) {
  if (!(hbar > 0.0)) throw InvalidArgument("coeff_table: hbar must be positive");
  if (!(tol > 1e-14 && tol < 1e-4)) throw InvalidArgument("coeff_table: tol must lie in (1e-14, 1e-4)");
  if (k.dim != spec.dim()) throw InvalidArgument("coeff_table: mode dimension mismatch");
  if (!(t_end >= 0.0)) throw InvalidArgument("coeff_table: t_end must be nonnegative");

  CoeffTable tab;
  tab.spec_ = &spec;
  tab.mode_ = k;
  tab.hbar_ = hbar;
  tab.t_end_ = t_end;
  tab.x_ = k.momentum(hbar);
  const double t0 = std::max(0.0, spec.support_begin());
  const double t1 = std::min(t_end, spec.support_end());
  tab.t_start_ = t0;
  if (spec.is_zero() || !(t1 > t0)) return tab;

  const double length = t1 - t0;
  std::array<cx, 3> start{};
  auto first = recurrence(epsilon_jet(spec, tab.x_, t0), start);
  tab.nodes_.push_back(t0);
  tab.values_.push_back(start);
  tab.slopes_.push_back(first.slopes);

  double worst_lo = t0, worst_hi = t1, worst_err = 0.0;
  constexpr int kMaxDepth = 30;

  // Process [a, b] left to right, splitting until every integral meets its share of tol.
  auto panel = [&](auto&& self, double a, double b, int depth) -> void {
    const double h = b - a;
    std::array<Jet<double, 3>, 5> ejet;
    for (int i = 0; i < 5; ++i) ejet[i] = epsilon_jet(spec, tab.x_, a + quad::kPanelNodes[i] * h);
    std::array<std::array<cx, 3>, 5> vals;
    std::array<std::array<cx, 3>, 5> slope;
    vals.fill(tab.values_.back());
    double err = 0.0;
    for (int stage = 0; stage < 3; ++stage) {
      std::array<cx, 5> g;
      for (int i = 0; i < 5; ++i) {
        auto ev = recurrence(ejet[i], vals[i]);
        slope[i] = ev.slopes;
        g[i] = ev.slopes[stage];
      }
      for (int i = 1; i < 5; ++i) vals[i][stage] = vals[0][stage] + quad::cumulative(g, h, i);
      err = std::max(err, std::abs(quad::simpson_fine(g, h) - quad::simpson_coarse(g, h)) / 15.0);
    }
    const double share = tol * h / length;
    if (err > share && depth < kMaxDepth) {
      self(self, a, a + 0.5 * h, depth + 1);
      self(self, a + 0.5 * h, b, depth + 1);
      return;
    }
    if (err > share && err > worst_err) {
      worst_lo = a;
      worst_hi = b;
      worst_err = err;
    }
    tab.error_estimate_ += err;
    for (int i = 1; i < 5; ++i) {
      tab.nodes_.push_back(a + quad::kPanelNodes[i] * h);
      tab.values_.push_back(vals[i]);
      tab.slopes_.push_back(slope[i]);
    }
    tab.nodes_.back() = b;
  };

  constexpr int kInitialPanels = 8;
  for (int p = 0; p < kInitialPanels; ++p) {
    const double a = t0 + length * p / kInitialPanels;
    const double b = p + 1 == kInitialPanels ? t1 : t0 + length * (p + 1) / kInitialPanels;
    panel(panel, a, b, 0);
  }
  if (worst_err > 0.0)
    throw QuadratureError("coeff_table: integrals did not converge for mode " + k.to_string(),
                          worst_lo, worst_hi, worst_err);
  return tab;
}

std::array<cx, 3> CoeffTable::integrals_at(double t) const {
  if (nodes_.empty() || t <= nodes_.front()) return {};
  if (t >= nodes_.back()) return values_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double h = nodes_[i + 1] - nodes_[i];
  const double s = (t - nodes_[i]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  std::array<cx, 3> out;
  for (int j = 0; j < 3; ++j)
    out[j] = h00 * values_[i][j] + h10 * h * slopes_[i][j] + h01 * values_[i + 1][j] +
             h11 * h * slopes_[i + 1][j];
  return out;
}

CoeffSet CoeffTable::at(double t) const {
  const bool frozen = spec_ == nullptr || t_end_ >= spec_->support_end() || spec_->is_zero();
  if (t > t_end_ * (1.0 + 1e-14) + 1e-300 && !frozen)
    throw InvalidArgument("coeff_table: query time beyond table range");
  if (spec_ == nullptr || spec_->is_zero()) {
    CoeffSet c;
    c(0, 0) = 1.0;
    return c;
  }
  return recurrence(epsilon_jet(*spec_, x_, t), integrals_at(t)).coeffs;
}

// ---------------------------------------------------------------- amplitudes

cx survival_amplitude(const CoeffTable& table, double t, double hbar) {
  const CoeffSet c = table.at(t);
  return c(0, 0) + hbar * (c(0, 1) + hbar * (c(0, 2) + hbar * c(0, 3)));
}

cx pair_amplitude(const CoeffTable& table, double t, double hbar) {
  const CoeffSet c = table.at(t);
  return hbar * (c(1, 0) + hbar * (c(1, 1) + hbar * c(1, 2)));
}

double amplitude_square_expansion(const ModeIndex& k, double t, double hbar,
                                  const Potential& spec) {
  const Dispersion d = dispersion(k, t, hbar, spec);
  const double r = d.eps_dot / (d.eps * d.eps);
  return 1.0 - hbar * hbar * r * r / 16.0;
}

double residual_bound(double residual_constant, double hbar, double eps0) {
  const double e2 = eps0 * eps0;
  return residual_constant * hbar * hbar * hbar / (e2 * e2);
}

ModeAmplitudes mode_amplitudes(const CoeffTable& table, double t, double hbar,
                               double residual_constant) {
  ModeAmplitudes m;
  m.survive = survival_amplitude(table, t, hbar);
  m.pair = pair_amplitude(table, t, hbar);
  m.q = std::norm(m.survive);
  m.p = std::norm(m.pair);
  const auto x = table.mode().momentum(table.hbar());
  m.residual_bound = residual_bound(residual_constant, hbar, std::sqrt(dot3(x, x) + 1.0));
  return m;
}

// ---------------------------------------------------------------- FixedTimeEvaluator
//
// Real reduced form of the recurrence. With q = eps'/(4 eps^2), r = eps'/(2 eps),
// I = Im A^1_0 and I3 = Im A^3_0:
//   A^0_1 = -i q,  A^1_1 = (q' + r I) / (2 eps),  A^2_0 = -(q^2 + I^2)/2,
//   A^2_1 = i (A^1_1' + r (I^2 - 3 q^2)/2) / (2 eps),  I' = r q,  I3' = -r Im A^2_1.

namespace {

struct Reduced {
  double q = 0.0, b11 = 0.0, b21 = 0.0, slope1 = 0.0, slope3 = 0.0;
};

Reduced reduced(const Jet<double, 3>& e3, double I) {
  const Jet<double, 2> d2 = e3.derivative();
  const Jet<double, 2> e2 = e3.truncate<2>();
  const Jet<double, 2> q2 = d2 / (4.0 * e2 * e2);
  const Jet<double, 1> r1 = (d2 / (2.0 * e2)).truncate<1>();
  const double r0 = r1.value();
  Jet<double, 1> Ij(I);
  Ij.c[1] = r0 * q2.value();
  const Jet<double, 1> b11 = (q2.derivative() + r1 * Ij) / (2.0 * e2.truncate<1>());
  Reduced out;
  out.q = q2.value();
  out.b11 = b11.value();
  out.b21 = (b11.derivative().value() + r0 * 0.5 * (I * I - 3.0 * out.q * out.q)) / (2.0 * e2.value());
  out.slope1 = Ij.c[1];
  out.slope3 = -r0 * out.b21;
  return out;
}

}  // namespace

FixedTimeEvaluator::FixedTimeEvaluator(const Potential& spec, double t, double rel_tol)
    : spec_(&spec), t_(t), t_stop_(std::min(t, spec.support_end())), jet_at_t_(spec.profile_jet(t)) {
  if (!(rel_tol > 0.0 && rel_tol < 1e-2))
    throw InvalidArgument("FixedTimeEvaluator: rel_tol must lie in (0, 1e-2)");
  const double t0 = std::max(0.0, spec.support_begin());
  if (spec.is_zero() || !(t_stop_ > t0)) {
    panel_edges_ = {t0};
    return;
  }

  // Probe momenta: along the amplitude direction through the resonance x = -f.
  const auto amp = spec.amplitude();
  std::array<double, 3> ahat{};
  double an = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) an += amp[i] * amp[i];
  an = std::sqrt(an);
  for (std::size_t i = 0; i < amp.size(); ++i) ahat[i] = amp[i] / an;
  std::vector<std::array<double, 3>> probes;
  for (double b : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0, -1.0, 2.0, 4.0}) {
    std::array<double, 3> x{};
    for (int i = 0; i < 3; ++i) x[i] = -an * b * ahat[i];
    probes.push_back(x);
  }
  if (spec.dim() >= 2) {
    std::array<double, 3> perp{-ahat[1], ahat[0], 0.0};
    if (std::abs(perp[0]) + std::abs(perp[1]) < 1e-12) perp = {1.0, 0.0, 0.0};
    for (double b : {0.5, 1.0}) {
      std::array<double, 3> x{};
      for (int i = 0; i < 3; ++i) x[i] = -an * 0.5 * ahat[i] + b * perp[i];
      probes.push_back(x);
    }
  }

  constexpr int kInitialPanels = 16;
  panel_edges_.resize(kInitialPanels + 1);
  for (int p = 0; p <= kInitialPanels; ++p)
    panel_edges_[p] = p == kInitialPanels ? t_stop_ : t0 + (t_stop_ - t0) * p / kInitialPanels;

  auto cache = [&]() {
    jets_.resize(panel_count());
    for (std::size_t p = 0; p < panel_count(); ++p) {
      const double a = panel_edges_[p], h = panel_edges_[p + 1] - a;
      for (int i = 0; i < 5; ++i) jets_[p][i] = spec.profile_jet(a + quad::kPanelNodes[i] * h);
    }
  };
  cache();

  const double length = t_stop_ - t0;
  for (int iter = 0; iter < 40; ++iter) {
    std::vector<char> split(panel_count(), 0);
    bool any = false;
    for (const auto& x : probes) {
      std::vector<PanelSums> sums(panel_count());
      double i1 = 0.0, mag1 = 0.0, mag3 = 0.0;
      for (std::size_t p = 0; p < panel_count(); ++p) {
        sums[p] = integrate_panel(p, x, i1);
        i1 += sums[p].i1;
        mag1 += sums[p].mag1;
        mag3 += sums[p].mag3;
      }
      for (std::size_t p = 0; p < panel_count(); ++p) {
        const double w = (panel_edges_[p + 1] - panel_edges_[p]) / length;
        const bool bad = sums[p].err1 > rel_tol * w * mag1 || sums[p].err3 > rel_tol * w * mag3;
        if (bad) {
          split[p] = 1;
          any = true;
        }
      }
    }
    if (!any) return;
    std::vector<double> edges;
    for (std::size_t p = 0; p < panel_count(); ++p) {
      edges.push_back(panel_edges_[p]);
      if (split[p]) edges.push_back(0.5 * (panel_edges_[p] + panel_edges_[p + 1]));
    }
    edges.push_back(panel_edges_.back());
    panel_edges_ = std::move(edges);
    cache();
  }
  throw QuadratureError("FixedTimeEvaluator: shared grid did not converge", t0, t_stop_, rel_tol);
}

FixedTimeEvaluator::PanelSums FixedTimeEvaluator::integrate_panel(std::size_t p,
                                                                  std::span<const double, 3> x,
                                                                  double i1_start) const {
  const auto amp = spec_->amplitude();
  const double h = panel_edges_[p + 1] - panel_edges_[p];
  std::array<Jet<double, 3>, 5> e;
  std::array<double, 5> g1, g3, a1, a3;
  for (int i = 0; i < 5; ++i) {
    e[i] = epsilon_jet(amp, jets_[p][i], x);
    const auto r = reduced(e[i], 0.0);
    g1[i] = r.slope1;
    a1[i] = std::abs(g1[i]);
  }
  std::array<double, 5> I;
  I[0] = i1_start;
  for (int i = 1; i < 5; ++i) I[i] = i1_start + quad::cumulative(g1, h, i);
  for (int i = 0; i < 5; ++i) {
    g3[i] = reduced(e[i], I[i]).slope3;
    a3[i] = std::abs(g3[i]);
  }
  PanelSums s;
  s.i1 = quad::cumulative(g1, h, 4);
  s.i3 = quad::cumulative(g3, h, 4);
  s.err1 = std::abs(quad::simpson_fine(g1, h) - quad::simpson_coarse(g1, h)) / 15.0;
  s.err3 = std::abs(quad::simpson_fine(g3, h) - quad::simpson_coarse(g3, h)) / 15.0;
  s.mag1 = quad::simpson_fine(a1, h);
  s.mag3 = quad::simpson_fine(a3, h);
  return s;
}

std::array<cx, 3> FixedTimeEvaluator::integrals(std::span<const double, 3> x) const {
  double i1 = 0.0, i3 = 0.0;
  if (!jets_.empty()) {
    const auto amp = spec_->amplitude();
    for (std::size_t p = 0; p < jets_.size(); ++p) {
      const double h = panel_edges_[p + 1] - panel_edges_[p];
      std::array<Jet<double, 3>, 5> e;
      std::array<double, 5> g1, g3;
      for (int i = 0; i < 5; ++i) {
        e[i] = epsilon_jet(amp, jets_[p][i], x);
        const Jet<double, 2> d2 = e[i].derivative();
        const double ev = e[i].value(), dv = d2.value();
        g1[i] = dv * dv / (8.0 * ev * ev * ev);
      }
      for (int i = 0; i < 5; ++i) {
        const double I = i == 0 ? i1 : i1 + quad::cumulative(g1, h, i);
        g3[i] = reduced(e[i], I).slope3;
      }
      i1 += quad::cumulative(g1, h, 4);
      i3 += quad::cumulative(g3, h, 4);
    }
  }
  const Reduced r = reduced(epsilon_jet(spec_->amplitude(), jet_at_t_, x), i1);
  const double a20 = -0.5 * (r.q * r.q + i1 * i1);
  return {cx(0.0, i1), cx(a20, 0.0), cx(0.0, i3)};
}

ModeAmplitudes FixedTimeEvaluator::evaluate_momentum(std::span<const double, 3> x, double hbar,
                                                     double residual_constant) const {
  ModeAmplitudes m;
  m.residual_bound = residual_bound(residual_constant, hbar,
                                    std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + 1.0));
  if (jets_.empty()) return m;
  const auto ints = integrals(x);
  const double I = ints[0].imag(), I3 = ints[2].imag();
  const Reduced r = reduced(epsilon_jet(spec_->amplitude(), jet_at_t_, x), I);
  const double h2 = hbar * hbar;
  m.survive = cx(1.0 + h2 * ints[1].real(), hbar * I + h2 * hbar * I3);
  m.pair = cx(h2 * r.b11, -hbar * r.q + h2 * hbar * r.b21);
  m.q = std::norm(m.survive);
  m.p = std::norm(m.pair);
  return m;
}

ModeAmplitudes FixedTimeEvaluator::evaluate(const ModeIndex& k, double hbar,
                                            double residual_constant) const {
  if (k.dim != spec_->dim()) throw InvalidArgument("FixedTimeEvaluator: mode dimension mismatch");
  const auto x = k.momentum(hbar);
  return evaluate_momentum(x, hbar, residual_constant);
}

}  // namespace kgvac
