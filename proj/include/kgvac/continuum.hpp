#pragma once

// Riemann-sum limits, the limit intensity lambda(t), Poisson laws and the
// dimension-dependent classical-limit verdict.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgvac/lattice.hpp"
#include "kgvac/potential.hpp"

namespace kgvac {

/// sum_{k in Z} hbar / ((hbar k)^2 + 1), explicit terms plus an Euler-Maclaurin tail.
double riemann_check_1d(double hbar);
/// sum_{k in Z^2} hbar^2 / ((hbar |k|)^2 + 1)^2, closed-form inner sums, Euler-Maclaurin outer tail.
double riemann_check_2d(double hbar);
/// Radius |hbar k| up to which the Riemann sums above add terms explicitly.
double riemann_explicit_radius(double hbar);
/// int_{R^2} d^2x / (|x|^2 + 1)^2 by nested adaptive quadrature.
double riemann_integral_2d();

/// (1/16) int <fdot, x>^2 / (|x|^2 + 1)^3 d^n x by nested adaptive quadrature (n = 2, 3).
double lambda_intensity(int dim, std::span<const double> fdot);
/// Radial constant c_n with lambda = |fdot|^2 c_n / 16, by one-dimensional quadrature.
double lambda_radial_constant(int dim);
/// lambda at time t of a potential (0 when fdot(t) is zero).
double lambda_at(const Potential& spec, double t);

/// lambda^n e^{-lambda} / n!, in log space.
double poisson_law(double lambda, int n);

/// Treats |fdot(t)| < 1e-12 |fdot|_inf as zero.
bool fdot_vanishes(const Potential& spec, double t);

struct Extrapolation {
  double value = 0.0;
  double order = 0.0;
  bool order_fitted = false;  ///< false: fallback order used
};

/// Richardson extrapolation to h -> 0 from the last three points of a decreasing geometric h list;
/// the order is fitted from the three points when they show a consistent pattern, otherwise
/// `fallback_order` is used on the last two.
Extrapolation richardson(std::span<const double> h, std::span<const double> values, double fallback_order);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

enum class Verdict { limit_one, limit_exp, limit_zero };
std::string to_string(Verdict v);

struct SweepRow {
  double hbar = 0.0;
  double p0 = 1.0;
  std::vector<double> pn;
  double cutoff = 0.0;
  double tail_error = 0.0;
};

struct LimitReport {
  int dim = 1;
  double t = 0.0;
  double lambda = 0.0;
  double p0_extrapolated = 1.0;
  double extrapolation_order = 0.0;
  bool order_fitted = false;
  double relative_deviation = 0.0;  ///< |p0_extrapolated - e^{-lambda}| / e^{-lambda}
  std::vector<double> poisson;      ///< n = 0 .. n_max
  std::vector<std::vector<double>> poisson_relative_error;  ///< per sweep row, n = 1 .. n_max
  std::vector<double> scaled_log_p0;                      ///< hbar * (-log p0) per row
  Verdict verdict = Verdict::limit_one;
  bool evidence_consistent = false;
  std::vector<SweepRow> sweep;
};

/// Classifies the hbar -> 0 limit and attaches the numerical evidence.
/// Throws InvalidArgument for fewer than three hbar values or a non-decreasing list.
LimitReport limit_verdict(int dim, const Potential& spec, double t,
                          std::span<const std::pair<double, PairDistribution>> sweep);

/// hbar^2 sum_{|hbar k| <= R} eps'^2 / (16 eps^4) over Z^dim.
double comparison_sum(int dim, const Potential& spec, double t, double hbar, double R);

struct DecaySample {
  double hbar = 0.0;
  double eps0 = 1.0;
  double q = 1.0;
};

/// safety * max |1 - q| eps0^4 / hbar^2.
double calibrate_decay_constant(std::span<const DecaySample> samples, double safety = 4.0);
/// e^{K hbar (pi + hbar)} - 1.
double persistence_deficit_bound(double K, double hbar);

}  // namespace kgvac
