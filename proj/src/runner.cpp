#include "kgvac/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include "json.hpp"

#include "kgvac/gaussian_oracle.hpp"
#include "kgvac/lattice.hpp"

namespace kgvac {
namespace {

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  Csv& operator<<(double v) { return cell(format_real(v)); }
  Csv& operator<<(int v) { return cell(std::to_string(v)); }
  Csv& operator<<(const std::string& v) { return cell(v); }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  Csv& cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ofstream out_;
  bool first_ = true;
};

void note(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n';
}

std::vector<double> times_or_default(const ExperimentConfig& c) {
  if (!c.t_eval.empty()) return c.t_eval;
  return {c.T};
}

void require_hbars(const ExperimentConfig& c, std::size_t minimum) {
  if (c.hbar_list.size() < minimum)
    throw ConfigError("hbar_list", "this command needs at least " + std::to_string(minimum) + " values");
}

ModeSet mode_set_for(const ExperimentConfig& c, const Potential& spec, double hbar) {
  ModeSetOptions o;
  o.cutoff_override = c.cutoff_radius;
  return build_mode_set(c.dim, hbar, spec, c.tail_tol, o);
}

// Explicit sample, or a seeded draw of six modes with |hbar k| <= 2 at the largest hbar.
std::vector<ModeIndex> sample_modes(const ExperimentConfig& c) {
  if (!c.oracle_sample.empty()) return c.oracle_sample;
  std::mt19937_64 rng(c.seed);
  const double h = c.hbar_list.front();
  const int K = std::max(1, static_cast<int>(2.0 / h));
  std::uniform_int_distribution<int> pick(-K, K);
  std::vector<ModeIndex> out;
  while (out.size() < 6) {
    ModeIndex m;
    m.dim = c.dim;
    for (int i = 0; i < c.dim; ++i) m.k[i] = pick(rng);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

struct SweepPoint {
  double hbar;
  double t;
  ModeSet set;  // modes released after use; radius and tail kept
  PairDistribution dist;
};

std::vector<SweepPoint> compute_sweep(const ExperimentConfig& c, const Potential& spec, std::ostream* log) {
  std::vector<SweepPoint> points;
  for (double h : c.hbar_list) {
    ModeSet set = mode_set_for(c, spec, h);
    note(log, "hbar " + format_real(h) + ": " + std::to_string(set.modes.size()) + " modes, cutoff " +
                  format_real(set.cutoff_radius));
    for (double t : times_or_default(c)) {
      PairDistribution d = lattice_distribution(set, spec, t, c.amplitude_source, c.n_max, c.threads,
                                                c.quad_tol, c.ode_tol);
      ModeSet meta;
      meta.dim = set.dim;
      meta.hbar = set.hbar;
      meta.cutoff_radius = set.cutoff_radius;
      meta.tail_log_mass = set.tail_log_mass;
      points.push_back({h, t, std::move(meta), d});
    }
  }
  // t outer, hbar inner (decreasing)
  std::stable_sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.t < b.t;
  });
  return points;
}

std::filesystem::path write_sweep(const ExperimentConfig& c, const std::vector<SweepPoint>& points) {
  std::vector<std::string> header = {"dim", "hbar", "t", "cutoff", "tail_error", "p0"};
  for (int n = 1; n <= c.n_max; ++n) header.push_back("p" + std::to_string(n));
  const auto path = c.output_dir / "sweep.csv";
  Csv csv(path, header);
  for (const auto& p : points) {
    csv << c.dim << p.hbar << p.t << p.set.cutoff_radius << p.dist.tail_error << p.dist.p0;
    for (double v : p.dist.pn) csv << v;
    csv.end();
  }
  return path;
}

std::filesystem::path run_mode_check(const ExperimentConfig& c, const Potential& spec, std::ostream* log) {
  require_hbars(c, 1);
  const auto modes = sample_modes(c);
  const auto times = times_or_default(c);
  const double t_end = *std::max_element(times.begin(), times.end());
  std::vector<std::string> header = {"dim", "hbar", "t", "cutoff", "tail_error", "mode", "eps0"};
  for (int s = 0; s <= 3; ++s)
    for (int j = 0; s + j <= 3; ++j)
      if (s + j > 0) header.push_back("A" + std::to_string(s) + "_" + std::to_string(j) + "_scaled");
  header.push_back("max_scaled");
  header.push_back("lemma_ratio");
  const auto path = c.output_dir / "mode_check.csv";
  Csv csv(path, header);
  for (double h : c.hbar_list) {
    note(log, "mode-check hbar " + format_real(h));
    for (const auto& k : modes) {
      const auto table = coeff_table(k, h, spec, t_end, c.quad_tol);
      const double e0 = dispersion(k, 0.0, h, spec).eps0;
      for (double t : times) {
        const CoeffSet a = table.at(t);
        csv << c.dim << h << t << 0.0 << 0.0 << k.to_string() << e0;
        double worst = 0.0;
        for (int s = 0; s <= 3; ++s)
          for (int j = 0; s + j <= 3; ++j) {
            if (s + j == 0) continue;
            const int pw = s > 0 ? 2 * s + j : 2 + j;
            const double v = std::abs(a(s, j)) * std::pow(e0, pw);
            worst = std::max(worst, v);
            csv << v;
          }
        const ModeAmplitudes m = mode_amplitudes(table, t, h, 0.0);
        csv << worst << std::abs(1.0 - m.q) * std::pow(e0, 4) / (h * h);
        csv.end();
      }
    }
  }
  return path;
}

std::filesystem::path run_oracle_compare(const ExperimentConfig& c, const Potential& spec, std::ostream* log) {
  require_hbars(c, 2);
  const auto modes = sample_modes(c);
  const auto times = times_or_default(c);
  struct Row {
    double h, t, qs, qo;
    std::string mode;
  };
  std::vector<Row> rows;
  for (const auto& k : modes)
    for (double t : times)
      for (double h : c.hbar_list) {
        FixedTimeEvaluator ev(spec, t, c.quad_tol);
        const auto semi = ev.evaluate(k, h);
        const auto st = evolve_mode(k, h, spec, t, c.ode_tol);
        const auto lo = ladder_overlaps(st, dispersion(k, t, h, spec).omega);
        rows.push_back({h, t, semi.q, lo.q(), k.to_string()});
      }
  note(log, "oracle-compare: " + std::to_string(rows.size()) + " rows");
  const auto path = c.output_dir / "oracle.csv";
  Csv csv(path, {"dim", "hbar", "t", "cutoff", "tail_error", "mode", "q_semicl", "q_oracle", "abs_err", "fitted_order"});
  const std::size_t nh = c.hbar_list.size();
  for (std::size_t g = 0; g < rows.size(); g += nh) {
    std::vector<double> hs, errs;
    bool positive = true;
    for (std::size_t i = g; i < g + nh; ++i) {
      hs.push_back(rows[i].h);
      errs.push_back(std::abs(rows[i].qs - rows[i].qo));
      positive = positive && errs.back() > 0.0;
    }
    const double order = positive ? loglog_slope(hs, errs) : std::nan("");
    for (std::size_t i = g; i < g + nh; ++i) {
      const auto& r = rows[i];
      csv << c.dim << r.h << r.t << 0.0 << 0.0 << r.mode << r.qs << r.qo << std::abs(r.qs - r.qo) << order;
      csv.end();
    }
  }
  return path;
}

std::filesystem::path run_riemann(const ExperimentConfig& c, std::ostream* log) {
  require_hbars(c, 1);
  const auto path = c.output_dir / "riemann.csv";
  Csv csv(path, {"dim", "hbar", "t", "cutoff", "tail_error", "value", "limit", "abs_err", "upper_bound"});
  const double pi = std::numbers::pi;
  for (int dim : {1, 2})
    for (double h : c.hbar_list) {
      const double v = dim == 1 ? riemann_check_1d(h) : riemann_check_2d(h);
      const double bound = dim == 1 ? pi + h : pi + 2 * h;
      csv << dim << h << 0.0 << riemann_explicit_radius(h) << 0.0 << v << pi << std::abs(v - pi) << bound;
      csv.end();
    }
  note(log, "riemann: " + std::to_string(2 * c.hbar_list.size()) + " rows");
  return path;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "sweep") return Command::sweep;
  if (name == "mode-check") return Command::mode_check;
  if (name == "oracle-compare") return Command::oracle_compare;
  if (name == "limits") return Command::limits;
  if (name == "riemann") return Command::riemann;
  throw InvalidArgument("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::sweep: return "sweep";
    case Command::mode_check: return "mode-check";
    case Command::oracle_compare: return "oracle-compare";
    case Command::limits: return "limits";
    default: return "riemann";
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string limit_reports_json(const std::vector<LimitReport>& reports) {
  using nlohmann::json;
  auto real = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  json arr = json::array();
  for (const auto& r : reports) {
    json j;
    j["dim"] = r.dim;
    j["t"] = r.t;
    j["lambda"] = r.lambda;
    j["exp_minus_lambda"] = std::exp(-r.lambda);
    j["p0_extrapolated"] = real(r.p0_extrapolated);
    j["extrapolation_order"] = r.extrapolation_order;
    j["order_fitted"] = r.order_fitted;
    j["relative_deviation"] = real(r.relative_deviation);
    j["poisson"] = r.poisson;
    j["verdict"] = to_string(r.verdict);
    j["evidence_consistent"] = r.evidence_consistent;
    json rows = json::array();
    for (std::size_t i = 0; i < r.sweep.size(); ++i) {
      const auto& s = r.sweep[i];
      json row;
      row["hbar"] = s.hbar;
      row["p0"] = s.p0;
      row["pn"] = s.pn;
      row["cutoff"] = s.cutoff;
      row["tail_error"] = s.tail_error;
      row["scaled_log_p0"] = real(r.scaled_log_p0[i]);
      json errs = json::array();
      for (double e : r.poisson_relative_error[i]) errs.push_back(real(e));
      row["poisson_relative_error"] = errs;
      rows.push_back(row);
    }
    j["sweep"] = rows;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

RunSummary run(const ExperimentConfig& config, Command command, std::ostream* log) {
  validate(config);
  const std::size_t needed = command == Command::limits ? 3 : command == Command::oracle_compare ? 2 : 1;
  require_hbars(config, needed);
  std::filesystem::create_directories(config.output_dir);
  const Potential spec = config.potential();
  RunSummary summary;
  switch (command) {
    case Command::sweep: {
      require_hbars(config, 1);
      const auto points = compute_sweep(config, spec, log);
      summary.files.push_back(write_sweep(config, points));
      break;
    }
    case Command::mode_check:
      summary.files.push_back(run_mode_check(config, spec, log));
      break;
    case Command::oracle_compare:
      summary.files.push_back(run_oracle_compare(config, spec, log));
      break;
    case Command::riemann:
      summary.files.push_back(run_riemann(config, log));
      break;
    case Command::limits: {
      require_hbars(config, 3);
      const auto points = compute_sweep(config, spec, log);
      summary.files.push_back(write_sweep(config, points));
      for (double t : times_or_default(config)) {
        std::vector<std::pair<double, PairDistribution>> sweep;
        for (const auto& p : points)
          if (p.t == t) sweep.push_back({p.hbar, p.dist});
        LimitReport r = limit_verdict(config.dim, spec, t, sweep);
        for (std::size_t i = 0; i < r.sweep.size(); ++i) r.sweep[i].cutoff = 0.0;
        for (const auto& p : points)
          if (p.t == t)
            for (auto& row : r.sweep)
              if (row.hbar == p.hbar) row.cutoff = p.set.cutoff_radius;
        note(log, "t " + format_real(t) + ": " + to_string(r.verdict));
        summary.reports.push_back(std::move(r));
      }
      const auto path = config.output_dir / "limits.json";
      std::ofstream out(path);
      if (!out) throw Error("cannot write " + path.string());
      out << limit_reports_json(summary.reports);
      summary.files.push_back(path);
      break;
    }
  }
  return summary;
}

}  // namespace kgvac
