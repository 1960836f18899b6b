#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kgvac/config.hpp"
#include "kgvac/continuum.hpp"
#include "kgvac/gaussian_oracle.hpp"
#include "kgvac/lattice.hpp"
#include "kgvac/mode_core.hpp"
#include "kgvac/potential.hpp"
#include "kgvac/runner.hpp"

namespace py = pybind11;
using namespace kgvac;

namespace {

ModeIndex to_mode(const std::vector<int>& k) { return ModeIndex::from_span(k); }

std::array<double, 3> padded(const std::vector<double>& x) {
  if (x.empty() || x.size() > 3) throw InvalidArgument("momentum must have 1 to 3 components");
  std::array<double, 3> out{};
  std::copy(x.begin(), x.end(), out.begin());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vacuum persistence and pair statistics for a scalar field in a homogeneous pulse";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<BumpShape>(m, "BumpShape")
      .def(py::init<>())
      .def(py::init([](double c, double w, double s) { return BumpShape{c, w, s}; }), py::arg("center"),
           py::arg("width"), py::arg("sharpness"))
      .def_readwrite("center", &BumpShape::center)
      .def_readwrite("width", &BumpShape::width)
      .def_readwrite("sharpness", &BumpShape::sharpness);

  py::class_<Potential>(m, "Potential")
      .def_static("bump", py::overload_cast<int, std::vector<double>, double>(&Potential::bump), py::arg("dim"),
                  py::arg("amplitude"), py::arg("T"))
      .def_static("bump_with_shape", py::overload_cast<int, std::vector<double>, double, BumpShape>(&Potential::bump),
                  py::arg("dim"), py::arg("amplitude"), py::arg("T"), py::arg("shape"))
      .def_property_readonly("dim", &Potential::dim)
      .def_property_readonly("T", &Potential::period_end)
      .def("value", &Potential::value)
      .def("deriv", &Potential::deriv)
      .def("argmax_fdot", &Potential::argmax_fdot)
      .def("sup_norms", [](const Potential& p) {
        const auto s = sup_norms(p);
        return py::make_tuple(s.f, s.fdot);
      });

  m.def("make_bump", &make_bump, py::arg("dim"), py::arg("amplitude"), py::arg("T"));

  py::class_<Dispersion>(m, "Dispersion")
      .def_readonly("eps", &Dispersion::eps)
      .def_readonly("eps_dot", &Dispersion::eps_dot)
      .def_readonly("eps_ddot", &Dispersion::eps_ddot)
      .def_readonly("omega", &Dispersion::omega)
      .def_readonly("eps0", &Dispersion::eps0);
  m.def("dispersion", [](const std::vector<int>& k, double t, double hbar, const Potential& p) {
    return dispersion(to_mode(k), t, hbar, p);
  }, py::arg("k"), py::arg("t"), py::arg("hbar"), py::arg("spec"));

  py::class_<ModeAmplitudes>(m, "ModeAmplitudes")
      .def_readonly("survive", &ModeAmplitudes::survive)
      .def_readonly("pair", &ModeAmplitudes::pair)
      .def_readonly("q", &ModeAmplitudes::q)
      .def_readonly("p", &ModeAmplitudes::p)
      .def_readonly("residual_bound", &ModeAmplitudes::residual_bound);

  m.def("mode_amplitudes", [](const std::vector<int>& k, double t, double hbar, const Potential& p, double c) {
    const auto table = coeff_table(to_mode(k), hbar, p, t);
    return mode_amplitudes(table, t, hbar, c);
  }, py::arg("k"), py::arg("t"), py::arg("hbar"), py::arg("spec"), py::arg("residual_constant") = 0.0,
        "Truncated survival and pair amplitudes of one mode.");

  py::class_<FixedTimeEvaluator>(m, "FixedTimeEvaluator")
      .def(py::init<const Potential&, double, double>(), py::arg("spec"), py::arg("t"), py::arg("rel_tol") = 1e-9,
           py::keep_alive<1, 2>())
      .def_property_readonly("panel_count", &FixedTimeEvaluator::panel_count)
      .def("evaluate", [](const FixedTimeEvaluator& e, const std::vector<int>& k, double hbar) {
        return e.evaluate(to_mode(k), hbar);
      })
      .def("evaluate_momentum", [](const FixedTimeEvaluator& e, const std::vector<double>& x, double hbar) {
        return e.evaluate_momentum(padded(x), hbar);
      });

  m.def("oracle_probabilities", [](const std::vector<double>& x, double t, double hbar, const Potential& p, double tol) {
    const auto st = evolve_momentum(padded(x), hbar, p, t, tol);
    double e2 = 1.0;
    const auto f = p.value(t);
    for (std::size_t i = 0; i < x.size(); ++i) e2 += (x[i] + f[i]) * (x[i] + f[i]);
    const auto lo = ladder_overlaps(st, std::sqrt(e2) / hbar);
    return py::make_tuple(lo.q(), lo.p());
  }, py::arg("x"), py::arg("t"), py::arg("hbar"), py::arg("spec"), py::arg("tol") = 1e-11,
        "Exact (q, p) of the mode with momentum x from the Gaussian mode evolution.");

  py::enum_<AmplitudeSource>(m, "AmplitudeSource")
      .value("semiclassical", AmplitudeSource::semiclassical)
      .value("oracle", AmplitudeSource::oracle);

  py::class_<ModeSet>(m, "ModeSet")
      .def_readonly("dim", &ModeSet::dim)
      .def_readonly("hbar", &ModeSet::hbar)
      .def_readonly("cutoff_radius", &ModeSet::cutoff_radius)
      .def_readonly("tail_log_mass", &ModeSet::tail_log_mass)
      .def("__len__", [](const ModeSet& s) { return s.modes.size(); });
  m.def("build_mode_set", [](int dim, double hbar, const Potential& p, double tail_tol, double cutoff) {
    ModeSetOptions o;
    o.cutoff_override = cutoff;
    return build_mode_set(dim, hbar, p, tail_tol, o);
  }, py::arg("dim"), py::arg("hbar"), py::arg("spec"), py::arg("tail_tol"), py::arg("cutoff_radius") = 0.0);

  py::class_<PairDistribution>(m, "PairDistribution")
      .def_readonly("t", &PairDistribution::t)
      .def_readonly("hbar", &PairDistribution::hbar)
      .def_readonly("p0", &PairDistribution::p0)
      .def_readonly("pn", &PairDistribution::pn)
      .def_readonly("tail_error", &PairDistribution::tail_error)
      .def_readonly("n_max", &PairDistribution::n_max);
  m.def("pair_distribution", [](const std::vector<std::pair<double, double>>& pq, int n_max, double tail) {
    return pair_distribution(pq, n_max, tail);
  }, py::arg("mode_pq"), py::arg("n_max") = 6,
        py::arg("tail_log_mass") = 0.0);
  m.def("lattice_distribution", [](const ModeSet& s, const Potential& p, double t, AmplitudeSource src, int n_max) {
    return lattice_distribution(s, p, t, src, n_max);
  }, py::arg("set"), py::arg("spec"), py::arg("t"), py::arg("source") = AmplitudeSource::semiclassical,
        py::arg("n_max") = 6);
  m.def("vacuum_persistence", [](const std::vector<std::pair<std::vector<int>, double>>& mq, double tail) {
    std::vector<std::pair<ModeIndex, double>> v;
    for (const auto& [k, q] : mq) v.push_back({to_mode(k), q});
    return vacuum_persistence(v, tail);
  }, py::arg("mode_q"), py::arg("tail_log_mass") = 0.0);
  m.def("product_sum_inequality_check", [](const std::vector<double>& f, int n) {
    return product_sum_inequality_check(f, n);
  }, py::arg("f"), py::arg("n"));

  m.def("riemann_check_1d", &riemann_check_1d);
  m.def("riemann_check_2d", &riemann_check_2d);
  m.def("lambda_intensity", [](int dim, const std::vector<double>& fdot) {
    return lambda_intensity(dim, fdot);
  }, py::arg("dim"), py::arg("fdot"));
  m.def("lambda_at", &lambda_at, py::arg("spec"), py::arg("t"));
  m.def("poisson_law", &poisson_law, py::arg("lam"), py::arg("n"));
  m.def("comparison_sum", &comparison_sum, py::arg("dim"), py::arg("spec"), py::arg("t"), py::arg("hbar"),
        py::arg("R"));

  m.def("run", [](const std::string& yaml_text, const std::string& command, const std::string& output_dir) {
    ExperimentConfig c = parse_config(yaml_text);
    if (!output_dir.empty()) c.output_dir = output_dir;
    const auto s = run(c, parse_command(command));
    std::vector<std::string> files;
    for (const auto& f : s.files) files.push_back(f.string());
    return files;
  }, py::arg("config_yaml"), py::arg("command"), py::arg("output_dir") = "",
        "Run a CLI command from YAML text; returns the written file paths.");
}
