#include "kgvac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace kgvac {
namespace {

const std::set<std::string> kKnown = {"dim",        "T",          "amplitude",     "shape",     "t_eval",
                                      "hbar_list",  "tail_tol",   "cutoff_radius", "ode_tol",   "quad_tol",
                                      "n_max",      "oracle_sample", "amplitude_source", "output_dir", "seed",
                                      "threads"};

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "expected a scalar of the right type");
  }
}

std::vector<double> real_list(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(field, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, field));
  return out;
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

Potential ExperimentConfig::potential() const {
  if (shape) return Potential::bump(dim, amplitude, T, BumpShape{shape->center * T, shape->width * T, shape->sharpness});
  return Potential::bump(dim, amplitude, T);
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("<document>", "expected a mapping of keys to values");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kKnown.count(key)) throw ConfigError(key, "unknown key");
  }

  ExperimentConfig c;
  // No defaults for the physical setup.
  for (const char* key : {"dim", "T", "amplitude"})
    if (!root[key]) throw ConfigError(key, "required key is missing");
  c.dim = scalar<int>(root["dim"], "dim");
  c.T = scalar<double>(root["T"], "T");
  c.amplitude = real_list(root["amplitude"], "amplitude");
  if (root["shape"]) {
    const auto& s = root["shape"];
    require(s.IsMap(), "shape", "expected a mapping with center, width, sharpness");
    BumpShape b;
    if (s["center"]) b.center = scalar<double>(s["center"], "shape.center");
    if (s["width"]) b.width = scalar<double>(s["width"], "shape.width");
    if (s["sharpness"]) b.sharpness = scalar<double>(s["sharpness"], "shape.sharpness");
    c.shape = b;
  }
  if (root["t_eval"]) c.t_eval = real_list(root["t_eval"], "t_eval");
  if (root["hbar_list"]) c.hbar_list = real_list(root["hbar_list"], "hbar_list");
  if (root["tail_tol"]) c.tail_tol = scalar<double>(root["tail_tol"], "tail_tol");
  if (root["cutoff_radius"]) c.cutoff_radius = scalar<double>(root["cutoff_radius"], "cutoff_radius");
  if (root["ode_tol"]) c.ode_tol = scalar<double>(root["ode_tol"], "ode_tol");
  if (root["quad_tol"]) c.quad_tol = scalar<double>(root["quad_tol"], "quad_tol");
  if (root["n_max"]) c.n_max = scalar<int>(root["n_max"], "n_max");
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (root["threads"]) c.threads = scalar<int>(root["threads"], "threads");
  if (root["output_dir"]) c.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
  if (root["amplitude_source"]) {
    const auto s = scalar<std::string>(root["amplitude_source"], "amplitude_source");
    if (s == "semiclassical")
      c.amplitude_source = AmplitudeSource::semiclassical;
    else if (s == "oracle")
      c.amplitude_source = AmplitudeSource::oracle;
    else
      throw ConfigError("amplitude_source", "expected 'semiclassical' or 'oracle'");
  }
  if (root["oracle_sample"]) {
    const auto& list = root["oracle_sample"];
    require(list.IsSequence(), "oracle_sample", "expected a list of integer vectors");
    for (const auto& item : list) {
      require(item.IsSequence(), "oracle_sample", "each mode must be a list of integers");
      std::vector<int> k;
      for (const auto& v : item) k.push_back(scalar<int>(v, "oracle_sample"));
      require(static_cast<int>(k.size()) == c.dim, "oracle_sample", "mode length must equal dim");
      c.oracle_sample.push_back(ModeIndex::from_span(k));
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  require(c.dim >= 1 && c.dim <= 3, "dim", "must be 1, 2 or 3");
  require(c.T > 0.0 && std::isfinite(c.T), "T", "must be positive");
  require(static_cast<int>(c.amplitude.size()) == c.dim, "amplitude", "length must equal dim");
  for (double a : c.amplitude) require(std::isfinite(a), "amplitude", "entries must be finite");
  if (c.shape) {
    require(c.shape->width > 0.0, "shape.width", "must be positive");
    require(c.shape->sharpness > 0.0, "shape.sharpness", "must be positive");
    require(c.shape->center - 0.5 * c.shape->width >= 0.0 && c.shape->center + 0.5 * c.shape->width <= 1.0,
            "shape", "support must lie inside [0, 1] (fractions of T)");
  }
  for (double t : c.t_eval) require(t >= 0.0 && t <= 2.0 * c.T, "t_eval", "times must lie in [0, 2T]");
  for (std::size_t i = 0; i < c.hbar_list.size(); ++i) {
    require(c.hbar_list[i] > 0.0 && std::isfinite(c.hbar_list[i]), "hbar_list", "values must be positive");
    if (i > 0) require(c.hbar_list[i] < c.hbar_list[i - 1], "hbar_list", "must be strictly decreasing");
  }
  if (c.cutoff_radius <= 0.0)
    require(c.tail_tol > 1e-12 && c.tail_tol <= 1e-2, "tail_tol", "must lie in (1e-12, 1e-2]");
  require(c.cutoff_radius >= 0.0, "cutoff_radius", "must be non-negative");
  require(c.ode_tol >= 1e-14 && c.ode_tol <= 1e-6, "ode_tol", "must lie in [1e-14, 1e-6]");
  require(c.quad_tol >= 1e-14 && c.quad_tol <= 1e-4, "quad_tol", "must lie in [1e-14, 1e-4]");
  require(c.n_max >= 1 && c.n_max <= 40, "n_max", "must lie in [1, 40]");
  require(c.threads >= 1 && c.threads <= 256, "threads", "must lie in [1, 256]");
  for (const auto& k : c.oracle_sample) require(k.dim == c.dim, "oracle_sample", "mode length must equal dim");
}

}  // namespace kgvac
