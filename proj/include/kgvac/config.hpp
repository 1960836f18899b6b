#pragma once

// Experiment configuration: a flat YAML document, validated field by field.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgvac/error.hpp"
#include "kgvac/lattice.hpp"
#include "kgvac/mode_core.hpp"
#include "kgvac/potential.hpp"

namespace kgvac {

/// Invalid configuration; field() names the offending key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  int dim = 0;
  double T = 0.0;
  std::vector<double> amplitude;
  std::optional<BumpShape> shape;  ///< center/width/sharpness as fractions of T
  std::vector<double> t_eval;
  std::vector<double> hbar_list;
  double tail_tol = 1e-6;
  double cutoff_radius = 0.0;  ///< > 0 overrides tail_tol
  double ode_tol = 1e-11;
  double quad_tol = 1e-9;
  int n_max = 6;
  std::vector<ModeIndex> oracle_sample;
  AmplitudeSource amplitude_source = AmplitudeSource::semiclassical;
  std::filesystem::path output_dir = "kgvac_out";
  std::uint64_t seed = 1;
  int threads = 1;

  Potential potential() const;
};

/// Parses and validates; throws ConfigError.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& config);

}  // namespace kgvac
