#pragma once

// Configuration-driven experiment runner behind the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgvac/config.hpp"
#include "kgvac/continuum.hpp"

namespace kgvac {

enum class Command { sweep, mode_check, oracle_compare, limits, riemann };

/// "sweep", "mode-check", "oracle-compare", "limits", "riemann".
Command parse_command(const std::string& name);
std::string to_string(Command c);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::vector<LimitReport> reports;  ///< filled by the limits command
};

/// Runs one command and writes its tables into config.output_dir (created if needed).
/// Progress goes to `log` when non-null.
RunSummary run(const ExperimentConfig& config, Command command, std::ostream* log = nullptr);

/// Seventeen significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_real(double v);

/// JSON text for a list of limit reports.
std::string limit_reports_json(const std::vector<LimitReport>& reports);

}  // namespace kgvac
