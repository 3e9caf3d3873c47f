#pragma once

// Command dispatch behind the CLI and the Python module. Every command
// returns a JSON report with a fixed key order, so identical scenario and
// flags give byte-identical output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varigeo/residuals.hpp"
#include "varigeo/scenario.hpp"

namespace varigeo {

struct CommandOptions {
  std::string kind;     // residual or energy kind
  int theorem = 0;      // verify
  std::string metric = "g";  // christoffel, curvature
  std::optional<double> tol;
  bool refine = false;
  bool analytic = false;  // exact partials of an analytic map
  std::optional<std::uint64_t> seed;
  std::size_t samples = 64;
  std::string dump_csv;
};

struct CommandResult {
  nlohmann::ordered_json report;
  int exit_code = 0;  // 0 ok, 2 tolerance failure
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"christoffel", "curvature", "energy", "residual",
                                                 "integrate",   "gauss",     "lift",   "verify"};
  return names;
}

/// Residual kinds accepted by `residual --kind`.
const std::vector<std::string>& residual_kinds();
/// Energy kinds accepted by `energy --kind`.
const std::vector<std::string>& energy_kinds();

/// Throws varigeo::Error (or a subclass) on bad input; callers map that to
/// exit code 1.
CommandResult run_command(const std::string& command, const Scenario& scenario, const CommandOptions& options);

/// report.dump(2) plus a trailing newline.
std::string report_text(const CommandResult& result);

/// Map partials for a scenario on `grid`: analytic map, tabulated data (on
/// the scenario grid only) or integration of X from x0.
MapPartials scenario_map(const Scenario& scenario, const GridSpec& grid, bool analytic);

/// Named residual of `kind` for the scenario's fields.
ResidualReport named_residual(const std::string& kind, const MapPartials& x, const Scenario& scenario);

/// Per-node CSV: t-coordinates, then residual components.
void write_residual_csv(const ResidualReport& report, const std::string& path);

}  // namespace varigeo
