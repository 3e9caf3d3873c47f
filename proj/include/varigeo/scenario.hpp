#pragma once

// Scenario files: JSON describing dimensions, metrics, tensor fields, an
// optional map and the parameter grid. Everything is parsed and checked at
// load time so commands never see a half-valid scenario.
//
// Metrics list only the upper triangle. A row may be written in full with
// empty strings (or null) below the diagonal, or start at the diagonal.
// Jet metrics ("gamma") use the jet variables x<i>_<alpha>.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varigeo/expr.hpp"
#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"
#include "varigeo/submanifold.hpp"

namespace varigeo {

struct Scenario {
  int m = 0;
  int n = 0;
  VariableSetPtr base_vars;
  VariableSetPtr jet_vars;

  std::map<std::string, MetricField> metrics;  // h, g, f, h0, gamma
  std::optional<DistTensor> X;
  std::optional<DistTensor> T;
  std::optional<DistTensor> Y;
  std::optional<ScalarExpr> c;  // absent: perfect square when X is given

  std::vector<ScalarExpr> map;                // analytic map, may be empty
  std::optional<std::vector<double>> map_data;  // node-major values on `grid`
  std::optional<std::vector<double>> x0;      // start value for integration
  std::vector<ScalarExpr> lambda0;            // m^3 entries (σ, β, γ), may be empty

  GridSpec grid;
  std::vector<std::pair<double, double>> sample_box;  // x-block box for condition samples
  std::uint64_t seed = 0;
  FrameOrientation orientation = FrameOrientation::FirstComponentPositive;
  std::map<std::string, double> tolerances;

  std::string hash;  // FNV-1a of the file bytes, 16 hex digits

  bool has_metric(const std::string& name) const { return metrics.count(name) != 0; }
  /// Throws ScenarioError naming the missing entry.
  const MetricField& metric(const std::string& name) const;
  const DistTensor& tensor(const std::string& name) const;
};

Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace varigeo
