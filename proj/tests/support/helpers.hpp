#pragma once

// Small builders shared by the unit and acceptance tests.

#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "varigeo/expr.hpp"
#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"

namespace testkit {

using varigeo::ScalarExpr;

inline varigeo::VariableSetPtr base_vars(int m, int n) {
  return std::make_shared<const varigeo::VariableSet>(varigeo::VariableSet::coordinates(m, n));
}

inline varigeo::VariableSetPtr jet_vars(int m, int n) {
  return std::make_shared<const varigeo::VariableSet>(varigeo::VariableSet::jet(m, n));
}

inline std::vector<std::vector<ScalarExpr>> parse_matrix(const std::vector<std::vector<std::string>>& rows,
                                                         const varigeo::VariableSetPtr& vars) {
  std::vector<std::vector<ScalarExpr>> out;
  for (const auto& row : rows) {
    out.emplace_back();
    for (const auto& s : row) out.back().push_back(s.empty() ? ScalarExpr::constant(0.0) : varigeo::parse_expr(s, vars));
  }
  return out;
}

/// Symmetric metric from full rows; the lower triangle may be left empty.
inline varigeo::MetricField metric(const std::vector<std::vector<std::string>>& rows, int offset,
                                   const varigeo::VariableSetPtr& vars,
                                   varigeo::MetricKind kind = varigeo::MetricKind::Riemannian) {
  return varigeo::MetricField(parse_matrix(rows, vars), offset, kind);
}

inline varigeo::DistTensor tensor(varigeo::TensorShape shape, int m, int n,
                                  const std::vector<std::vector<std::string>>& rows,
                                  const varigeo::VariableSetPtr& vars) {
  return varigeo::DistTensor(shape, m, n, parse_matrix(rows, vars));
}

inline std::vector<ScalarExpr> exprs(const std::vector<std::string>& src, const varigeo::VariableSetPtr& vars) {
  std::vector<ScalarExpr> out;
  for (const auto& s : src) out.push_back(varigeo::parse_expr(s, vars));
  return out;
}

inline varigeo::GridSpec square_grid(int m, double lo, double hi, int points) {
  return varigeo::GridSpec(std::vector<std::pair<double, double>>(static_cast<std::size_t>(m), {lo, hi}),
                           std::vector<int>(static_cast<std::size_t>(m), points));
}

/// Diagonally dominant analytic metric over x1..xn: diagonal 2 + 0.5 sin(..),
/// off-diagonal 0.3 cos(..), so it stays positive-definite everywhere.
inline std::vector<std::vector<std::string>> random_metric_rows(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  auto linear = [&]() {
    std::string s;
    char buf[64];
    for (int k = 1; k <= n; ++k) {
      std::snprintf(buf, sizeof buf, "%s(%.3f)*x%d", k == 1 ? "" : " + ", coef(rng), k);
      s += buf;
    }
    std::snprintf(buf, sizeof buf, " + (%.3f)", coef(rng));
    return s + buf;
  };
  std::vector<std::vector<std::string>> rows(static_cast<std::size_t>(n), std::vector<std::string>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          i == j ? "2 + 0.5*sin(" + linear() + ")" : "0.3*cos(" + linear() + ")";
  return rows;
}

}  // namespace testkit
