#pragma once

// Hypothesis checks on (f, g, Y) at sample points, and the Ω = S + A split
// used by the second-order dynamics.
//
// Sample points use the base layout (t, x). Violations are maxima of
// |LHS − RHS| over points and free indices.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"
#include "varigeo/residuals.hpp"

namespace varigeo {

struct ConditionReport {
  std::string id;
  double max_violation = 0.0;
  std::vector<double> worst_point;
  std::size_t samples = 0;

  bool passed(double tol) const { return max_violation <= tol; }
};

/// Y^s_i ∂_k f_sj = ∂_k Y^s_j f_si.
ConditionReport check_condition_16(const MetricField& f, const DistTensor& Y,
                                   const std::vector<std::vector<double>>& points);
/// 17a: f_ij = g_is(Y^s_j − δ^s_j); 17b: g_is Y^s_j = g_js Y^s_i.
std::pair<ConditionReport, ConditionReport> check_condition_17(const MetricField& f, const MetricField& g,
                                                               const DistTensor& Y,
                                                               const std::vector<std::vector<double>>& points);
/// 22: (∇_k Y)^i_j = 0; 23: g_is Y^s_j = g_js Y^s_i.
std::pair<ConditionReport, ConditionReport> check_condition_22_23(const MetricField& g, const DistTensor& Y,
                                                                  const std::vector<std::vector<double>>& points);
/// Y^i_s R^s_jkl = Y^s_j R^i_skl.
ConditionReport check_condition_24(const MetricField& g, const DistTensor& Y,
                                   const std::vector<std::vector<double>>& points);
/// g_is[(∇_k Y)^s_j − (∇_j Y)^s_k] + g_js[(∇_k Y)^s_i − (∇_i Y)^s_k] = 2 g_sp G^p_ij Y^s_k.
ConditionReport check_condition_36(const MetricField& g, const DistTensor& Y,
                                   const std::vector<std::vector<double>>& points);

/// (∇_k Y)^i_j at one point, stored (k, i, j).
Tensor3 covariant_derivative_y(const MetricField& g, const DistTensor& Y, std::span<const double> point);

enum class OmegaKind {
  /// Ω_{jk|p} = g_ip ∂_k Y^i_j + g_ip G^i_ks Y^s_j − g_sj Y^i_k G^s_ip + ½ Y^s_j Y^i_k ∂_p g_is.
  Nonhomogeneous,
  /// Ω_{pk|i} = g_is(∂_k Y^s_p + Y^j_p G^s_jk).
  H0,
};

/// All three tables are stored (pair index 1, pair index 2, free index).
struct OmegaTables {
  Tensor3 omega;
  Tensor3 S;
  Tensor3 A;
};

OmegaTables omega_at(OmegaKind kind, const MetricField& g, const DistTensor& Y, std::span<const double> point);
std::vector<OmegaTables> omega_decomposition(OmegaKind kind, const MetricField& g, const DistTensor& Y,
                                             const std::vector<std::vector<double>>& points);

/// Σ_{ij|k} from the first variation of the symmetrized Y-energy, stored (i, j, k).
Tensor3 sigma_table(const MetricField& g, const DistTensor& Y, std::span<const double> point);
/// ½(Y^s_i ∂_k f_sj − ∂_k Y^s_j f_si), stored (i, j, k).
Tensor3 sigma_plus_s_target(const MetricField& f, const DistTensor& Y, std::span<const double> point);

/// h^{αβ} x^j_α x^k_β A_{jk|p} along a map, per interior node.
ResidualReport antisymmetric_contraction(OmegaKind kind, const MapPartials& x, const MetricField& h,
                                         const MetricField& g, const DistTensor& Y);

/// Uniform points in a box from mt19937_64; u = (draw >> 11)·2^-53.
std::vector<std::vector<double>> sample_box(const std::vector<std::pair<double, double>>& box, std::size_t count,
                                            std::uint64_t seed);

}  // namespace varigeo
