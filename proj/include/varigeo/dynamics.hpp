#pragma once

// First-order systems ∂x^i/∂t^α = X^i_α(t, x): closure check, integration on
// a parameter grid, and residuals of the implicit systems x^j_α Y^i_j = T^i_α.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"
#include "varigeo/residuals.hpp"

namespace varigeo {

/// Closure of ∂_β X^i_α + ∂_j X^i_α X^j_β under α <-> β, split into the
/// x-part (∂_j X^i_α X^j_β antisymmetrized) and the t-part (∂_β X^i_α
/// antisymmetrized). `max_defect` is the full condition.
struct IntegrabilityReport {
  double max_defect = 0.0;
  double x_part = 0.0;
  double t_part = 0.0;
  std::vector<double> worst_point;
  std::size_t samples = 0;
};

/// Points are base-layout (t, x).
IntegrabilityReport integrability_check(const DistTensor& X, const std::vector<std::vector<double>>& points);

struct IntegrationResult {
  MapGrid map;
  double consistency_defect = 0.0;    // lexicographic vs reversed sweeps
  double integrability_defect = 0.0;  // full closure along the integrated map
};

struct IntegrationOptions {
  /// Nodes re-integrated in reversed axis order.
  std::size_t consistency_samples = 64;
  /// A step is rejected as unresolved when one full step and two half steps
  /// differ by more than this fraction of 1 + |x|.
  double resolution_limit = 0.1;
  double blow_up_limit = 1e12;
};

/// Classical RK4, one step per grid interval: axis 1 from the corner, then
/// axis 2 from every node of that edge, and so on. Throws BlowUpError with the
/// node location on |x| > blow_up_limit, non-finite values or an unresolved
/// step.
IntegrationResult integrate_normal_system(const DistTensor& X, std::span<const double> x0, const GridSpec& grid,
                                          const IntegrationOptions& options = {});

/// x^j_α Y^i_j − T^i_α per interior node; component (i, α) at α·n + i.
ResidualReport implicit_system_residual(const MapPartials& x, const DistTensor& Y, const DistTensor& T);
ResidualReport homogeneous_system_residual(const MapPartials& x, const DistTensor& Y);

/// ξ^i_j per node with x^j_α ξ^i_j = 0: orthonormal rows spanning the
/// complement of the Jacobian columns, chosen greedily from e_1..e_n by
/// ascending pivot index, first nonzero entry positive, then zero rows.
struct KernelField {
  GridSpec grid;
  std::vector<Eigen::MatrixXd> xi;  // n x n per node
};

/// Pointwise construction; jacobian is n x m. Throws RankDeficiencyError.
Eigen::MatrixXd kernel_rows(const Eigen::MatrixXd& jacobian, const std::string& where = {});

KernelField kernel_field_from_map(const MapPartials& x);

/// x^j_α ξ^i_j with the tabulated kernel; component (i, α) at α·n + i.
ResidualReport kernel_system_residual(const MapPartials& x, const KernelField& kernel);

}  // namespace varigeo
