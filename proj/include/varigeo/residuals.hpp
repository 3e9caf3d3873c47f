#pragma once

// Euler-Lagrange residuals of the second-order systems attached to the
// energies, and a generic discrete EL operator for arbitrary densities.
//
// Residuals live on interior nodes only (at least kInteriorMargin layers from
// the boundary). Named residuals are "LHS - RHS" of their displayed systems;
// the generic operator returns EL_k = ∂E/∂x^k − ∂_α(∂E/∂x^k_α) − H^γ_γα ∂E/∂x^k_α.
// For the f-energy the two are related by residual_i = −EL_i.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "varigeo/energies.hpp"
#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"

namespace varigeo {

struct ResidualReport {
  GridSpec grid;
  int width = 0;
  std::vector<std::size_t> nodes;  // interior nodes, ascending
  std::vector<double> values;      // width entries per node
  double max_norm = 0.0;
  double mean_norm = 0.0;

  std::span<const double> at(std::size_t k) const {
    return {values.data() + k * static_cast<std::size_t>(width), static_cast<std::size_t>(width)};
  }
  std::span<double> at(std::size_t k) {
    return {values.data() + k * static_cast<std::size_t>(width), static_cast<std::size_t>(width)};
  }
  /// Euclidean norm of the residual at interior slot k.
  double norm(std::size_t k) const;
  void recompute_norms();
};

using NodeResidual = std::function<void(std::size_t node, std::span<double> out)>;

/// Fill a report by calling `fn` at every interior node.
ResidualReport evaluate_residual(const GridSpec& grid, int width, const NodeResidual& fn,
                                 int margin = kInteriorMargin);

/// Nodewise a − b. Both reports must cover the same nodes.
ResidualReport difference(const ResidualReport& a, const ResidualReport& b);

/// Max norm of `fine` over the nodes that coincide with interior nodes of
/// `coarse`. Falls back to fine.max_norm unless fine.grid == coarse.grid.refined().
double shared_max_norm(const ResidualReport& coarse, const ResidualReport& fine);

/// coarse.max_norm / shared_max_norm(coarse, fine). Comparing at the same
/// physical points keeps the worst node from drifting toward the boundary as
/// the interior grows.
double convergence_ratio(const ResidualReport& coarse, const ResidualReport& fine);

enum class IndexPosition { Lower, Upper };

/// Convert a generic EL report into the named-residual convention:
/// −EL (lower index) or −g^{-1}EL (upper index), g evaluated along x.
ResidualReport named_from_el(const ResidualReport& el, const MapPartials& x, const MetricField& g,
                             IndexPosition position);

/// Generic EL operator; density partials by central perturbation with step
/// 1e-6·(1+|value|), outer t-derivative by grid differences.
ResidualReport el_residual_generic(const MapPartials& x, const DensityFunction& density, const MetricField& h);

/// h^{αβ}(f_ij x^j_αβ − H^γ_αβ f_ij x^j_γ + F_{jk|i} x^j_α x^k_β), index i.
ResidualReport ultra_harmonic_residual(const MapPartials& x, const MetricField& h, const MetricField& f);

/// h^{αβ}(x^i_αβ − H^γ_αβ x^i_γ + G^i_jk x^j_α x^k_β), index i up.
ResidualReport harmonic_residual(const MapPartials& x, const MetricField& h, const MetricField& g);

/// Ultra-harmonic operator of f+g minus the T-dependent right-hand side,
/// with the T·T·∂g term contracted by h^{αβ}. Index i down.
ResidualReport ultra_potential_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                        const MetricField& f, const DistTensor& T);

struct CovariantPieces {
  std::vector<std::vector<double>> points;
  std::vector<Tensor3> nabla_x;  // (j, i, α): ∇_j X^i_α
  std::vector<Tensor3> d_x;      // (β, i, α): D_β X^i_α
  std::vector<Tensor3> f_ten;    // (j, i, α): F_j^i_α
};

/// Points are base-layout (t, x).
CovariantPieces covariant_pieces(const DistTensor& X, const MetricField& h, const MetricField& g,
                                 const std::vector<std::vector<double>>& points);

/// Harmonic operator minus g^{ij}∂_j c, the F-term and the D-term. Index i up.
ResidualReport potential_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                  const DistTensor& X, const PotentialField& c);

/// Non-homogeneous dynamics, index p; S built from the Ω of Y and g.
ResidualReport nonhomogeneous_dynamics_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                                const DistTensor& Y, const DistTensor& T);

/// h^{αβ}g_ik Y^i_j x^j_αβ + h^{αβ}g_ik x^j_α x^p_β (∇_p Y)^i_j, index k.
ResidualReport homogeneous_dynamics_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                             const DistTensor& Y);

/// h0^{αβ}(g_is Y^s_j + g_js Y^s_i)(x^j_αβ − x^j_γ H0^γ_αβ) + h0^{αβ} x^p_α x^k_β S_{pk|i}.
ResidualReport h0_dynamics_residual(const MapPartials& x, const MetricField& h0, const MetricField& g,
                                    const DistTensor& Y);

}  // namespace varigeo
