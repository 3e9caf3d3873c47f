#pragma once

// Submanifold maps x: N -> (M, g): induced metric, normal frames, the Gauss
// decomposition x_αβ = Λ^γ_αβ x_γ + Λ^a_αβ N_a, and the lift to the first
// jet bundle with its least-squares residual.
//
// Jet coordinates follow VariableSet::jet: 𝔵^(i,α) sits at α·n + i, with
// α = 0 the position x^i.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"
#include "varigeo/residuals.hpp"

namespace varigeo {

/// η_αβ = g_ij x^i_α x^j_β per node. Throws RankDeficiencyError for
/// non-immersions.
std::vector<Eigen::MatrixXd> induced_metric(const MapPartials& x, const MetricField& g);

/// Symbolic η over t1..tm, obtained by substituting the map expressions into g.
MetricField induced_metric_expr(const std::vector<ScalarExpr>& map, const MetricField& g);

enum class FrameOrientation {
  /// First nonzero component of each N_a positive.
  FirstComponentPositive,
  /// g(N_a, x) >= 0, i.e. pointing away from the coordinate origin.
  AlongPosition,
};

struct NormalFrame {
  GridSpec grid;
  int n = 0;
  int m = 0;
  std::vector<Eigen::MatrixXd> normals;  // n x (n-m) per node
  std::vector<std::vector<int>> seeds;   // chosen coordinate vectors per node
};

/// Normal vectors at one point. With `seeds` the same coordinate vectors are
/// used in that order; with `reference` each N_a is flipped to agree with it.
Eigen::MatrixXd normal_vectors(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& g, std::span<const double> x,
                               FrameOrientation orientation, std::vector<int>* seeds_out = nullptr,
                               const std::vector<int>* seeds = nullptr, const Eigen::MatrixXd* reference = nullptr);

NormalFrame normal_frame(const MapPartials& x, const MetricField& g,
                         FrameOrientation orientation = FrameOrientation::FirstComponentPositive);

/// Max over nodes of |g(N_a, N_b) − δ_ab| and |g(N_a, x_β)|.
double frame_defect(const NormalFrame& frame, const MapPartials& x, const MetricField& g);

/// Λ^γ_αβ = h^{γσ} g_ik X^k_σ (∂_j X^i_α X^j_β + ∂_β X^i_α) with h = g(X, X),
/// stored (γ, α, β), at base-layout points.
std::vector<Tensor3> tzitzeica_connection(const DistTensor& X, const MetricField& g,
                                          const std::vector<std::vector<double>>& points);

/// Same formula along a map, with X = x_α and the bracket = x_αβ.
std::vector<Tensor3> tzitzeica_on_map(const MapPartials& x, const MetricField& g);

/// Christoffel symbols of the tabulated η, shifted by −η^{-1} g(x_σ, G(x_α, x_β))
/// so that they describe the same connection as the projection formula.
/// ∂η uses the chain rule for exact partials and grid differences otherwise.
std::vector<Tensor3> induced_connection(const MapPartials& x, const MetricField& g);

struct FundamentalForms {
  std::vector<Tensor3> forms;  // (a, α, β) per node or point
  double asymmetry = 0.0;      // max |Λ^a_αβ − Λ^a_βα|
};

/// Λ^a_αβ = g(x_αβ, N_a) along a map.
FundamentalForms fundamental_forms(const MapPartials& x, const MetricField& g, const NormalFrame& frame);

/// Λ^a_αβ = g_ik N^k_a (∂_j X^i_α X^j_β + ∂_β X^i_α) at base-layout points,
/// with normals built from the columns of X.
FundamentalForms fundamental_forms_field(const DistTensor& X, const MetricField& g,
                                         const std::vector<std::vector<double>>& points,
                                         FrameOrientation orientation = FrameOrientation::FirstComponentPositive);

/// x_αβ − Λ^γ_αβ x_γ − Λ^a_αβ N_a with Λ^γ from induced_connection;
/// component (α, β, i) at (α·m + β)·n + i.
ResidualReport gauss_residual(const MapPartials& x, const MetricField& g, const NormalFrame& frame);

struct JetLift {
  GridSpec grid;
  int m = 0;
  int n = 0;
  MapGrid xi;                        // n(m+1) values per node
  std::vector<Eigen::MatrixXd> X;    // n(m+1) x m per node: X^I_μ
  std::vector<Tensor3> lambda;       // Λ^γ_μα per node
  std::vector<Tensor3> forms;        // Λ^a_μα per node
  NormalFrame frame;
  ResidualReport first_order;        // ∂𝔵^I/∂t^μ − X^I_μ, component μ·N + I
  MetricField g;

  int jet_dim() const { return n * (m + 1); }

  /// X^I_μ at node `node` for an arbitrary jet point (t fixed), with the frame
  /// rebuilt from the jet tangents using the node's seeds and orientation.
  Eigen::MatrixXd field(std::size_t node, std::span<const double> jet_point) const;
};

JetLift jet_lift(const MapPartials& x, const MetricField& g, const NormalFrame& frame);

/// Boundary layers excluded from the jet residual.
inline constexpr int kJetMargin = kInteriorMargin + 1;

/// Residual of the EL system of ½ h^{μν} γ_IJ (𝔵^I_μ − X^I_μ)(𝔵^J_ν − X^J_ν),
/// upper index I. ∂X/∂𝔵 by central differences with step 1e-4·(1+|𝔵^L|);
/// the explicit t-dependence of X (through Λ) by grid differences.
ResidualReport jet_potential_residual(const JetLift& lift, const MetricField& h, const MetricField& gamma);

/// Connection Λ0^σ_βγ(t), stored (σ, β, γ).
using ConnectionAt = std::function<Tensor3(std::span<const double> t)>;

/// Λ0 from m³ expressions over t1..tm ordered (σ, β, γ).
ConnectionAt connection_from_exprs(const std::vector<ScalarExpr>& entries, int m);

struct RicciReport {
  double max_violation = 0.0;
  std::vector<double> worst_point;
  std::size_t samples = 0;
};

/// ∂_γ h0_αβ − h0_ασ Λ0^σ_βγ − h0_βσ Λ0^σ_αγ at t-points.
RicciReport verify_h0_ricci(const MetricField& h0, const ConnectionAt& lambda0,
                            const std::vector<std::vector<double>>& points);

/// x_αβ − Λ0^γ_αβ x_γ along a map; component (α, β, i) at (α·m + β)·n + i.
ResidualReport lambda0_display_defect(const MapPartials& x, const ConnectionAt& lambda0);

}  // namespace varigeo
