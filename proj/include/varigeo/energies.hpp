#pragma once

// Energy densities and Lagrangians of maps x: (N,h) -> M evaluated at grid
// nodes, plus their trapezoidal integrals.
//
// A density is a function E(t, x, x_α) without the volume factor; the
// corresponding Lagrangian is L = E·√det h.

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "varigeo/geometry.hpp"
#include "varigeo/grid.hpp"

namespace varigeo {

/// dx(i, a) = x^i_a.
using DensityFunction =
    std::function<double(std::span<const double> t, std::span<const double> x, const Eigen::MatrixXd& dx)>;

/// Scalar potential c(t, x) of the general energy, either an expression or
/// the perfect square ½ h^{αβ} g_ij X^i_α X^j_β.
class PotentialField {
 public:
  PotentialField() = default;
  explicit PotentialField(ScalarExpr c, int m, int n);
  static PotentialField zero(int m, int n);

  double value(std::span<const double> point) const;
  /// ∂c/∂x^j, j = 0..n-1.
  Eigen::VectorXd gradient_x(std::span<const double> point) const;

  bool is_perfect_square() const { return std::holds_alternative<PerfectSquare>(impl_); }

 private:
  friend PotentialField perfect_square_c(const MetricField& h, const MetricField& g, const DistTensor& X);

  struct Expression {
    ScalarExpr c;
    std::vector<ScalarExpr> grad;
  };
  struct PerfectSquare {
    MetricField h;
    MetricField g;
    DistTensor X;
  };
  int m_ = 0;
  int n_ = 0;
  std::variant<Expression, PerfectSquare> impl_;
};

/// c = ½ h^{αβ}(t) g_ij(x) X^i_α X^j_β, which turns the general energy into
/// a perfect square.
PotentialField perfect_square_c(const MetricField& h, const MetricField& g, const DistTensor& X);

enum class LagrangianKind { Ef, EfgT, EgcX, L4, L5, L6, L7, L8, L9, Lgamma };

std::string to_string(LagrangianKind kind);

struct DensityField {
  GridSpec grid;
  LagrangianKind kind = LagrangianKind::Ef;
  bool includes_volume_factor = false;
  std::vector<double> values;  // per node
  std::vector<double> volume;  // √det h per node
};

// Density functions (no volume factor).
DensityFunction f_energy_density(const MetricField& h, const MetricField& f);
DensityFunction deviated_density(const MetricField& h, const MetricField& g, const MetricField& f,
                                 const DistTensor& T);
DensityFunction general_density(const MetricField& h, const MetricField& g, const DistTensor& X,
                                const PotentialField& c);
DensityFunction least_squares_density_function(const MetricField& h, const MetricField& metric,
                                               const DistTensor& X);
/// E5 = h^{αβ}(g_ij x^i_α T^j_β − ½ g_ij T^i_α T^j_β).
DensityFunction l5_density(const MetricField& h, const MetricField& g, const DistTensor& T);
/// E6 = ¼ h^{αβ}(g_is Y^s_j + g_js Y^s_i) x^i_α x^j_β.
DensityFunction l6_density(const MetricField& h, const MetricField& g, const DistTensor& Y);

/// f_ij = g_is Y^s_j, and its symmetrization g_is Y^s_j + g_js Y^s_i.
MetricField lowered_endomorphism(const MetricField& g, const DistTensor& Y);
MetricField symmetrized_endomorphism(const MetricField& g, const DistTensor& Y);

/// Evaluate a density at every node, optionally multiplied by √det h.
DensityField evaluate_density(const MapPartials& x, const DensityFunction& density, const MetricField& h,
                              LagrangianKind kind, bool include_volume);

DensityField energy_f(const MapPartials& x, const MetricField& h, const MetricField& f);
DensityField energy_deviated(const MapPartials& x, const MetricField& h, const MetricField& g,
                             const MetricField& f, const DistTensor& T);
DensityField energy_general(const MapPartials& x, const MetricField& h, const MetricField& g,
                            const DistTensor& X, const PotentialField& c);
/// ½ h^{αβ} metric_IJ (x^I_α − X^I_α)(x^J_β − X^J_β) √det h.
DensityField least_squares_density(const MapPartials& x, const MetricField& h, const MetricField& metric,
                                   const DistTensor& X);

struct CompositeInputs {
  MetricField h;  // h0 for L9
  MetricField g;
  MetricField f;  // L7 only
  DistTensor T;   // L7 only
  DistTensor Y;   // L8, L9
};

/// L7, L8 or L9 densities including the volume factor.
DensityField composite_densities(LagrangianKind kind, const MapPartials& x, const CompositeInputs& in);

/// Iterated trapezoid of the density against dv_h.
double total_energy(const DensityField& d);

}  // namespace varigeo
