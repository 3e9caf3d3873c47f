#pragma once

// Metrics, distinguished tensor fields, Christoffel symbols and curvature.
//
// Every field is written in scalar expressions over one shared variable
// layout: t1..tm, then x1..xn, then (for jet metrics) the remaining jet
// coordinates. A metric knows the offset of its coordinate block inside that
// layout; ∂_k always means the derivative w.r.t. the k-th coordinate of the
// metric's own block. Metric inversion is numeric, per evaluation point.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varigeo/expr.hpp"
#include "varigeo/grid.hpp"

namespace varigeo {

/// Dense 3-index array.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2)
      : dims_{d0, d1, d2}, data_(static_cast<std::size_t>(d0 * d1 * d2), 0.0) {}

  double& operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
  double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }
  int dim(int k) const { return dims_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& data() const { return data_; }
  double max_abs() const;

 private:
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * static_cast<std::size_t>(dims_[1]) + static_cast<std::size_t>(b)) *
               static_cast<std::size_t>(dims_[2]) +
           static_cast<std::size_t>(c);
  }
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

/// Dense 4-index array.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int d0, int d1, int d2, int d3)
      : dims_{d0, d1, d2, d3}, data_(static_cast<std::size_t>(d0 * d1 * d2 * d3), 0.0) {}

  double& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }
  int dim(int k) const { return dims_[static_cast<std::size_t>(k)]; }
  double max_abs() const;

 private:
  std::size_t index(int a, int b, int c, int d) const {
    std::size_t r = static_cast<std::size_t>(a);
    r = r * static_cast<std::size_t>(dims_[1]) + static_cast<std::size_t>(b);
    r = r * static_cast<std::size_t>(dims_[2]) + static_cast<std::size_t>(c);
    return r * static_cast<std::size_t>(dims_[3]) + static_cast<std::size_t>(d);
  }
  std::array<int, 4> dims_{0, 0, 0, 0};
  std::vector<double> data_;
};

enum class MetricKind { Riemannian, Symmetric };

/// Symmetric (0,2) tensor field: h on N, g or f on M, h0, or a jet metric.
class MetricField {
 public:
  MetricField() = default;
  /// Only the upper triangle (j >= i) of `entries` is read.
  MetricField(const std::vector<std::vector<ScalarExpr>>& entries, int block_offset,
              MetricKind kind = MetricKind::Riemannian);

  static MetricField identity(int dim, int block_offset, MetricKind kind = MetricKind::Riemannian);
  static MetricField zero(int dim, int block_offset);
  static MetricField diagonal(const std::vector<ScalarExpr>& diagonal, int block_offset,
                              MetricKind kind = MetricKind::Riemannian);

  int dim() const { return dim_; }
  int offset() const { return offset_; }
  MetricKind kind() const { return kind_; }
  const ScalarExpr& entry(int i, int j) const;
  /// ∂ entry(i,j) / ∂ (coordinate k of this block).
  const ScalarExpr& derivative(int k, int i, int j) const;

  Eigen::MatrixXd value(std::span<const double> point) const;
  /// dg[k](i,j) = ∂_k g_ij.
  std::vector<Eigen::MatrixXd> first_derivatives(std::span<const double> point) const;

  MetricField operator+(const MetricField& other) const;
  MetricField scaled(double factor) const;
  MetricField with_kind(MetricKind kind) const;

 private:
  std::size_t tri(int i, int j) const;
  void build_derivatives();

  int dim_ = 0;
  int offset_ = 0;
  MetricKind kind_ = MetricKind::Riemannian;
  std::vector<ScalarExpr> upper_;        // packed upper triangle
  std::vector<ScalarExpr> derivatives_;  // [k][packed]
};

/// Value and numerically inverted value of a metric at one point.
struct MetricAtPoint {
  Eigen::MatrixXd value;
  Eigen::MatrixXd inverse;
  double determinant = 0.0;
};

/// LU with partial pivoting; throws SingularMetricError when (numerically)
/// singular.
MetricAtPoint invert_metric(const Eigen::MatrixXd& value, const std::string& where = {});
MetricAtPoint evaluate_metric(const MetricField& g, std::span<const double> point);

/// Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij), stored as (k, i, j).
Tensor3 christoffel_from_values(const Eigen::MatrixXd& inverse, const std::vector<Eigen::MatrixXd>& dg);
/// F_{jk|i} = ½(∂_k f_ij + ∂_j f_ik − ∂_i f_jk), stored as (i, j, k).
Tensor3 first_kind_from_values(const std::vector<Eigen::MatrixXd>& df);

enum class ChristoffelKind { SecondKind, FirstKindOfF };

/// Christoffel symbols attached to a metric field, evaluated pointwise.
/// Both kinds are symmetric in their last two indices.
class ChristoffelField {
 public:
  ChristoffelField(MetricField metric, ChristoffelKind kind) : metric_(std::move(metric)), kind_(kind) {}

  ChristoffelKind kind() const { return kind_; }
  const MetricField& metric() const { return metric_; }
  Tensor3 at(std::span<const double> point) const;

 private:
  MetricField metric_;
  ChristoffelKind kind_;
};

ChristoffelField christoffel_second(const MetricField& g);
ChristoffelField christoffel_first_f(const MetricField& f);

/// R^i_{jkl} = ∂_k Γ^i_{jl} − ∂_l Γ^i_{jk} + Γ^i_{ks}Γ^s_{jl} − Γ^i_{ls}Γ^s_{jk}.
class RiemannCurvature {
 public:
  explicit RiemannCurvature(MetricField g);

  /// (i, j, k, l) -> R^i_{jkl}.
  Tensor4 at(std::span<const double> point) const;

 private:
  MetricField g_;
  std::vector<ScalarExpr> second_;  // [k][l][i][j] of ∂_k∂_l g_ij
};

RiemannCurvature riemann_curvature(const MetricField& g);

/// Christoffel symbols of a metric known only at grid nodes; its partials
/// come from the grid stencils.
std::vector<Tensor3> tabulated_christoffel_second(const GridSpec& grid,
                                                  const std::vector<Eigen::MatrixXd>& metric);

struct DefinitenessReport {
  bool passed = true;
  std::size_t samples = 0;
  std::vector<std::vector<double>> failures;  // coordinates of failing points
};

DefinitenessReport check_positive_definite(const MetricField& g,
                                           const std::vector<std::vector<double>>& sample);

enum class TensorShape { Mixed, Sheet, Endomorphism };

std::string to_string(TensorShape shape);

/// Distinguished tensor field: X^i_α(t,x) (mixed), T^i_α(t) (sheet) or
/// Y^i_j(x) (endomorphism). Rows carry the upper index i.
class DistTensor {
 public:
  DistTensor() = default;
  DistTensor(TensorShape shape, int m, int n, const std::vector<std::vector<ScalarExpr>>& entries);

  static DistTensor zero(TensorShape shape, int m, int n);
  static DistTensor identity(int m, int n);

  TensorShape shape() const { return shape_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int rows() const { return n_; }
  int cols() const { return shape_ == TensorShape::Endomorphism ? n_ : m_; }
  const ScalarExpr& entry(int row, int col) const;

  Eigen::MatrixXd value(std::span<const double> point) const;
  /// ∂/∂t^β of every entry (zero for endomorphisms).
  Eigen::MatrixXd d_dt(std::span<const double> point, int beta) const;
  /// ∂/∂x^j of every entry (zero for sheets).
  Eigen::MatrixXd d_dx(std::span<const double> point, int j) const;

  /// Same entries with another shape; re-checks variable dependence.
  DistTensor reshaped(TensorShape shape) const;

 private:
  TensorShape shape_ = TensorShape::Mixed;
  int m_ = 0;
  int n_ = 0;
  std::vector<ScalarExpr> entries_;      // row-major
  std::vector<ScalarExpr> derivatives_;  // [var][row-major], var over t1..tm, x1..xn
};

/// Layout helper: concatenate t and x.
std::vector<double> base_point(std::span<const double> t, std::span<const double> x);

}  // namespace varigeo
