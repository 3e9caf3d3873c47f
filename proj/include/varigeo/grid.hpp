#pragma once

// Rectangular parameter grids, discrete maps on them and their
// finite-difference partials.
//
// Nodes are numbered row-major: the last axis varies fastest. Central
// differences are used in the interior and second-order one-sided stencils
// on the boundary layer, so every derived quantity is O(h^2).

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "varigeo/expr.hpp"

namespace varigeo {

/// Number of boundary layers excluded from residual norms. Residuals that
/// nest two first-derivative stencils see the one-sided boundary stencil
/// through the first interior layer, so that layer is excluded as well.
inline constexpr int kInteriorMargin = 2;

class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::vector<std::pair<double, double>> bounds, std::vector<int> points);

  int dim() const { return static_cast<int>(points_.size()); }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }
  const std::vector<int>& points() const { return points_; }
  double low(int axis) const { return bounds_[static_cast<std::size_t>(axis)].first; }
  double high(int axis) const { return bounds_[static_cast<std::size_t>(axis)].second; }
  int points(int axis) const { return points_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const;
  /// Largest per-axis spacing.
  double max_spacing() const;

  std::size_t node_count() const { return node_count_; }
  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  std::vector<int> multi_index(std::size_t node) const;
  std::size_t linear_index(std::span<const int> index) const;
  std::vector<double> coordinates(std::size_t node) const;
  double coordinate(int axis, int index) const;

  bool is_interior(std::size_t node, int margin = kInteriorMargin) const;
  std::vector<std::size_t> interior_nodes(int margin = kInteriorMargin) const;

  /// Same bounds with 2*points-1 nodes per axis (spacing halved).
  GridSpec refined() const;

  /// Iterated trapezoid weight of a node (product of 1-D weights).
  double trapezoid_weight(std::size_t node) const;

  bool operator==(const GridSpec& other) const = default;

 private:
  std::vector<std::pair<double, double>> bounds_;
  std::vector<int> points_;
  std::vector<std::size_t> strides_;
  std::size_t node_count_ = 0;
};

/// A vector quantity of fixed width stored at every grid node.
struct NodalField {
  GridSpec grid;
  int width = 0;
  std::vector<double> data;

  NodalField() = default;
  NodalField(GridSpec g, int w)
      : grid(std::move(g)), width(w), data(grid.node_count() * static_cast<std::size_t>(w), 0.0) {}

  std::span<double> at(std::size_t node) {
    return {data.data() + node * static_cast<std::size_t>(width), static_cast<std::size_t>(width)};
  }
  std::span<const double> at(std::size_t node) const {
    return {data.data() + node * static_cast<std::size_t>(width), static_cast<std::size_t>(width)};
  }
};

/// First derivative along one axis (central inside, one-sided on the boundary).
NodalField differentiate(const NodalField& field, int axis);
/// Pure second derivative along one axis.
NodalField differentiate_twice(const NodalField& field, int axis);

enum class Provenance { Integrated, Analytic, UserSupplied };

std::string to_string(Provenance p);

/// Discrete map x: grid in R^m -> R^n.
struct MapGrid {
  GridSpec grid;
  int n = 0;
  std::vector<double> values;  // node-major, n per node
  Provenance provenance = Provenance::UserSupplied;

  MapGrid() = default;
  MapGrid(GridSpec g, int target_dim, Provenance p);

  std::span<double> at(std::size_t node) {
    return {values.data() + node * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
  std::span<const double> at(std::size_t node) const {
    return {values.data() + node * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }

  /// Throws GridError unless the value array has the right length and is finite.
  void validate() const;
};

/// Sample analytic map expressions x^i(t) at the grid nodes.
MapGrid sample_map(const std::vector<ScalarExpr>& components, const GridSpec& grid);

/// Map value, first partials x^i_a and second partials x^i_ab at every node.
class MapPartials {
 public:
  MapPartials() = default;
  MapPartials(GridSpec grid, int n);

  const GridSpec& grid() const { return grid_; }
  int m() const { return grid_.dim(); }
  int n() const { return n_; }
  bool exact() const { return exact_; }
  void set_exact(bool e) { exact_ = e; }

  double x(std::size_t node, int i) const { return value_[node * un() + static_cast<std::size_t>(i)]; }
  double dx(std::size_t node, int i, int a) const { return first_[(node * un() + ui(i)) * um() + ui(a)]; }
  double ddx(std::size_t node, int i, int a, int b) const {
    return second_[((node * un() + ui(i)) * um() + ui(a)) * um() + ui(b)];
  }
  double& x(std::size_t node, int i) { return value_[node * un() + static_cast<std::size_t>(i)]; }
  double& dx(std::size_t node, int i, int a) { return first_[(node * un() + ui(i)) * um() + ui(a)]; }
  double& ddx(std::size_t node, int i, int a, int b) {
    return second_[((node * un() + ui(i)) * um() + ui(a)) * um() + ui(b)];
  }

  std::span<const double> point(std::size_t node) const {
    return {value_.data() + node * un(), un()};
  }

 private:
  std::size_t un() const { return static_cast<std::size_t>(n_); }
  std::size_t um() const { return static_cast<std::size_t>(grid_.dim()); }
  static std::size_t ui(int i) { return static_cast<std::size_t>(i); }

  GridSpec grid_;
  int n_ = 0;
  bool exact_ = false;
  std::vector<double> value_;
  std::vector<double> first_;
  std::vector<double> second_;
};

/// Finite-difference partials of a discrete map. Needs >= 5 points per axis.
MapPartials grid_partials(const MapGrid& map);

/// Exact partials of analytic map expressions (symbolic differentiation),
/// sampled at the grid nodes. Expressions may only reference t1..tm.
MapPartials analytic_partials(const std::vector<ScalarExpr>& components, const GridSpec& grid);

}  // namespace varigeo
