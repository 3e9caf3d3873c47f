#include "varigeo/grid.hpp"

#include <algorithm>
#include <cmath>

namespace varigeo {

GridSpec::GridSpec(std::vector<std::pair<double, double>> bounds, std::vector<int> points)
    : bounds_(std::move(bounds)), points_(std::move(points)) {
  if (bounds_.size() != points_.size() || bounds_.empty())
    throw GridError("grid needs one [low, high] pair and one point count per axis");
  for (std::size_t a = 0; a < bounds_.size(); ++a) {
    if (!(bounds_[a].first < bounds_[a].second))
      throw GridError("grid axis " + std::to_string(a + 1) + " needs low < high");
    if (points_[a] < 5)
      throw GridError("grid axis " + std::to_string(a + 1) + " needs at least 5 points");
  }
  strides_.assign(points_.size(), 1);
  for (int a = dim() - 2; a >= 0; --a)
    strides_[static_cast<std::size_t>(a)] =
        strides_[static_cast<std::size_t>(a) + 1] * static_cast<std::size_t>(points_[static_cast<std::size_t>(a) + 1]);
  node_count_ = strides_[0] * static_cast<std::size_t>(points_[0]);
}

double GridSpec::spacing(int axis) const { return (high(axis) - low(axis)) / (points(axis) - 1); }

double GridSpec::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < dim(); ++a) h = std::max(h, spacing(a));
  return h;
}

std::vector<int> GridSpec::multi_index(std::size_t node) const {
  std::vector<int> index(static_cast<std::size_t>(dim()));
  for (int a = 0; a < dim(); ++a) {
    index[static_cast<std::size_t>(a)] = static_cast<int>(node / stride(a));
    node %= stride(a);
  }
  return index;
}

std::size_t GridSpec::linear_index(std::span<const int> index) const {
  std::size_t node = 0;
  for (int a = 0; a < dim(); ++a) node += static_cast<std::size_t>(index[static_cast<std::size_t>(a)]) * stride(a);
  return node;
}

double GridSpec::coordinate(int axis, int index) const {
  if (index == points(axis) - 1) return high(axis);
  return low(axis) + index * spacing(axis);
}

std::vector<double> GridSpec::coordinates(std::size_t node) const {
  auto index = multi_index(node);
  std::vector<double> t(index.size());
  for (int a = 0; a < dim(); ++a) t[static_cast<std::size_t>(a)] = coordinate(a, index[static_cast<std::size_t>(a)]);
  return t;
}

bool GridSpec::is_interior(std::size_t node, int margin) const {
  for (int a = 0; a < dim(); ++a) {
    const int k = static_cast<int>((node / stride(a)) % static_cast<std::size_t>(points(a)));
    if (k < margin || k > points(a) - 1 - margin) return false;
  }
  return true;
}

std::vector<std::size_t> GridSpec::interior_nodes(int margin) const {
  std::vector<std::size_t> nodes;
  for (std::size_t node = 0; node < node_count_; ++node)
    if (is_interior(node, margin)) nodes.push_back(node);
  return nodes;
}

GridSpec GridSpec::refined() const {
  std::vector<int> pts(points_.size());
  for (std::size_t a = 0; a < points_.size(); ++a) pts[a] = 2 * points_[a] - 1;
  return GridSpec(bounds_, pts);
}

double GridSpec::trapezoid_weight(std::size_t node) const {
  double w = 1.0;
  for (int a = 0; a < dim(); ++a) {
    const int k = static_cast<int>((node / stride(a)) % static_cast<std::size_t>(points(a)));
    const double h = spacing(a);
    w *= (k == 0 || k == points(a) - 1) ? 0.5 * h : h;
  }
  return w;
}

namespace {

// Position of `node` along `axis`.
int axis_index(const GridSpec& g, std::size_t node, int axis) {
  return static_cast<int>((node / g.stride(axis)) % static_cast<std::size_t>(g.points(axis)));
}

}  // namespace

NodalField differentiate(const NodalField& field, int axis) {
  const GridSpec& g = field.grid;
  NodalField out(g, field.width);
  const std::size_t s = g.stride(axis);
  const int p = g.points(axis);
  const double inv2h = 1.0 / (2.0 * g.spacing(axis));
  const std::size_t w = static_cast<std::size_t>(field.width);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const int k = axis_index(g, node, axis);
    auto f = [&](std::ptrdiff_t offset, std::size_t c) {
      return field.data[(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                                  offset * static_cast<std::ptrdiff_t>(s))) * w + c];
    };
    for (std::size_t c = 0; c < w; ++c) {
      double d;
      if (k == 0) {
        d = (-3.0 * f(0, c) + 4.0 * f(1, c) - f(2, c)) * inv2h;
      } else if (k == p - 1) {
        d = (3.0 * f(0, c) - 4.0 * f(-1, c) + f(-2, c)) * inv2h;
      } else {
        d = (f(1, c) - f(-1, c)) * inv2h;
      }
      out.data[node * w + c] = d;
    }
  }
  return out;
}

NodalField differentiate_twice(const NodalField& field, int axis) {
  const GridSpec& g = field.grid;
  NodalField out(g, field.width);
  const std::size_t s = g.stride(axis);
  const int p = g.points(axis);
  const double h = g.spacing(axis);
  const double inv_h2 = 1.0 / (h * h);
  const std::size_t w = static_cast<std::size_t>(field.width);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const int k = axis_index(g, node, axis);
    auto f = [&](std::ptrdiff_t offset, std::size_t c) {
      return field.data[(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                                  offset * static_cast<std::ptrdiff_t>(s))) * w + c];
    };
    for (std::size_t c = 0; c < w; ++c) {
      double d;
      if (k == 0) {
        d = (2.0 * f(0, c) - 5.0 * f(1, c) + 4.0 * f(2, c) - f(3, c)) * inv_h2;
      } else if (k == p - 1) {
        d = (2.0 * f(0, c) - 5.0 * f(-1, c) + 4.0 * f(-2, c) - f(-3, c)) * inv_h2;
      } else {
        d = (f(1, c) - 2.0 * f(0, c) + f(-1, c)) * inv_h2;
      }
      out.data[node * w + c] = d;
    }
  }
  return out;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Integrated: return "integrated";
    case Provenance::Analytic: return "analytic";
    case Provenance::UserSupplied: return "user-supplied";
  }
  return "unknown";
}

MapGrid::MapGrid(GridSpec g, int target_dim, Provenance p)
    : grid(std::move(g)), n(target_dim), values(grid.node_count() * static_cast<std::size_t>(target_dim), 0.0),
      provenance(p) {}

void MapGrid::validate() const {
  if (values.size() != grid.node_count() * static_cast<std::size_t>(n))
    throw GridError("map value array has length " + std::to_string(values.size()) + ", expected " +
                    std::to_string(grid.node_count() * static_cast<std::size_t>(n)));
  for (std::size_t k = 0; k < values.size(); ++k)
    if (!std::isfinite(values[k]))
      throw GridError("map value at node " + std::to_string(k / static_cast<std::size_t>(n)) + " is not finite");
}

namespace {

void check_sheet_expressions(const std::vector<ScalarExpr>& components, int m) {
  for (const auto& c : components)
    for (int v : c.variables_used())
      if (v >= m)
        throw ShapeError("map expression '" + c.to_string() + "' may only depend on t1..t" + std::to_string(m));
}

}  // namespace

MapGrid sample_map(const std::vector<ScalarExpr>& components, const GridSpec& grid) {
  check_sheet_expressions(components, grid.dim());
  MapGrid map(grid, static_cast<int>(components.size()), Provenance::Analytic);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto t = grid.coordinates(node);
    for (std::size_t i = 0; i < components.size(); ++i) map.at(node)[i] = components[i].eval(t);
  }
  return map;
}

MapPartials::MapPartials(GridSpec grid, int n)
    : grid_(std::move(grid)), n_(n),
      value_(grid_.node_count() * static_cast<std::size_t>(n), 0.0),
      first_(value_.size() * static_cast<std::size_t>(grid_.dim()), 0.0),
      second_(first_.size() * static_cast<std::size_t>(grid_.dim()), 0.0) {}

MapPartials grid_partials(const MapGrid& map) {
  map.validate();
  const GridSpec& g = map.grid;
  const int m = g.dim();
  const int n = map.n;
  MapPartials out(g, n);
  NodalField values(g, n);
  values.data = map.values;

  std::vector<NodalField> first;
  first.reserve(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) first.push_back(differentiate(values, a));

  for (std::size_t node = 0; node < g.node_count(); ++node)
    for (int i = 0; i < n; ++i) {
      out.x(node, i) = map.at(node)[static_cast<std::size_t>(i)];
      for (int a = 0; a < m; ++a) out.dx(node, i, a) = first[static_cast<std::size_t>(a)].at(node)[static_cast<std::size_t>(i)];
    }

  for (int a = 0; a < m; ++a) {
    const NodalField pure = differentiate_twice(values, a);
    for (std::size_t node = 0; node < g.node_count(); ++node)
      for (int i = 0; i < n; ++i) out.ddx(node, i, a, a) = pure.at(node)[static_cast<std::size_t>(i)];
    for (int b = a + 1; b < m; ++b) {
      // Nested central differences; symmetric by construction.
      const NodalField mixed = differentiate(first[static_cast<std::size_t>(b)], a);
      for (std::size_t node = 0; node < g.node_count(); ++node)
        for (int i = 0; i < n; ++i) {
          const double v = mixed.at(node)[static_cast<std::size_t>(i)];
          out.ddx(node, i, a, b) = v;
          out.ddx(node, i, b, a) = v;
        }
    }
  }
  return out;
}

MapPartials analytic_partials(const std::vector<ScalarExpr>& components, const GridSpec& grid) {
  const int m = grid.dim();
  check_sheet_expressions(components, m);
  const int n = static_cast<int>(components.size());
  std::vector<std::vector<ScalarExpr>> d1(components.size());
  std::vector<std::vector<std::vector<ScalarExpr>>> d2(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    for (int a = 0; a < m; ++a) {
      d1[i].push_back(components[i].diff(a));
      d2[i].emplace_back();
      for (int b = 0; b < m; ++b) d2[i].back().push_back(d1[i].back().diff(b));
    }
  }
  MapPartials out(grid, n);
  out.set_exact(true);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto t = grid.coordinates(node);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      out.x(node, i) = components[ui].eval(t);
      for (int a = 0; a < m; ++a) {
        out.dx(node, i, a) = d1[ui][static_cast<std::size_t>(a)].eval(t);
        for (int b = 0; b < m; ++b)
          out.ddx(node, i, a, b) = d2[ui][static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].eval(t);
      }
    }
  }
  return out;
}

}  // namespace varigeo
