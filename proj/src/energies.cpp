#include "varigeo/energies.hpp"

#include <cmath>

namespace varigeo {

namespace {

// ½ tr(h^{-1} Dᵀ A D) = ½ h^{αβ} A_ij D^i_α D^j_β
double half_contract(const Eigen::MatrixXd& hinv, const Eigen::MatrixXd& A, const Eigen::MatrixXd& D) {
  return 0.5 * (hinv * D.transpose() * A * D).trace();
}

std::vector<ScalarExpr> gradient_of(const ScalarExpr& c, int m, int n) {
  std::vector<ScalarExpr> grad;
  for (int j = 0; j < n; ++j) grad.push_back(c.diff(m + j));
  return grad;
}

}  // namespace

PotentialField::PotentialField(ScalarExpr c, int m, int n) : m_(m), n_(n) {
  for (int v : c.variables_used())
    if (v >= m + n) throw ShapeError("potential c may only depend on t and x");
  auto grad = gradient_of(c, m, n);
  impl_ = Expression{std::move(c), std::move(grad)};
}

PotentialField PotentialField::zero(int m, int n) { return PotentialField(ScalarExpr::constant(0.0), m, n); }

double PotentialField::value(std::span<const double> point) const {
  if (const auto* e = std::get_if<Expression>(&impl_)) return e->c.eval(point);
  const auto& ps = std::get<PerfectSquare>(impl_);
  const auto t = point.subspan(0, static_cast<std::size_t>(m_));
  const auto h = evaluate_metric(ps.h, t);
  const Eigen::MatrixXd g = ps.g.value(point);
  const Eigen::MatrixXd X = ps.X.value(point);
  return half_contract(h.inverse, g, X);
}

Eigen::VectorXd PotentialField::gradient_x(std::span<const double> point) const {
  Eigen::VectorXd grad(n_);
  if (const auto* e = std::get_if<Expression>(&impl_)) {
    for (int j = 0; j < n_; ++j) grad(j) = e->grad[static_cast<std::size_t>(j)].eval(point);
    return grad;
  }
  const auto& ps = std::get<PerfectSquare>(impl_);
  const auto t = point.subspan(0, static_cast<std::size_t>(m_));
  const auto h = evaluate_metric(ps.h, t);
  const Eigen::MatrixXd g = ps.g.value(point);
  const auto dg = ps.g.first_derivatives(point);
  const Eigen::MatrixXd X = ps.X.value(point);
  for (int j = 0; j < n_; ++j) {
    const Eigen::MatrixXd dX = ps.X.d_dx(point, j);
    // ∂_j(½ h g X X) = ½ h ∂_j g X X + h g ∂_j X X
    grad(j) = half_contract(h.inverse, dg[static_cast<std::size_t>(j)], X) +
              (h.inverse * X.transpose() * g * dX).trace();
  }
  return grad;
}

PotentialField perfect_square_c(const MetricField& h, const MetricField& g, const DistTensor& X) {
  PotentialField c;
  c.m_ = X.m();
  c.n_ = X.n();
  c.impl_ = PotentialField::PerfectSquare{h, g, X};
  return c;
}

std::string to_string(LagrangianKind kind) {
  switch (kind) {
    case LagrangianKind::Ef: return "E_f";
    case LagrangianKind::EfgT: return "E_fgT";
    case LagrangianKind::EgcX: return "E_gcX";
    case LagrangianKind::L4: return "L4";
    case LagrangianKind::L5: return "L5";
    case LagrangianKind::L6: return "L6";
    case LagrangianKind::L7: return "L7";
    case LagrangianKind::L8: return "L8";
    case LagrangianKind::L9: return "L9";
    case LagrangianKind::Lgamma: return "Lgamma";
  }
  return "unknown";
}

DensityFunction f_energy_density(const MetricField& h, const MetricField& f) {
  return [h, f](std::span<const double> t, std::span<const double> x, const Eigen::MatrixXd& dx) {
    const auto hm = evaluate_metric(h, t);
    const auto p = base_point(t, x);
    return half_contract(hm.inverse, f.value(p), dx);
  };
}

DensityFunction deviated_density(const MetricField& h, const MetricField& g, const MetricField& f,
                                 const DistTensor& T) {
  return [h, g, f, T](std::span<const double> t, std::span<const double> x, const Eigen::MatrixXd& dx) {
    const auto hm = evaluate_metric(h, t);
    const auto p = base_point(t, x);
    const Eigen::MatrixXd dev = dx - T.value(p);
    return half_contract(hm.inverse, f.value(p), dx) + half_contract(hm.inverse, g.value(p), dev);
  };
}

DensityFunction general_density(const MetricField& h, const MetricField& g, const DistTensor& X,
                                const PotentialField& c) {
  return [h, g, X, c](std::span<const double> t, std::span<const double> x, const Eigen::MatrixXd& dx) {
    const auto hm = evaluate_metric(h, t);
    const auto p = base_point(t, x);
    const Eigen::MatrixXd gv = g.value(p);
    const Eigen::MatrixXd Xv = X.value(p);
    return half_contract(hm.inverse, gv, dx) - (hm.inverse * dx.transpose() * gv * Xv).trace() + c.value(p);
  };
}

DensityFunction least_squares_density_function(const MetricField& h, const MetricField& metric,
                                               const DistTensor& X) {
  return [h, metric, X](std::span<const double> t, std::span<const double> x, const Eigen::MatrixXd& dx) {
    const auto hm = evaluate_metric(h, t);
    const auto p = base_point(t, x);
    return half_contract(hm.inverse, metric.value(p), dx - X.value(p));
  };
}

DensityFunction l5_density(const MetricField& h, const MetricField& g, const DistTensor& T) {
  return [h, g, T](std::span<const double> t, std::span<const double> x, const Eigen::MatrixXd& dx) {
    const auto hm = evaluate_metric(h, t);
    const auto p = base_point(t, x);
    const Eigen::MatrixXd gv = g.value(p);
    const Eigen::MatrixXd Tv = T.value(p);
    return (hm.inverse * dx.transpose() * gv * Tv).trace() - half_contract(hm.inverse, gv, Tv);
  };
}

DensityFunction l6_density(const MetricField& h, const MetricField& g, const DistTensor& Y) {
  return f_energy_density(h, lowered_endomorphism(g, Y));
}

namespace {

std::vector<std::vector<ScalarExpr>> lowered_entries(const MetricField& g, const DistTensor& Y) {
  const int n = g.dim();
  std::vector<std::vector<ScalarExpr>> gy(static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ScalarExpr s = ScalarExpr::constant(0.0);
      for (int q = 0; q < n; ++q) s = s + g.entry(i, q) * Y.entry(q, j);
      gy[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
    }
  return gy;
}

}  // namespace

MetricField lowered_endomorphism(const MetricField& g, const DistTensor& Y) {
  // Only the symmetric part of g_is Y^s_j enters a quadratic form.
  const int n = g.dim();
  auto gy = lowered_entries(g, Y);
  std::vector<std::vector<ScalarExpr>> f(static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
  const auto half = ScalarExpr::constant(0.5);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      f[ui][uj] = i == j ? gy[ui][uj] : half * (gy[ui][uj] + gy[uj][ui]);
    }
  return MetricField(f, g.offset(), MetricKind::Symmetric);
}

MetricField symmetrized_endomorphism(const MetricField& g, const DistTensor& Y) {
  const int n = g.dim();
  auto gy = lowered_entries(g, Y);
  std::vector<std::vector<ScalarExpr>> f(static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      f[ui][uj] = gy[ui][uj] + gy[uj][ui];
    }
  return MetricField(f, g.offset(), MetricKind::Symmetric);
}

DensityField evaluate_density(const MapPartials& x, const DensityFunction& density, const MetricField& h,
                              LagrangianKind kind, bool include_volume) {
  const GridSpec& grid = x.grid();
  DensityField out;
  out.grid = grid;
  out.kind = kind;
  out.includes_volume_factor = include_volume;
  out.values.resize(grid.node_count());
  out.volume.resize(grid.node_count());
  Eigen::MatrixXd dx(x.n(), x.m());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto t = grid.coordinates(node);
    for (int i = 0; i < x.n(); ++i)
      for (int a = 0; a < x.m(); ++a) dx(i, a) = x.dx(node, i, a);
    const auto hm = evaluate_metric(h, t);
    const double volume = std::sqrt(std::abs(hm.determinant));
    const double e = density(t, x.point(node), dx);
    out.volume[node] = volume;
    out.values[node] = include_volume ? e * volume : e;
  }
  return out;
}

DensityField energy_f(const MapPartials& x, const MetricField& h, const MetricField& f) {
  return evaluate_density(x, f_energy_density(h, f), h, LagrangianKind::Ef, false);
}

DensityField energy_deviated(const MapPartials& x, const MetricField& h, const MetricField& g,
                             const MetricField& f, const DistTensor& T) {
  if (T.shape() != TensorShape::Sheet) throw ShapeError("deviated energy needs a sheet tensor T(t)");
  return evaluate_density(x, deviated_density(h, g, f, T), h, LagrangianKind::EfgT, false);
}

DensityField energy_general(const MapPartials& x, const MetricField& h, const MetricField& g,
                            const DistTensor& X, const PotentialField& c) {
  if (X.shape() != TensorShape::Mixed) throw ShapeError("general energy needs a mixed tensor X(t,x)");
  return evaluate_density(x, general_density(h, g, X, c), h, LagrangianKind::EgcX, false);
}

DensityField least_squares_density(const MapPartials& x, const MetricField& h, const MetricField& metric,
                                   const DistTensor& X) {
  return evaluate_density(x, least_squares_density_function(h, metric, X), h, LagrangianKind::L4, true);
}

DensityField composite_densities(LagrangianKind kind, const MapPartials& x, const CompositeInputs& in) {
  switch (kind) {
    case LagrangianKind::L7:
      if (in.T.shape() != TensorShape::Sheet) throw ShapeError("L7 needs a sheet tensor T(t)");
      return evaluate_density(x, deviated_density(in.h, in.g, in.f, in.T), in.h, kind, true);
    case LagrangianKind::L8:
      if (in.Y.shape() != TensorShape::Endomorphism) throw ShapeError("L8 needs an endomorphism Y(x)");
      return evaluate_density(x, f_energy_density(in.h, lowered_endomorphism(in.g, in.Y)), in.h, kind, true);
    case LagrangianKind::L9:
      if (in.Y.shape() != TensorShape::Endomorphism) throw ShapeError("L9 needs an endomorphism Y(x)");
      return evaluate_density(x, f_energy_density(in.h, symmetrized_endomorphism(in.g, in.Y)), in.h, kind, true);
    default:
      throw ShapeError("composite_densities handles L7, L8 and L9 only");
  }
}

double total_energy(const DensityField& d) {
  double sum = 0.0;
  for (std::size_t node = 0; node < d.grid.node_count(); ++node) {
    const double v = d.includes_volume_factor ? d.values[node] : d.values[node] * d.volume[node];
    sum += d.grid.trapezoid_weight(node) * v;
  }
  return sum;
}

}  // namespace varigeo
