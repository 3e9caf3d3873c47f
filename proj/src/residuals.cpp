#include "varigeo/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "varigeo/conditions.hpp"

namespace varigeo {

double ResidualReport::norm(std::size_t k) const {
  double s = 0.0;
  for (double v : at(k)) s += v * v;
  return std::sqrt(s);
}

void ResidualReport::recompute_norms() {
  max_norm = 0.0;
  mean_norm = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double r = norm(k);
    max_norm = std::max(max_norm, r);
    mean_norm += r;
  }
  if (!nodes.empty()) mean_norm /= static_cast<double>(nodes.size());
}

ResidualReport evaluate_residual(const GridSpec& grid, int width, const NodeResidual& fn, int margin) {
  ResidualReport out;
  out.grid = grid;
  out.width = width;
  out.nodes = grid.interior_nodes(margin);
  if (out.nodes.empty()) throw GridError("grid has no interior nodes for residual evaluation");
  out.values.assign(out.nodes.size() * static_cast<std::size_t>(width), 0.0);
  for (std::size_t k = 0; k < out.nodes.size(); ++k) fn(out.nodes[k], out.at(k));
  out.recompute_norms();
  return out;
}

ResidualReport difference(const ResidualReport& a, const ResidualReport& b) {
  if (!(a.grid == b.grid) || a.width != b.width || a.nodes != b.nodes)
    throw ShapeError("residual reports cover different grids or widths");
  ResidualReport out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] - b.values[k];
  out.recompute_norms();
  return out;
}

double shared_max_norm(const ResidualReport& coarse, const ResidualReport& fine) {
  if (!(fine.grid == coarse.grid.refined())) return fine.max_norm;
  std::vector<int> idx(static_cast<std::size_t>(coarse.grid.dim()));
  double worst = 0.0;
  std::size_t k = 0;
  for (std::size_t c = 0; c < coarse.nodes.size(); ++c) {
    const auto ci = coarse.grid.multi_index(coarse.nodes[c]);
    for (std::size_t a = 0; a < idx.size(); ++a) idx[a] = 2 * ci[a];
    const std::size_t target = fine.grid.linear_index(idx);
    while (k < fine.nodes.size() && fine.nodes[k] < target) ++k;
    if (k < fine.nodes.size() && fine.nodes[k] == target) worst = std::max(worst, fine.norm(k));
  }
  return worst;
}

double convergence_ratio(const ResidualReport& coarse, const ResidualReport& fine) {
  return coarse.max_norm / shared_max_norm(coarse, fine);
}

namespace {

// Everything the pointwise formulas need at one node.
struct NodeState {
  std::vector<double> t;
  std::vector<double> point;  // (t, x)
  Eigen::MatrixXd dx;         // n x m
  std::vector<Eigen::VectorXd> ddx;  // [a*m+b], length n
  Eigen::MatrixXd hinv;
  Tensor3 H;

  const Eigen::VectorXd& second(int a, int b) const {
    return ddx[static_cast<std::size_t>(a * static_cast<int>(t.size()) + b)];
  }
};

NodeState node_state(const MapPartials& x, std::size_t node, const MetricField& h) {
  const GridSpec& grid = x.grid();
  const int m = x.m();
  const int n = x.n();
  NodeState s;
  s.t = grid.coordinates(node);
  s.point = base_point(s.t, x.point(node));
  s.dx.resize(n, m);
  s.ddx.assign(static_cast<std::size_t>(m * m), Eigen::VectorXd(n));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a) {
      s.dx(i, a) = x.dx(node, i, a);
      for (int b = 0; b < m; ++b) s.ddx[static_cast<std::size_t>(a * m + b)](i) = x.ddx(node, i, a, b);
    }
  const auto hm = evaluate_metric(h, s.t);
  s.hinv = hm.inverse;
  s.H = christoffel_from_values(hm.inverse, h.first_derivatives(s.t));
  return s;
}

// x^j_αβ − H^γ_αβ x^j_γ for every (a, b): [a*m+b] -> n-vector.
std::vector<Eigen::VectorXd> tension_base(const NodeState& s) {
  const int m = static_cast<int>(s.t.size());
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(m * m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Eigen::VectorXd v = s.second(a, b);
      for (int c = 0; c < m; ++c) v -= s.H(c, a, b) * s.dx.col(c);
      out.push_back(v);
    }
  return out;
}

// h^{αβ} M(i, j, k) x^j_α x^k_β with i the free index.
Eigen::VectorXd contract_free_first(const NodeState& s, const Tensor3& table) {
  const int n = table.dim(0);
  const int m = static_cast<int>(s.t.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double hab = s.hinv(a, b);
      if (hab == 0.0) continue;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) out(i) += hab * table(i, j, k) * s.dx(j, a) * s.dx(k, b);
    }
  return out;
}

// h^{αβ} f_ij (x^j_αβ − H x) + h^{αβ} F_{jk|i} x^j_α x^k_β.
Eigen::VectorXd ultra_harmonic_at(const NodeState& s, const MetricField& f) {
  const int m = static_cast<int>(s.t.size());
  const Eigen::MatrixXd fv = f.value(s.point);
  const Tensor3 F = first_kind_from_values(f.first_derivatives(s.point));
  const auto base = tension_base(s);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(fv.rows());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) v += s.hinv(a, b) * (fv * base[static_cast<std::size_t>(a * m + b)]);
  return v + contract_free_first(s, F);
}

// G stored (k, i, j) = G^k_ij, so it contracts with the free index first.
Eigen::VectorXd harmonic_at(const NodeState& s, const Tensor3& G) {
  const int m = static_cast<int>(s.t.size());
  const auto base = tension_base(s);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(G.dim(0));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) v += s.hinv(a, b) * base[static_cast<std::size_t>(a * m + b)];
  return v + contract_free_first(s, G);
}

void write(std::span<double> out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
}

void require_dims(const MapPartials& x, const MetricField& h, const MetricField& g) {
  if (h.dim() != x.m()) throw ShapeError("h has dimension " + std::to_string(h.dim()) + ", map domain has " + std::to_string(x.m()));
  if (g.dim() != x.n()) throw ShapeError("target metric has dimension " + std::to_string(g.dim()) + ", map target has " + std::to_string(x.n()));
}

// T-dependent right-hand side shared by the deviated energy and the
// non-homogeneous dynamics; index p down.
Eigen::VectorXd deviation_rhs(const NodeState& s, const MetricField& g, const DistTensor& T) {
  const int m = static_cast<int>(s.t.size());
  const int n = g.dim();
  const Eigen::MatrixXd gv = g.value(s.point);
  const auto dg = g.first_derivatives(s.point);
  const Eigen::MatrixXd Tv = T.value(s.point);
  std::vector<Eigen::MatrixXd> dT;
  for (int b = 0; b < m; ++b) dT.push_back(T.d_dt(s.point, b));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double hab = s.hinv(a, b);
      if (hab == 0.0) continue;
      Eigen::VectorXd w = dT[static_cast<std::size_t>(b)].col(a);
      for (int c = 0; c < m; ++c) w -= Tv.col(c) * s.H(c, a, b);
      rhs += hab * (gv * w);
      for (int p = 0; p < n; ++p) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            // ∂_j g_pk − ∂_p g_jk = g_sp G^s_jk − g_sj G^s_kp
            const double bracket = dg[static_cast<std::size_t>(j)](p, k) - dg[static_cast<std::size_t>(p)](j, k);
            acc += s.dx(j, a) * Tv(k, b) * bracket;
            acc += 0.5 * Tv(j, a) * Tv(k, b) * dg[static_cast<std::size_t>(p)](j, k);
          }
        rhs(p) += hab * acc;
      }
    }
  return rhs;
}

}  // namespace

ResidualReport named_from_el(const ResidualReport& el, const MapPartials& x, const MetricField& g,
                             IndexPosition position) {
  ResidualReport out = el;
  for (std::size_t k = 0; k < out.nodes.size(); ++k) {
    const std::size_t node = out.nodes[k];
    auto v = out.at(k);
    Eigen::VectorXd e(el.width);
    for (int i = 0; i < el.width; ++i) e(i) = -v[static_cast<std::size_t>(i)];
    if (position == IndexPosition::Upper) {
      const auto p = base_point(x.grid().coordinates(node), x.point(node));
      e = invert_metric(g.value(p), "target metric").inverse * e;
    }
    write(v, e);
  }
  out.recompute_norms();
  return out;
}

ResidualReport el_residual_generic(const MapPartials& x, const DensityFunction& density, const MetricField& h) {
  const GridSpec& grid = x.grid();
  if (h.dim() != x.m()) throw ShapeError("h dimension does not match the map domain");
  const int m = x.m();
  const int n = x.n();
  const auto un = static_cast<std::size_t>(n);

  // ∂E/∂x^k and P^α_k = ∂E/∂x^k_α at every node.
  NodalField dEdx(grid, n);
  std::vector<NodalField> P(static_cast<std::size_t>(m), NodalField(grid, n));
  std::vector<double> xv(un);
  Eigen::MatrixXd dx(n, m);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto t = grid.coordinates(node);
    for (int i = 0; i < n; ++i) {
      xv[static_cast<std::size_t>(i)] = x.x(node, i);
      for (int a = 0; a < m; ++a) dx(i, a) = x.dx(node, i, a);
    }
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double v0 = xv[uk];
      const double step = 1e-6 * (1.0 + std::abs(v0));
      xv[uk] = v0 + step;
      const double ep = density(t, xv, dx);
      xv[uk] = v0 - step;
      const double em = density(t, xv, dx);
      xv[uk] = v0;
      dEdx.at(node)[uk] = (ep - em) / (2.0 * step);
      for (int a = 0; a < m; ++a) {
        const double d0 = dx(k, a);
        const double s = 1e-6 * (1.0 + std::abs(d0));
        dx(k, a) = d0 + s;
        const double fp = density(t, xv, dx);
        dx(k, a) = d0 - s;
        const double fm = density(t, xv, dx);
        dx(k, a) = d0;
        P[static_cast<std::size_t>(a)].at(node)[uk] = (fp - fm) / (2.0 * s);
      }
    }
  }
  std::vector<NodalField> dP;
  for (int a = 0; a < m; ++a) dP.push_back(differentiate(P[static_cast<std::size_t>(a)], a));

  return evaluate_residual(grid, n, [&](std::size_t node, std::span<double> out) {
    const auto t = grid.coordinates(node);
    const auto hm = evaluate_metric(h, t);
    const Tensor3 H = christoffel_from_values(hm.inverse, h.first_derivatives(t));
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      double r = dEdx.at(node)[uk];
      for (int a = 0; a < m; ++a) {
        r -= dP[static_cast<std::size_t>(a)].at(node)[uk];
        double trace = 0.0;
        for (int c = 0; c < m; ++c) trace += H(c, c, a);
        r -= trace * P[static_cast<std::size_t>(a)].at(node)[uk];
      }
      out[uk] = r;
    }
  });
}

ResidualReport ultra_harmonic_residual(const MapPartials& x, const MetricField& h, const MetricField& f) {
  require_dims(x, h, f);
  return evaluate_residual(x.grid(), x.n(), [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h);
    write(out, ultra_harmonic_at(s, f));
  });
}

ResidualReport harmonic_residual(const MapPartials& x, const MetricField& h, const MetricField& g) {
  require_dims(x, h, g);
  return evaluate_residual(x.grid(), x.n(), [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h);
    const auto gm = evaluate_metric(g, s.point);
    const Tensor3 G = christoffel_from_values(gm.inverse, g.first_derivatives(s.point));
    write(out, harmonic_at(s, G));
  });
}

ResidualReport ultra_potential_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                        const MetricField& f, const DistTensor& T) {
  require_dims(x, h, g);
  if (f.dim() != g.dim()) throw ShapeError("f and g have different dimensions");
  if (T.shape() != TensorShape::Sheet) throw ShapeError("T must be a sheet tensor T(t)");
  const MetricField fg = (f + g).with_kind(MetricKind::Symmetric);
  return evaluate_residual(x.grid(), x.n(), [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h);
    write(out, ultra_harmonic_at(s, fg) - deviation_rhs(s, g, T));
  });
}

CovariantPieces covariant_pieces(const DistTensor& X, const MetricField& h, const MetricField& g,
                                 const std::vector<std::vector<double>>& points) {
  const int m = X.m();
  const int n = X.n();
  CovariantPieces out;
  out.points = points;
  for (const auto& p : points) {
    const std::span<const double> t(p.data(), static_cast<std::size_t>(m));
    const auto hm = evaluate_metric(h, t);
    const Tensor3 H = christoffel_from_values(hm.inverse, h.first_derivatives(t));
    const auto gm = evaluate_metric(g, p);
    const Tensor3 G = christoffel_from_values(gm.inverse, g.first_derivatives(p));
    const Eigen::MatrixXd Xv = X.value(p);
    Tensor3 nabla(n, n, m), D(m, n, m), F(n, n, m);
    for (int j = 0; j < n; ++j) {
      const Eigen::MatrixXd dXj = X.d_dx(p, j);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) {
          double v = dXj(i, a);
          for (int k = 0; k < n; ++k) v += G(i, j, k) * Xv(k, a);
          nabla(j, i, a) = v;
        }
    }
    for (int b = 0; b < m; ++b) {
      const Eigen::MatrixXd dXb = X.d_dt(p, b);
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) {
          double v = dXb(i, a);
          for (int c = 0; c < m; ++c) v -= H(c, b, a) * Xv(i, c);
          D(b, i, a) = v;
        }
    }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) {
          double v = nabla(j, i, a);
          for (int hh = 0; hh < n; ++hh)
            for (int k = 0; k < n; ++k) v -= gm.value(hh, j) * gm.inverse(i, k) * nabla(k, hh, a);
          F(j, i, a) = v;
        }
    out.nabla_x.push_back(std::move(nabla));
    out.d_x.push_back(std::move(D));
    out.f_ten.push_back(std::move(F));
  }
  return out;
}

ResidualReport potential_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                  const DistTensor& X, const PotentialField& c) {
  require_dims(x, h, g);
  if (X.shape() != TensorShape::Mixed) throw ShapeError("X must be a mixed tensor X(t,x)");
  const int m = x.m();
  const int n = x.n();
  return evaluate_residual(x.grid(), n, [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h);
    const auto gm = evaluate_metric(g, s.point);
    const Tensor3 G = christoffel_from_values(gm.inverse, g.first_derivatives(s.point));
    Eigen::VectorXd r = harmonic_at(s, G) - gm.inverse * c.gradient_x(s.point);
    const auto pieces = covariant_pieces(X, h, g, {s.point});
    const Tensor3& F = pieces.f_ten[0];
    const Tensor3& D = pieces.d_x[0];
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double hab = s.hinv(a, b);
        if (hab == 0.0) continue;
        for (int i = 0; i < n; ++i) {
          double v = D(a, i, b);
          for (int k = 0; k < n; ++k) v += F(k, i, b) * s.dx(k, a);
          r(i) -= hab * v;
        }
      }
    write(out, r);
  });
}

namespace {

// h^{αβ} S(j, k, p) x^j_α x^k_β with the free index last.
Eigen::VectorXd contract_pair_first(const NodeState& s, const Tensor3& table) {
  const int n = table.dim(2);
  Tensor3 moved(n, n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < n; ++p) moved(p, j, k) = table(j, k, p);
  return contract_free_first(s, moved);
}

void require_endomorphism(const DistTensor& Y, int n) {
  if (Y.shape() != TensorShape::Endomorphism) throw ShapeError("Y must be an endomorphism Y(x)");
  if (Y.n() != n) throw ShapeError("Y dimension does not match the map target");
}

}  // namespace

ResidualReport nonhomogeneous_dynamics_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                                const DistTensor& Y, const DistTensor& T) {
  require_dims(x, h, g);
  require_endomorphism(Y, x.n());
  if (T.shape() != TensorShape::Sheet) throw ShapeError("T must be a sheet tensor T(t)");
  const int m = x.m();
  return evaluate_residual(x.grid(), x.n(), [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h);
    const Eigen::MatrixXd gy = g.value(s.point).transpose() * Y.value(s.point);  // (p, j) = g_ip Y^i_j
    const auto base = tension_base(s);
    Eigen::VectorXd lhs = Eigen::VectorXd::Zero(x.n());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) lhs += s.hinv(a, b) * (gy * base[static_cast<std::size_t>(a * m + b)]);
    lhs += contract_pair_first(s, omega_at(OmegaKind::Nonhomogeneous, g, Y, s.point).S);
    write(out, lhs - deviation_rhs(s, g, T));
  });
}

ResidualReport homogeneous_dynamics_residual(const MapPartials& x, const MetricField& h, const MetricField& g,
                                             const DistTensor& Y) {
  require_dims(x, h, g);
  require_endomorphism(Y, x.n());
  const int n = x.n();
  return evaluate_residual(x.grid(), n, [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h);
    const Eigen::MatrixXd gv = g.value(s.point);
    const auto gm = invert_metric(gv, "target metric");
    const Tensor3 G = christoffel_from_values(gm.inverse, g.first_derivatives(s.point));
    const Eigen::MatrixXd Yv = Y.value(s.point);
    const Eigen::MatrixXd gy = gv.transpose() * Yv;  // (k, j) = g_ik Y^i_j
    const Eigen::VectorXd harmonic = harmonic_at(s, G);
    // (∇_p Y)^i_j contracted with g_ik: table (k, j, p).
    Tensor3 lowered(n, n, n);
    for (int p = 0; p < n; ++p) {
      const Eigen::MatrixXd dYp = Y.d_dx(s.point, p);
      Eigen::MatrixXd nabla = dYp;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int q = 0; q < n; ++q) nabla(i, j) += G(i, p, q) * Yv(q, j) - G(q, p, j) * Yv(i, q);
      const Eigen::MatrixXd gn = gv.transpose() * nabla;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) lowered(k, j, p) = gn(k, j);
    }
    write(out, gy * harmonic + contract_free_first(s, lowered));
  });
}

ResidualReport h0_dynamics_residual(const MapPartials& x, const MetricField& h0, const MetricField& g,
                                    const DistTensor& Y) {
  require_dims(x, h0, g);
  require_endomorphism(Y, x.n());
  const int m = x.m();
  return evaluate_residual(x.grid(), x.n(), [&](std::size_t node, std::span<double> out) {
    const NodeState s = node_state(x, node, h0);
    const Eigen::MatrixXd gy = g.value(s.point) * Y.value(s.point);  // g_is Y^s_j
    const Eigen::MatrixXd f = gy + gy.transpose();
    const auto base = tension_base(s);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(x.n());
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) r += s.hinv(a, b) * (f * base[static_cast<std::size_t>(a * m + b)]);
    r += contract_pair_first(s, omega_at(OmegaKind::H0, g, Y, s.point).S);
    write(out, r);
  });
}

}  // namespace varigeo
