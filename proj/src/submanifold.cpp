#include "varigeo/submanifold.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "varigeo/errors.hpp"

namespace varigeo {

namespace {

std::string where_text(const GridSpec& grid, std::size_t node) {
  std::ostringstream os;
  os << "node " << node << " t=(";
  const auto t = grid.coordinates(node);
  for (std::size_t k = 0; k < t.size(); ++k) os << (k ? ", " : "") << t[k];
  os << ')';
  return os.str();
}

Eigen::MatrixXd jacobian(const MapPartials& x, std::size_t node) {
  Eigen::MatrixXd J(x.n(), x.m());
  for (int i = 0; i < x.n(); ++i)
    for (int a = 0; a < x.m(); ++a) J(i, a) = x.dx(node, i, a);
  return J;
}

std::vector<double> node_point(const MapPartials& x, std::size_t node) {
  return base_point(x.grid().coordinates(node), x.point(node));
}

void require_target(const MapPartials& x, const MetricField& g) {
  if (g.dim() != x.n() || g.offset() != x.m())
    throw ShapeError("metric g must act on x1..x" + std::to_string(x.n()) + " after " + std::to_string(x.m()) +
                     " parameters");
}

void require_rank(const Eigen::MatrixXd& J, const std::string& where) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  if (J.cols() > J.rows() || sv(J.cols() - 1) <= 1e-10 * std::max(1.0, sv(0)))
    throw RankDeficiencyError("map is not an immersion at " + where);
}

// Pack a per-node tensor table into a nodal field and back, so it can be
// differenced along the grid.
NodalField pack(const GridSpec& grid, const std::vector<Tensor3>& tables) {
  const auto w = tables.empty() ? 0 : static_cast<int>(tables[0].data().size());
  NodalField f(grid, w);
  for (std::size_t node = 0; node < tables.size(); ++node)
    std::copy(tables[node].data().begin(), tables[node].data().end(), f.at(node).begin());
  return f;
}

std::vector<Tensor3> unpack(const NodalField& f, const Tensor3& like) {
  std::vector<Tensor3> out;
  out.reserve(f.grid.node_count());
  for (std::size_t node = 0; node < f.grid.node_count(); ++node) {
    Tensor3 t(like.dim(0), like.dim(1), like.dim(2));
    const auto v = f.at(node);
    std::size_t k = 0;
    for (int a = 0; a < t.dim(0); ++a)
      for (int b = 0; b < t.dim(1); ++b)
        for (int c = 0; c < t.dim(2); ++c) t(a, b, c) = v[k++];
    out.push_back(std::move(t));
  }
  return out;
}

// X^I_μ for a jet point: rows (i,0) copy the tangents, rows (i,α) combine
// the tables with the tangents and the normals. With `derivative` only the
// table-dependent rows are kept (their t-derivative through the tables).
Eigen::MatrixXd jet_field(int m, int n, std::span<const double> jet, const Tensor3& lambda, const Tensor3& forms,
                          const Eigen::MatrixXd& normals, bool derivative) {
  const int N = n * (m + 1);
  const int k = n - m;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, m);
  for (int mu = 0; mu < m; ++mu) {
    if (!derivative)
      for (int i = 0; i < n; ++i) X(i, mu) = jet[static_cast<std::size_t>((mu + 1) * n + i)];
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int c = 0; c < m; ++c) v += lambda(c, mu, a) * jet[static_cast<std::size_t>((c + 1) * n + i)];
        for (int b = 0; b < k; ++b) v += forms(b, mu, a) * normals(i, b);
        X((a + 1) * n + i, mu) = v;
      }
  }
  return X;
}

Eigen::MatrixXd jet_tangents(int m, int n, std::span<const double> jet) {
  Eigen::MatrixXd J(n, m);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) J(i, a) = jet[static_cast<std::size_t>((a + 1) * n + i)];
  return J;
}

}  // namespace

std::vector<Eigen::MatrixXd> induced_metric(const MapPartials& x, const MetricField& g) {
  require_target(x, g);
  std::vector<Eigen::MatrixXd> eta;
  eta.reserve(x.grid().node_count());
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    const Eigen::MatrixXd J = jacobian(x, node);
    require_rank(J, where_text(x.grid(), node));
    eta.push_back(J.transpose() * g.value(node_point(x, node)) * J);
  }
  return eta;
}

MetricField induced_metric_expr(const std::vector<ScalarExpr>& map, const MetricField& g) {
  const int m = g.offset();
  const int n = g.dim();
  if (static_cast<int>(map.size()) != n) throw ShapeError("map needs " + std::to_string(n) + " components");
  const auto vars = g.entry(0, 0).variable_set();
  std::vector<std::optional<ScalarExpr>> repl(static_cast<std::size_t>(vars ? vars->size() : m + n));
  for (int i = 0; i < n; ++i) {
    for (int v : map[static_cast<std::size_t>(i)].variables_used())
      if (v >= m) throw ShapeError("map expressions may only reference t1..t" + std::to_string(m));
    repl[static_cast<std::size_t>(m + i)] = map[static_cast<std::size_t>(i)];
  }
  std::vector<std::vector<ScalarExpr>> gx(static_cast<std::size_t>(n), std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      gx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = gx[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
          g.entry(i, j).substitute(repl);
  std::vector<std::vector<ScalarExpr>> eta(static_cast<std::size_t>(m), std::vector<ScalarExpr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      ScalarExpr sum = ScalarExpr::constant(0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          sum = sum + gx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * map[static_cast<std::size_t>(i)].diff(a) *
                          map[static_cast<std::size_t>(j)].diff(b);
      eta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = sum;
    }
  return MetricField(eta, 0);
}

Eigen::MatrixXd normal_vectors(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& g, std::span<const double> x,
                               FrameOrientation orientation, std::vector<int>* seeds_out, const std::vector<int>* seeds,
                               const Eigen::MatrixXd* reference) {
  const auto n = static_cast<int>(jacobian.rows());
  const auto m = static_cast<int>(jacobian.cols());
  const int k = n - m;
  if (k < 0) throw ShapeError("more tangents than target dimensions");
  auto inner = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return u.dot(g * v); };

  std::vector<Eigen::VectorXd> basis;
  for (int a = 0; a < m; ++a) {
    Eigen::VectorXd v = jacobian.col(a);
    const double scale = std::sqrt(std::abs(inner(v, v)));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) v -= inner(e, v) * e;
    const double len = std::sqrt(std::max(0.0, inner(v, v)));
    if (len <= 1e-10 * std::max(1.0, scale)) throw RankDeficiencyError("tangent vectors are linearly dependent");
    basis.push_back(v / len);
  }
  auto project = [&](Eigen::VectorXd v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) v -= inner(e, v) * e;
    return v;
  };

  Eigen::MatrixXd N(n, k);
  std::vector<int> used;
  for (int b = 0; b < k; ++b) {
    Eigen::VectorXd best;
    int pick = -1;
    if (seeds) {
      pick = (*seeds)[static_cast<std::size_t>(b)];
      best = project(Eigen::VectorXd::Unit(n, pick));
    } else {
      double best_len = -1.0;
      for (int j = 0; j < n; ++j) {
        if (std::find(used.begin(), used.end(), j) != used.end()) continue;
        Eigen::VectorXd v = project(Eigen::VectorXd::Unit(n, j));
        const double len = inner(v, v);
        if (len > best_len) {
          best_len = len;
          best = v;
          pick = j;
        }
      }
    }
    const double len = std::sqrt(std::max(0.0, inner(best, best)));
    if (len <= 1e-8) throw RankDeficiencyError("normal seed e_" + std::to_string(pick + 1) + " lies in the tangent space");
    best /= len;
    if (reference) {
      if (inner(best, reference->col(b)) < 0) best = -best;
    } else {
      bool flipped = false;
      if (orientation == FrameOrientation::AlongPosition) {
        const Eigen::VectorXd pos = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        const double s = inner(best, pos);
        if (std::abs(s) > 1e-12) {
          if (s < 0) best = -best;
          flipped = true;
        }
      }
      if (!flipped)
        for (int i = 0; i < n; ++i)
          if (std::abs(best(i)) > 1e-12) {
            if (best(i) < 0) best = -best;
            break;
          }
    }
    N.col(b) = best;
    basis.push_back(best);
    used.push_back(pick);
  }
  if (seeds_out) *seeds_out = used;
  return N;
}

NormalFrame normal_frame(const MapPartials& x, const MetricField& g, FrameOrientation orientation) {
  require_target(x, g);
  NormalFrame frame;
  frame.grid = x.grid();
  frame.n = x.n();
  frame.m = x.m();
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    const Eigen::MatrixXd J = jacobian(x, node);
    require_rank(J, where_text(x.grid(), node));
    std::vector<int> seeds;
    frame.normals.push_back(
        normal_vectors(J, g.value(node_point(x, node)), x.point(node), orientation, &seeds));
    frame.seeds.push_back(std::move(seeds));
  }
  return frame;
}

double frame_defect(const NormalFrame& frame, const MapPartials& x, const MetricField& g) {
  double worst = 0.0;
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    const Eigen::MatrixXd G = g.value(node_point(x, node));
    const Eigen::MatrixXd& N = frame.normals[node];
    const Eigen::MatrixXd gram = N.transpose() * G * N - Eigen::MatrixXd::Identity(N.cols(), N.cols());
    worst = std::max(worst, gram.cwiseAbs().maxCoeff());
    if (N.cols() > 0) worst = std::max(worst, (N.transpose() * G * jacobian(x, node)).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<Tensor3> tzitzeica_connection(const DistTensor& X, const MetricField& g,
                                          const std::vector<std::vector<double>>& points) {
  if (X.shape() != TensorShape::Mixed) throw ShapeError("X must be a mixed tensor X(t,x)");
  const int m = X.m();
  const int n = X.n();
  std::vector<Tensor3> out;
  for (const auto& p : points) {
    const Eigen::MatrixXd Xv = X.value(p);
    const Eigen::MatrixXd G = g.value(p);
    const Eigen::MatrixXd hinv = invert_metric(Xv.transpose() * G * Xv, "X^T g X").inverse;
    const Eigen::MatrixXd lowered = G * Xv;  // (i, σ) = g_ik X^k_σ
    std::vector<Eigen::MatrixXd> dxv, dtv;
    for (int j = 0; j < n; ++j) dxv.push_back(X.d_dx(p, j));
    for (int b = 0; b < m; ++b) dtv.push_back(X.d_dt(p, b));
    Tensor3 L(m, m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Eigen::VectorXd br = dtv[static_cast<std::size_t>(b)].col(a);
        for (int j = 0; j < n; ++j) br += dxv[static_cast<std::size_t>(j)].col(a) * Xv(j, b);
        const Eigen::VectorXd lam = hinv * (lowered.transpose() * br);
        for (int c = 0; c < m; ++c) L(c, a, b) = lam(c);
      }
    out.push_back(std::move(L));
  }
  return out;
}

std::vector<Tensor3> tzitzeica_on_map(const MapPartials& x, const MetricField& g) {
  require_target(x, g);
  const int m = x.m();
  const int n = x.n();
  std::vector<Tensor3> out;
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    const Eigen::MatrixXd J = jacobian(x, node);
    const Eigen::MatrixXd G = g.value(node_point(x, node));
    const Eigen::MatrixXd hinv = invert_metric(J.transpose() * G * J, where_text(x.grid(), node)).inverse;
    const Eigen::MatrixXd lowered = G * J;
    Tensor3 L(m, m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Eigen::VectorXd br(n);
        for (int i = 0; i < n; ++i) br(i) = x.ddx(node, i, a, b);
        const Eigen::VectorXd lam = hinv * (lowered.transpose() * br);
        for (int c = 0; c < m; ++c) L(c, a, b) = lam(c);
      }
    out.push_back(std::move(L));
  }
  return out;
}

std::vector<Tensor3> induced_connection(const MapPartials& x, const MetricField& g) {
  const auto eta = induced_metric(x, g);
  const int m = x.m();
  const int n = x.n();
  const auto count = x.grid().node_count();

  // deta[node][γ](α, β) = ∂_γ η_αβ
  std::vector<std::vector<Eigen::MatrixXd>> deta(count, std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(m)));
  if (x.exact()) {
    for (std::size_t node = 0; node < count; ++node) {
      const auto p = node_point(x, node);
      const Eigen::MatrixXd J = jacobian(x, node);
      const Eigen::MatrixXd G = g.value(p);
      const auto dg = g.first_derivatives(p);
      for (int c = 0; c < m; ++c) {
        Eigen::MatrixXd dgc = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) dgc += dg[static_cast<std::size_t>(k)] * J(k, c);
        Eigen::MatrixXd Jc(n, m);
        for (int i = 0; i < n; ++i)
          for (int a = 0; a < m; ++a) Jc(i, a) = x.ddx(node, i, a, c);
        const Eigen::MatrixXd cross = Jc.transpose() * G * J;
        deta[node][static_cast<std::size_t>(c)] = J.transpose() * dgc * J + cross + cross.transpose();
      }
    }
  } else {
    NodalField f(x.grid(), m * m);
    for (std::size_t node = 0; node < count; ++node)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) f.at(node)[static_cast<std::size_t>(a * m + b)] = eta[node](a, b);
    for (int c = 0; c < m; ++c) {
      const NodalField d = differentiate(f, c);
      for (std::size_t node = 0; node < count; ++node) {
        Eigen::MatrixXd v(m, m);
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) v(a, b) = d.at(node)[static_cast<std::size_t>(a * m + b)];
        deta[node][static_cast<std::size_t>(c)] = v;
      }
    }
  }

  std::vector<Tensor3> out;
  out.reserve(count);
  for (std::size_t node = 0; node < count; ++node) {
    const Eigen::MatrixXd etainv = invert_metric(eta[node], where_text(x.grid(), node)).inverse;
    Tensor3 L = christoffel_from_values(etainv, deta[node]);
    const auto p = node_point(x, node);
    const auto gm = evaluate_metric(g, p);
    const Tensor3 Gam = christoffel_from_values(gm.inverse, g.first_derivatives(p));
    if (Gam.max_abs() > 0.0) {
      const Eigen::MatrixXd J = jacobian(x, node);
      const Eigen::MatrixXd lowered = gm.value * J;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k) q(i) += Gam(i, j, k) * J(j, a) * J(k, b);
          const Eigen::VectorXd corr = etainv * (lowered.transpose() * q);
          for (int c = 0; c < m; ++c) L(c, a, b) -= corr(c);
        }
    }
    out.push_back(std::move(L));
  }
  return out;
}

FundamentalForms fundamental_forms(const MapPartials& x, const MetricField& g, const NormalFrame& frame) {
  require_target(x, g);
  const int m = x.m();
  const int n = x.n();
  const int k = n - m;
  FundamentalForms out;
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    const Eigen::MatrixXd lowered = g.value(node_point(x, node)) * frame.normals[node];
    Tensor3 F(k, m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Eigen::VectorXd dd(n);
        for (int i = 0; i < n; ++i) dd(i) = x.ddx(node, i, a, b);
        const Eigen::VectorXd v = lowered.transpose() * dd;
        for (int c = 0; c < k; ++c) F(c, a, b) = v(c);
      }
    for (int c = 0; c < k; ++c)
      for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) out.asymmetry = std::max(out.asymmetry, std::abs(F(c, a, b) - F(c, b, a)));
    out.forms.push_back(std::move(F));
  }
  return out;
}

FundamentalForms fundamental_forms_field(const DistTensor& X, const MetricField& g,
                                         const std::vector<std::vector<double>>& points,
                                         FrameOrientation orientation) {
  if (X.shape() != TensorShape::Mixed) throw ShapeError("X must be a mixed tensor X(t,x)");
  const int m = X.m();
  const int n = X.n();
  const int k = n - m;
  FundamentalForms out;
  for (const auto& p : points) {
    const Eigen::MatrixXd Xv = X.value(p);
    const Eigen::MatrixXd G = g.value(p);
    const std::span<const double> xs(p.data() + m, static_cast<std::size_t>(n));
    const Eigen::MatrixXd lowered = G * normal_vectors(Xv, G, xs, orientation);
    std::vector<Eigen::MatrixXd> dxv, dtv;
    for (int j = 0; j < n; ++j) dxv.push_back(X.d_dx(p, j));
    for (int b = 0; b < m; ++b) dtv.push_back(X.d_dt(p, b));
    Tensor3 F(k, m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Eigen::VectorXd br = dtv[static_cast<std::size_t>(b)].col(a);
        for (int j = 0; j < n; ++j) br += dxv[static_cast<std::size_t>(j)].col(a) * Xv(j, b);
        const Eigen::VectorXd v = lowered.transpose() * br;
        for (int c = 0; c < k; ++c) F(c, a, b) = v(c);
      }
    for (int c = 0; c < k; ++c)
      for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) out.asymmetry = std::max(out.asymmetry, std::abs(F(c, a, b) - F(c, b, a)));
    out.forms.push_back(std::move(F));
  }
  return out;
}

ResidualReport gauss_residual(const MapPartials& x, const MetricField& g, const NormalFrame& frame) {
  const int m = x.m();
  const int n = x.n();
  const int k = n - m;
  const auto lambda = induced_connection(x, g);
  const auto forms = fundamental_forms(x, g, frame).forms;
  return evaluate_residual(x.grid(), m * m * n, [&](std::size_t node, std::span<double> out) {
    const Eigen::MatrixXd& N = frame.normals[node];
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int i = 0; i < n; ++i) {
          double v = x.ddx(node, i, a, b);
          for (int c = 0; c < m; ++c) v -= lambda[node](c, a, b) * x.dx(node, i, c);
          for (int c = 0; c < k; ++c) v -= forms[node](c, a, b) * N(i, c);
          out[static_cast<std::size_t>((a * m + b) * n + i)] = v;
        }
  });
}

Eigen::MatrixXd JetLift::field(std::size_t node, std::span<const double> jet_point) const {
  const auto t = grid.coordinates(node);
  const std::span<const double> xs(jet_point.data(), static_cast<std::size_t>(n));
  const Eigen::MatrixXd J = jet_tangents(m, n, jet_point);
  const Eigen::MatrixXd N = normal_vectors(J, g.value(base_point(t, xs)), xs, FrameOrientation::FirstComponentPositive,
                                           nullptr, &frame.seeds[node], &frame.normals[node]);
  return jet_field(m, n, jet_point, lambda[node], forms[node], N, false);
}

JetLift jet_lift(const MapPartials& x, const MetricField& g, const NormalFrame& frame) {
  JetLift lift;
  lift.grid = x.grid();
  lift.m = x.m();
  lift.n = x.n();
  lift.g = g;
  lift.frame = frame;
  lift.lambda = induced_connection(x, g);
  lift.forms = fundamental_forms(x, g, frame).forms;
  const int m = lift.m;
  const int n = lift.n;
  const int N = lift.jet_dim();
  lift.xi = MapGrid(x.grid(), N, x.exact() ? Provenance::Analytic : Provenance::UserSupplied);
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    auto v = lift.xi.at(node);
    for (int i = 0; i < n; ++i) {
      v[static_cast<std::size_t>(i)] = x.x(node, i);
      for (int a = 0; a < m; ++a) v[static_cast<std::size_t>((a + 1) * n + i)] = x.dx(node, i, a);
    }
    lift.X.push_back(jet_field(m, n, v, lift.lambda[node], lift.forms[node], frame.normals[node], false));
  }

  // ∂𝔵/∂t^μ: exact partials when available, grid differences otherwise.
  std::vector<NodalField> dxi;
  if (!x.exact()) {
    NodalField f(x.grid(), N);
    f.data = lift.xi.values;
    for (int mu = 0; mu < m; ++mu) dxi.push_back(differentiate(f, mu));
  }
  lift.first_order = evaluate_residual(x.grid(), m * N, [&](std::size_t node, std::span<double> out) {
    for (int mu = 0; mu < m; ++mu)
      for (int I = 0; I < N; ++I) {
        double d;
        if (x.exact()) {
          const int a = I / n;
          const int i = I % n;
          d = a == 0 ? x.dx(node, i, mu) : x.ddx(node, i, a - 1, mu);
        } else {
          d = dxi[static_cast<std::size_t>(mu)].at(node)[static_cast<std::size_t>(I)];
        }
        out[static_cast<std::size_t>(mu * N + I)] = d - lift.X[node](I, mu);
      }
  });
  return lift;
}

ResidualReport jet_potential_residual(const JetLift& lift, const MetricField& h, const MetricField& gamma) {
  const int m = lift.m;
  const int n = lift.n;
  const int N = lift.jet_dim();
  if (gamma.dim() != N || gamma.offset() != m)
    throw ShapeError("jet metric must act on the " + std::to_string(N) + " jet coordinates after the parameters");
  if (h.dim() != m || h.offset() != 0) throw ShapeError("h must be an m x m metric on t1..tm");

  const MapPartials P = grid_partials(lift.xi);
  std::vector<std::vector<Tensor3>> dlambda, dforms;
  if (!lift.lambda.empty()) {
    const NodalField lam = pack(lift.grid, lift.lambda);
    const NodalField frm = pack(lift.grid, lift.forms);
    for (int nu = 0; nu < m; ++nu) {
      dlambda.push_back(unpack(differentiate(lam, nu), lift.lambda[0]));
      dforms.push_back(unpack(differentiate(frm, nu), lift.forms[0]));
    }
  }

  // Λ from grid partials carries an O(h) error on the first boundary layer
  // (∂η mixes one-sided and central stencils there); its t-derivative then
  // spoils the second layer, so one more layer is excluded.
  return evaluate_residual(lift.grid, N, [&](std::size_t node, std::span<double> out) {
    const auto t = lift.grid.coordinates(node);
    const auto jet = lift.xi.at(node);
    const auto p = base_point(t, jet);
    const auto hm = evaluate_metric(h, t);
    const Tensor3 H = christoffel_from_values(hm.inverse, h.first_derivatives(t));
    const auto gm = evaluate_metric(gamma, p);
    const auto dgam = gamma.first_derivatives(p);
    const Tensor3 Gam = christoffel_from_values(gm.inverse, dgam);
    const Eigen::MatrixXd& X = lift.X[node];

    std::vector<Eigen::MatrixXd> dX(static_cast<std::size_t>(N));
    std::vector<double> probe(jet.begin(), jet.end());
    for (int L = 0; L < N; ++L) {
      const double v = probe[static_cast<std::size_t>(L)];
      const double step = 1e-4 * (1.0 + std::abs(v));
      probe[static_cast<std::size_t>(L)] = v + step;
      const Eigen::MatrixXd plus = lift.field(node, probe);
      probe[static_cast<std::size_t>(L)] = v - step;
      const Eigen::MatrixXd minus = lift.field(node, probe);
      probe[static_cast<std::size_t>(L)] = v;
      dX[static_cast<std::size_t>(L)] = (plus - minus) / (2.0 * step);
    }
    std::vector<Eigen::MatrixXd> dtX;
    for (int nu = 0; nu < m; ++nu)
      dtX.push_back(jet_field(m, n, jet, dlambda[static_cast<std::size_t>(nu)][node],
                              dforms[static_cast<std::size_t>(nu)][node], lift.frame.normals[node], true));

    // ∇_L X^K_μ stored per L as an N x m matrix.
    std::vector<Eigen::MatrixXd> nab(static_cast<std::size_t>(N));
    for (int L = 0; L < N; ++L) {
      Eigen::MatrixXd v = dX[static_cast<std::size_t>(L)];
      for (int K = 0; K < N; ++K)
        for (int S = 0; S < N; ++S) v.row(K) += Gam(K, L, S) * X.row(S);
      nab[static_cast<std::size_t>(L)] = v;
    }
    Eigen::VectorXd dc(N);
    const Eigen::MatrixXd gX = gm.value * X;
    for (int L = 0; L < N; ++L)
      dc(L) = 0.5 * (hm.inverse.array() * (X.transpose() * dgam[static_cast<std::size_t>(L)] * X).array()).sum() +
              (hm.inverse.array() * (dX[static_cast<std::size_t>(L)].transpose() * gX).array()).sum();

    Eigen::VectorXd r = -gm.inverse * dc;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double hab = hm.inverse(a, b);
        if (hab == 0.0) continue;
        for (int I = 0; I < N; ++I) {
          double v = P.ddx(node, I, a, b);
          for (int c = 0; c < m; ++c) v -= H(c, a, b) * P.dx(node, I, c);
          for (int J = 0; J < N; ++J)
            for (int K = 0; K < N; ++K) v += Gam(I, J, K) * P.dx(node, J, a) * P.dx(node, K, b);
          // F-term: (∇_J X^I_b − γ_HJ γ^{IK} ∇_K X^H_b) 𝔵^J_a
          for (int J = 0; J < N; ++J) {
            double f = nab[static_cast<std::size_t>(J)](I, b);
            for (int Hh = 0; Hh < N; ++Hh) {
              double s = 0.0;
              for (int K = 0; K < N; ++K) s += gm.inverse(I, K) * nab[static_cast<std::size_t>(K)](Hh, b);
              f -= gm.value(Hh, J) * s;
            }
            v -= f * P.dx(node, J, a);
          }
          double d = dtX[static_cast<std::size_t>(a)](I, b);
          for (int c = 0; c < m; ++c) d -= H(c, a, b) * X(I, c);
          v -= d;
          r(I) += hab * v;
        }
      }
    for (int I = 0; I < N; ++I) out[static_cast<std::size_t>(I)] = r(I);
  }, kJetMargin);
}

ConnectionAt connection_from_exprs(const std::vector<ScalarExpr>& entries, int m) {
  if (static_cast<int>(entries.size()) != m * m * m)
    throw ShapeError("connection needs " + std::to_string(m * m * m) + " entries");
  for (const auto& e : entries)
    for (int v : e.variables_used())
      if (v >= m) throw ShapeError("connection entries may only reference t1..t" + std::to_string(m));
  return [entries, m](std::span<const double> t) {
    Tensor3 L(m, m, m);
    std::size_t k = 0;
    for (int s = 0; s < m; ++s)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) L(s, b, c) = entries[k++].eval(t);
    return L;
  };
}

RicciReport verify_h0_ricci(const MetricField& h0, const ConnectionAt& lambda0,
                            const std::vector<std::vector<double>>& points) {
  const int m = h0.dim();
  RicciReport r;
  r.samples = points.size();
  for (const auto& p : points) {
    const std::span<const double> t(p.data(), static_cast<std::size_t>(m));
    const Eigen::MatrixXd hv = h0.value(t);
    const auto dh = h0.first_derivatives(t);
    const Tensor3 L = lambda0(t);
    double worst = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) {
          double v = dh[static_cast<std::size_t>(c)](a, b);
          for (int s = 0; s < m; ++s) v -= hv(a, s) * L(s, b, c) + hv(b, s) * L(s, a, c);
          worst = std::max(worst, std::abs(v));
        }
    if (r.worst_point.empty() || worst > r.max_violation) {
      r.max_violation = worst;
      r.worst_point = p;
    }
  }
  return r;
}

ResidualReport lambda0_display_defect(const MapPartials& x, const ConnectionAt& lambda0) {
  const int m = x.m();
  const int n = x.n();
  return evaluate_residual(x.grid(), m * m * n, [&](std::size_t node, std::span<double> out) {
    const Tensor3 L = lambda0(x.grid().coordinates(node));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int i = 0; i < n; ++i) {
          double v = x.ddx(node, i, a, b);
          for (int c = 0; c < m; ++c) v -= L(c, a, b) * x.dx(node, i, c);
          out[static_cast<std::size_t>((a * m + b) * n + i)] = v;
        }
  });
}

}  // namespace varigeo
