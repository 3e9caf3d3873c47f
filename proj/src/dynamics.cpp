#include "varigeo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace varigeo {

namespace {

std::string point_text(std::span<const double> p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < p.size(); ++k) os << (k ? ", " : "") << p[k];
  os << ')';
  return os.str();
}

struct ClosureParts {
  double x_part = 0.0;
  double t_part = 0.0;
  double full = 0.0;
};

ClosureParts closure_at(const DistTensor& X, std::span<const double> point) {
  const int m = X.m();
  const int n = X.n();
  const Eigen::MatrixXd Xv = X.value(point);
  std::vector<Eigen::MatrixXd> dt, dxv;
  for (int b = 0; b < m; ++b) dt.push_back(X.d_dt(point, b));
  for (int j = 0; j < n; ++j) dxv.push_back(X.d_dx(point, j));
  ClosureParts c;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int i = 0; i < n; ++i) {
        double xs = 0.0;
        for (int j = 0; j < n; ++j)
          xs += dxv[static_cast<std::size_t>(j)](i, a) * Xv(j, b) - dxv[static_cast<std::size_t>(j)](i, b) * Xv(j, a);
        const double ts = dt[static_cast<std::size_t>(b)](i, a) - dt[static_cast<std::size_t>(a)](i, b);
        c.x_part = std::max(c.x_part, std::abs(xs));
        c.t_part = std::max(c.t_part, std::abs(ts));
        c.full = std::max(c.full, std::abs(xs + ts));
      }
  return c;
}

class Stepper {
 public:
  Stepper(const DistTensor& X, const GridSpec& grid, const IntegrationOptions& options)
      : X_(X), grid_(grid), opt_(options), n_(X.n()) {}

  // dx/ds along axis a at parameter t.
  Eigen::VectorXd field(const std::vector<double>& t, const Eigen::VectorXd& x, int axis) const {
    std::vector<double> p(t);
    p.insert(p.end(), x.data(), x.data() + x.size());
    return X_.value(p).col(axis);
  }

  Eigen::VectorXd rk4(std::vector<double> t, const Eigen::VectorXd& x, int axis, double h) const {
    const double t0 = t[static_cast<std::size_t>(axis)];
    const Eigen::VectorXd k1 = field(t, x, axis);
    t[static_cast<std::size_t>(axis)] = t0 + 0.5 * h;
    const Eigen::VectorXd k2 = field(t, x + 0.5 * h * k1, axis);
    const Eigen::VectorXd k3 = field(t, x + 0.5 * h * k2, axis);
    t[static_cast<std::size_t>(axis)] = t0 + h;
    const Eigen::VectorXd k4 = field(t, x + h * k3, axis);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // One grid step from node `from` along `axis`, with the resolution and
  // blow-up guards. Evaluation errors inside the step count as blow-up.
  Eigen::VectorXd step(std::size_t from, const Eigen::VectorXd& x, int axis) const {
    const auto t = grid_.coordinates(from);
    const double h = grid_.spacing(axis);
    const std::size_t to = from + grid_.stride(axis);
    Eigen::VectorXd full, twice;
    try {
      full = rk4(t, x, axis, h);
      auto mid = t;
      mid[static_cast<std::size_t>(axis)] += 0.5 * h;
      twice = rk4(mid, rk4(t, x, axis, 0.5 * h), axis, 0.5 * h);
    } catch (const DomainError& e) {
      fail(to, std::string("field evaluation failed: ") + e.what());
    }
    for (int i = 0; i < n_; ++i) {
      if (!std::isfinite(twice(i)) || std::abs(twice(i)) > opt_.blow_up_limit)
        fail(to, "state exceeds " + std::to_string(opt_.blow_up_limit));
      if (!std::isfinite(full(i)) || std::abs(full(i) - twice(i)) > opt_.resolution_limit * (1.0 + std::abs(twice(i))))
        fail(to, "solution not resolved by the grid step (blow-up)");
    }
    return full;
  }

  [[noreturn]] void fail(std::size_t node, const std::string& why) const {
    const auto t = grid_.coordinates(node);
    throw BlowUpError("integration blew up at node " + std::to_string(node) + " t=" + point_text(t) + ": " + why);
  }

 private:
  const DistTensor& X_;
  const GridSpec& grid_;
  IntegrationOptions opt_;
  int n_;
};

}  // namespace

IntegrabilityReport integrability_check(const DistTensor& X, const std::vector<std::vector<double>>& points) {
  if (X.shape() != TensorShape::Mixed) throw ShapeError("integrability check needs a mixed tensor X(t,x)");
  IntegrabilityReport r;
  r.samples = points.size();
  for (const auto& p : points) {
    const ClosureParts c = closure_at(X, p);
    r.x_part = std::max(r.x_part, c.x_part);
    r.t_part = std::max(r.t_part, c.t_part);
    if (r.worst_point.empty() || c.full > r.max_defect) {
      r.max_defect = c.full;
      r.worst_point = p;
    }
  }
  return r;
}

IntegrationResult integrate_normal_system(const DistTensor& X, std::span<const double> x0, const GridSpec& grid,
                                          const IntegrationOptions& options) {
  if (X.shape() != TensorShape::Mixed) throw ShapeError("integration needs a mixed tensor X(t,x)");
  const int m = X.m();
  const int n = X.n();
  if (grid.dim() != m) throw ShapeError("grid dimension does not match X");
  if (static_cast<int>(x0.size()) != n) throw ShapeError("x0 needs " + std::to_string(n) + " components");

  Stepper stepper(X, grid, options);
  IntegrationResult result;
  result.map = MapGrid(grid, n, Provenance::Integrated);
  std::copy(x0.begin(), x0.end(), result.map.at(0).begin());

  auto load = [&](std::size_t node) {
    return Eigen::Map<const Eigen::VectorXd>(result.map.at(node).data(), n);
  };
  // Axis a sweeps start from nodes whose indices on axes >= a are all zero.
  for (int a = 0; a < m; ++a) {
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const auto idx = grid.multi_index(node);
      bool start = true;
      for (int b = a; b < m; ++b) start = start && idx[static_cast<std::size_t>(b)] == 0;
      if (!start) continue;
      std::size_t cur = node;
      Eigen::VectorXd x = load(cur);
      for (int k = 0; k + 1 < grid.points(a); ++k) {
        x = stepper.step(cur, x, a);
        cur += grid.stride(a);
        std::copy(x.data(), x.data() + n, result.map.at(cur).begin());
      }
    }
  }

  // Reversed axis order on an even subsample of nodes.
  const std::size_t every = std::max<std::size_t>(1, grid.node_count() / std::max<std::size_t>(1, options.consistency_samples));
  for (std::size_t target = 0; target < grid.node_count() && m > 1; target += every) {
    const auto idx = grid.multi_index(target);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
    std::size_t cur = 0;
    for (int a = m - 1; a >= 0; --a)
      for (int k = 0; k < idx[static_cast<std::size_t>(a)]; ++k) {
        x = stepper.step(cur, x, a);
        cur += grid.stride(a);
      }
    result.consistency_defect = std::max(result.consistency_defect, (x - load(target)).cwiseAbs().maxCoeff());
  }

  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto p = base_point(grid.coordinates(node), result.map.at(node));
    result.integrability_defect = std::max(result.integrability_defect, closure_at(X, p).full);
  }
  return result;
}

ResidualReport implicit_system_residual(const MapPartials& x, const DistTensor& Y, const DistTensor& T) {
  if (Y.shape() != TensorShape::Endomorphism) throw ShapeError("Y must be an endomorphism Y(x)");
  if (T.shape() != TensorShape::Sheet) throw ShapeError("T must be a sheet tensor T(t)");
  const int m = x.m();
  const int n = x.n();
  if (Y.n() != n || T.n() != n || T.m() != m) throw ShapeError("Y or T does not match the map dimensions");
  return evaluate_residual(x.grid(), n * m, [&](std::size_t node, std::span<double> out) {
    const auto p = base_point(x.grid().coordinates(node), x.point(node));
    const Eigen::MatrixXd Yv = Y.value(p);
    const Eigen::MatrixXd Tv = T.value(p);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i) {
        double v = -Tv(i, a);
        for (int j = 0; j < n; ++j) v += x.dx(node, j, a) * Yv(i, j);
        out[static_cast<std::size_t>(a * n + i)] = v;
      }
  });
}

ResidualReport homogeneous_system_residual(const MapPartials& x, const DistTensor& Y) {
  return implicit_system_residual(x, Y, DistTensor::zero(TensorShape::Sheet, x.m(), x.n()));
}

Eigen::MatrixXd kernel_rows(const Eigen::MatrixXd& jacobian, const std::string& where) {
  const auto n = jacobian.rows();
  const auto m = jacobian.cols();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (m > n || sv.size() < m || sv(m - 1) <= 1e-10 * std::max(1.0, sv(0)))
    throw RankDeficiencyError("Jacobian has rank below " + std::to_string(m) + (where.empty() ? "" : " at " + where));
  const Eigen::MatrixXd& Q = svd.matrixU();
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - Q * Q.transpose();

  std::vector<Eigen::VectorXd> rows;
  for (double threshold : {1e-3, 1e-12}) {
    rows.clear();
    for (Eigen::Index j = 0; j < n && static_cast<Eigen::Index>(rows.size()) < n - m; ++j) {
      Eigen::VectorXd v = P.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        v = P * v;
        for (const auto& r : rows) v -= r.dot(v) * r;
      }
      const double len = v.norm();
      if (len <= threshold) continue;
      v /= len;
      for (Eigen::Index k = 0; k < n; ++k)
        if (std::abs(v(k)) > 1e-12) {
          if (v(k) < 0) v = -v;
          break;
        }
      rows.push_back(v);
    }
    if (static_cast<Eigen::Index>(rows.size()) == n - m) break;
  }
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < rows.size(); ++r) xi.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return xi;
}

KernelField kernel_field_from_map(const MapPartials& x) {
  KernelField out;
  out.grid = x.grid();
  Eigen::MatrixXd J(x.n(), x.m());
  for (std::size_t node = 0; node < x.grid().node_count(); ++node) {
    for (int i = 0; i < x.n(); ++i)
      for (int a = 0; a < x.m(); ++a) J(i, a) = x.dx(node, i, a);
    out.xi.push_back(kernel_rows(J, "node " + std::to_string(node) + " t=" + point_text(x.grid().coordinates(node))));
  }
  return out;
}

ResidualReport kernel_system_residual(const MapPartials& x, const KernelField& kernel) {
  const int m = x.m();
  const int n = x.n();
  return evaluate_residual(x.grid(), n * m, [&](std::size_t node, std::span<double> out) {
    const Eigen::MatrixXd& xi = kernel.xi[node];
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += x.dx(node, j, a) * xi(i, j);
        out[static_cast<std::size_t>(a * n + i)] = v;
      }
  });
}

}  // namespace varigeo
