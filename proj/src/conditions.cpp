#include "varigeo/conditions.hpp"

#include <cmath>
#include <random>

namespace varigeo {

namespace {

struct Tracker {
  ConditionReport report;

  explicit Tracker(std::string id, std::size_t samples) {
    report.id = std::move(id);
    report.samples = samples;
  }
  void offer(double violation, const std::vector<double>& point) {
    if (report.worst_point.empty() || violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_point = point;
    }
  }
};

struct PointData {
  Eigen::MatrixXd g;
  Eigen::MatrixXd ginv;
  std::vector<Eigen::MatrixXd> dg;
  Tensor3 G;
  Eigen::MatrixXd Y;
  std::vector<Eigen::MatrixXd> dY;
};

PointData point_data(const MetricField& g, const DistTensor& Y, std::span<const double> p) {
  PointData d;
  const auto gm = evaluate_metric(g, p);
  d.g = gm.value;
  d.ginv = gm.inverse;
  d.dg = g.first_derivatives(p);
  d.G = christoffel_from_values(gm.inverse, d.dg);
  d.Y = Y.value(p);
  for (int k = 0; k < g.dim(); ++k) d.dY.push_back(Y.d_dx(p, k));
  return d;
}

Tensor3 nabla_y(const PointData& d) {
  const int n = static_cast<int>(d.Y.rows());
  Tensor3 out(n, n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = d.dY[static_cast<std::size_t>(k)](i, j);
        for (int s = 0; s < n; ++s) v += d.G(i, k, s) * d.Y(s, j) - d.G(s, k, j) * d.Y(i, s);
        out(k, i, j) = v;
      }
  return out;
}

void require_endomorphism(const DistTensor& Y, int n) {
  if (Y.shape() != TensorShape::Endomorphism) throw ShapeError("Y must be an endomorphism Y(x)");
  if (Y.n() != n) throw ShapeError("Y dimension does not match the metric");
}

}  // namespace

ConditionReport check_condition_16(const MetricField& f, const DistTensor& Y,
                                   const std::vector<std::vector<double>>& points) {
  const int n = f.dim();
  require_endomorphism(Y, n);
  Tracker t("16", points.size());
  for (const auto& p : points) {
    const Eigen::MatrixXd fv = f.value(p);
    const auto df = f.first_derivatives(p);
    const Eigen::MatrixXd Yv = Y.value(p);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      const Eigen::MatrixXd dYk = Y.d_dx(p, k);
      // (i, j): Y^s_i ∂_k f_sj − ∂_k Y^s_j f_si
      const Eigen::MatrixXd diff = Yv.transpose() * df[static_cast<std::size_t>(k)] - fv.transpose() * dYk;
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    t.offer(worst, p);
  }
  return t.report;
}

std::pair<ConditionReport, ConditionReport> check_condition_17(const MetricField& f, const MetricField& g,
                                                               const DistTensor& Y,
                                                               const std::vector<std::vector<double>>& points) {
  const int n = g.dim();
  require_endomorphism(Y, n);
  if (f.dim() != n) throw ShapeError("f and g have different dimensions");
  Tracker a("17a", points.size()), b("17b", points.size());
  for (const auto& p : points) {
    const Eigen::MatrixXd gv = g.value(p);
    const Eigen::MatrixXd gy = gv * Y.value(p);
    const Eigen::MatrixXd expected = gy - gv;
    a.offer((f.value(p) - expected).cwiseAbs().maxCoeff(), p);
    b.offer((gy - gy.transpose()).cwiseAbs().maxCoeff(), p);
  }
  return {a.report, b.report};
}

std::pair<ConditionReport, ConditionReport> check_condition_22_23(const MetricField& g, const DistTensor& Y,
                                                                  const std::vector<std::vector<double>>& points) {
  require_endomorphism(Y, g.dim());
  Tracker a("22", points.size()), b("23", points.size());
  for (const auto& p : points) {
    const PointData d = point_data(g, Y, p);
    a.offer(nabla_y(d).max_abs(), p);
    const Eigen::MatrixXd gy = d.g * d.Y;
    b.offer((gy - gy.transpose()).cwiseAbs().maxCoeff(), p);
  }
  return {a.report, b.report};
}

ConditionReport check_condition_24(const MetricField& g, const DistTensor& Y,
                                   const std::vector<std::vector<double>>& points) {
  const int n = g.dim();
  require_endomorphism(Y, n);
  const RiemannCurvature curvature(g);
  Tracker t("24", points.size());
  for (const auto& p : points) {
    const Tensor4 R = curvature.at(p);
    const Eigen::MatrixXd Yv = Y.value(p);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double v = 0.0;
            for (int s = 0; s < n; ++s) v += Yv(i, s) * R(s, j, k, l) - Yv(s, j) * R(i, s, k, l);
            worst = std::max(worst, std::abs(v));
          }
    t.offer(worst, p);
  }
  return t.report;
}

ConditionReport check_condition_36(const MetricField& g, const DistTensor& Y,
                                   const std::vector<std::vector<double>>& points) {
  const int n = g.dim();
  require_endomorphism(Y, n);
  Tracker t("36", points.size());
  for (const auto& p : points) {
    const PointData d = point_data(g, Y, p);
    const Tensor3 nY = nabla_y(d);  // (k, s, j)
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = 0.0;
          for (int s = 0; s < n; ++s) {
            v += d.g(i, s) * (nY(k, s, j) - nY(j, s, k));
            v += d.g(j, s) * (nY(k, s, i) - nY(i, s, k));
            for (int q = 0; q < n; ++q) v -= 2.0 * d.g(s, q) * d.G(q, i, j) * d.Y(s, k);
          }
          worst = std::max(worst, std::abs(v));
        }
    t.offer(worst, p);
  }
  return t.report;
}

Tensor3 covariant_derivative_y(const MetricField& g, const DistTensor& Y, std::span<const double> point) {
  require_endomorphism(Y, g.dim());
  return nabla_y(point_data(g, Y, point));
}

OmegaTables omega_at(OmegaKind kind, const MetricField& g, const DistTensor& Y, std::span<const double> point) {
  const int n = g.dim();
  require_endomorphism(Y, n);
  const PointData d = point_data(g, Y, point);
  OmegaTables out{Tensor3(n, n, n), Tensor3(n, n, n), Tensor3(n, n, n)};
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < n; ++p) {
        double v = 0.0;
        if (kind == OmegaKind::Nonhomogeneous) {
          for (int i = 0; i < n; ++i) {
            v += d.g(i, p) * d.dY[static_cast<std::size_t>(k)](i, j);
            for (int s = 0; s < n; ++s) {
              v += d.g(i, p) * d.G(i, k, s) * d.Y(s, j);
              v -= d.g(s, j) * d.Y(i, k) * d.G(s, i, p);
              v += 0.5 * d.Y(s, j) * d.Y(i, k) * d.dg[static_cast<std::size_t>(p)](i, s);
            }
          }
        } else {
          // Ω_{jk|p} = g_ps(∂_k Y^s_j + Y^q_j G^s_qk)
          for (int s = 0; s < n; ++s) {
            double inner = d.dY[static_cast<std::size_t>(k)](s, j);
            for (int q = 0; q < n; ++q) inner += d.Y(q, j) * d.G(s, q, k);
            v += d.g(p, s) * inner;
          }
        }
        out.omega(j, k, p) = v;
      }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < n; ++p) {
        out.S(j, k, p) = 0.5 * (out.omega(j, k, p) + out.omega(k, j, p));
        out.A(j, k, p) = 0.5 * (out.omega(j, k, p) - out.omega(k, j, p));
      }
  return out;
}

std::vector<OmegaTables> omega_decomposition(OmegaKind kind, const MetricField& g, const DistTensor& Y,
                                             const std::vector<std::vector<double>>& points) {
  std::vector<OmegaTables> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(omega_at(kind, g, Y, p));
  return out;
}

Tensor3 sigma_table(const MetricField& g, const DistTensor& Y, std::span<const double> point) {
  const int n = g.dim();
  require_endomorphism(Y, n);
  const PointData d = point_data(g, Y, point);
  auto dg = [&](int k, int i, int j) { return d.dg[static_cast<std::size_t>(k)](i, j); };
  auto dY = [&](int k, int s, int i) { return d.dY[static_cast<std::size_t>(k)](s, i); };
  Tensor3 out(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int s = 0; s < n; ++s) {
          v += d.Y(s, j) * (dg(k, i, s) - dg(i, k, s));
          v += d.Y(s, i) * (dg(k, j, s) - dg(j, k, s));
          v -= d.g(s, k) * (dY(j, s, i) + dY(i, s, j));
          v -= d.Y(s, k) * (dg(i, j, s) + dg(j, i, s));
          v += d.g(s, j) * (dY(k, s, i) - dY(i, s, k));
          v += d.g(s, i) * (dY(k, s, j) - dY(j, s, k));
        }
        out(i, j, k) = 0.25 * v;
      }
  return out;
}

Tensor3 sigma_plus_s_target(const MetricField& f, const DistTensor& Y, std::span<const double> point) {
  const int n = f.dim();
  require_endomorphism(Y, n);
  const Eigen::MatrixXd fv = f.value(point);
  const auto df = f.first_derivatives(point);
  const Eigen::MatrixXd Yv = Y.value(point);
  Tensor3 out(n, n, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXd dYk = Y.d_dx(point, k);
    const Eigen::MatrixXd v = 0.5 * (Yv.transpose() * df[static_cast<std::size_t>(k)] - fv.transpose() * dYk);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j, k) = v(i, j);
  }
  return out;
}

ResidualReport antisymmetric_contraction(OmegaKind kind, const MapPartials& x, const MetricField& h,
                                         const MetricField& g, const DistTensor& Y) {
  const int m = x.m();
  const int n = x.n();
  return evaluate_residual(x.grid(), n, [&](std::size_t node, std::span<double> out) {
    const auto t = x.grid().coordinates(node);
    const auto p = base_point(t, x.point(node));
    const Eigen::MatrixXd hinv = evaluate_metric(h, t).inverse;
    const Tensor3 A = omega_at(kind, g, Y, p).A;
    for (int q = 0; q < n; ++q) {
      double v = 0.0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) v += hinv(a, b) * x.dx(node, j, a) * x.dx(node, k, b) * A(j, k, q);
      out[static_cast<std::size_t>(q)] = v;
    }
  });
}

std::vector<std::vector<double>> sample_box(const std::vector<std::pair<double, double>>& box, std::size_t count,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(count, std::vector<double>(box.size()));
  for (auto& p : out)
    for (std::size_t k = 0; k < box.size(); ++k) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p[k] = box[k].first + u * (box[k].second - box[k].first);
    }
  return out;
}

}  // namespace varigeo
