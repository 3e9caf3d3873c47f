#include "varigeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace varigeo {

double Tensor3::max_abs() const {
  double r = 0.0;
  for (double v : data_) r = std::max(r, std::abs(v));
  return r;
}

double Tensor4::max_abs() const {
  double r = 0.0;
  for (double v : data_) r = std::max(r, std::abs(v));
  return r;
}

namespace {

std::string describe_point(std::span<const double> point) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < point.size(); ++k) os << (k ? ", " : "") << point[k];
  os << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricField

MetricField::MetricField(const std::vector<std::vector<ScalarExpr>>& entries, int block_offset, MetricKind kind)
    : dim_(static_cast<int>(entries.size())), offset_(block_offset), kind_(kind) {
  if (dim_ == 0) throw ShapeError("metric must have positive dimension");
  for (int i = 0; i < dim_; ++i) {
    const auto& row = entries[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != dim_) throw ShapeError("metric rows must have length " + std::to_string(dim_));
    for (int j = i; j < dim_; ++j) upper_.push_back(row[static_cast<std::size_t>(j)]);
  }
  build_derivatives();
}

MetricField MetricField::identity(int dim, int block_offset, MetricKind kind) {
  std::vector<ScalarExpr> diag(static_cast<std::size_t>(dim), ScalarExpr::constant(1.0));
  return diagonal(diag, block_offset, kind);
}

MetricField MetricField::zero(int dim, int block_offset) {
  std::vector<ScalarExpr> diag(static_cast<std::size_t>(dim), ScalarExpr::constant(0.0));
  return diagonal(diag, block_offset, MetricKind::Symmetric);
}

MetricField MetricField::diagonal(const std::vector<ScalarExpr>& diagonal, int block_offset, MetricKind kind) {
  const auto d = diagonal.size();
  std::vector<std::vector<ScalarExpr>> entries(d, std::vector<ScalarExpr>(d, ScalarExpr::constant(0.0)));
  for (std::size_t i = 0; i < d; ++i) entries[i][i] = diagonal[i];
  return MetricField(entries, block_offset, kind);
}

std::size_t MetricField::tri(int i, int j) const {
  if (i > j) std::swap(i, j);
  // Row i of the packed upper triangle starts after rows 0..i-1.
  return static_cast<std::size_t>(i * dim_ - i * (i - 1) / 2 + (j - i));
}

void MetricField::build_derivatives() {
  derivatives_.clear();
  derivatives_.reserve(static_cast<std::size_t>(dim_) * upper_.size());
  for (int k = 0; k < dim_; ++k)
    for (const auto& e : upper_) derivatives_.push_back(e.diff(offset_ + k));
}

const ScalarExpr& MetricField::entry(int i, int j) const { return upper_[tri(i, j)]; }

const ScalarExpr& MetricField::derivative(int k, int i, int j) const {
  return derivatives_[static_cast<std::size_t>(k) * upper_.size() + tri(i, j)];
}

Eigen::MatrixXd MetricField::value(std::span<const double> point) const {
  Eigen::MatrixXd g(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) {
      const double v = entry(i, j).eval(point);
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

std::vector<Eigen::MatrixXd> MetricField::first_derivatives(std::span<const double> point) const {
  std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(dim_), Eigen::MatrixXd::Zero(dim_, dim_));
  for (int k = 0; k < dim_; ++k)
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        const auto& e = derivative(k, i, j);
        if (e.is_zero()) continue;
        const double v = e.eval(point);
        dg[static_cast<std::size_t>(k)](i, j) = v;
        dg[static_cast<std::size_t>(k)](j, i) = v;
      }
  return dg;
}

MetricField MetricField::operator+(const MetricField& other) const {
  if (dim_ != other.dim_ || offset_ != other.offset_) throw ShapeError("cannot add metrics on different blocks");
  std::vector<std::vector<ScalarExpr>> entries(static_cast<std::size_t>(dim_),
                                               std::vector<ScalarExpr>(static_cast<std::size_t>(dim_)));
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j)
      entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = entry(i, j) + other.entry(i, j);
  const MetricKind kind =
      (kind_ == MetricKind::Riemannian || other.kind_ == MetricKind::Riemannian) ? MetricKind::Riemannian
                                                                                 : MetricKind::Symmetric;
  return MetricField(entries, offset_, kind);
}

MetricField MetricField::scaled(double factor) const {
  std::vector<std::vector<ScalarExpr>> entries(static_cast<std::size_t>(dim_),
                                               std::vector<ScalarExpr>(static_cast<std::size_t>(dim_)));
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j)
      entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = ScalarExpr::constant(factor) * entry(i, j);
  return MetricField(entries, offset_, kind_);
}

MetricField MetricField::with_kind(MetricKind kind) const {
  MetricField copy = *this;
  copy.kind_ = kind;
  return copy;
}

MetricAtPoint invert_metric(const Eigen::MatrixXd& value, const std::string& where) {
  MetricAtPoint out;
  out.value = value;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(value);
  out.determinant = lu.determinant();
  const double scale = value.cwiseAbs().maxCoeff();
  // rcond() can report 1 for an exactly zero pivot, so the pivots of U are
  // checked as well.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const bool tiny_pivot = !(pivots.minCoeff() > 1e-13 * pivots.maxCoeff());
  if (!(scale > 0.0) || !std::isfinite(out.determinant) || tiny_pivot || !(lu.rcond() >= 1e-13))
    throw SingularMetricError("metric is singular" + (where.empty() ? std::string() : " at " + where));
  out.inverse = lu.inverse();
  return out;
}

MetricAtPoint evaluate_metric(const MetricField& g, std::span<const double> point) {
  const Eigen::MatrixXd value = g.value(point);
  try {
    return invert_metric(value);
  } catch (const SingularMetricError&) {
    throw SingularMetricError("metric is singular at " + describe_point(point));
  }
}

Tensor3 christoffel_from_values(const Eigen::MatrixXd& inverse, const std::vector<Eigen::MatrixXd>& dg) {
  const int d = static_cast<int>(inverse.rows());
  // lowered(l, i, j) = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
  Tensor3 lowered(d, d, d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const double v = 0.5 * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                                dg[static_cast<std::size_t>(l)](i, j));
        lowered(l, i, j) = v;
        lowered(l, j, i) = v;
      }
  Tensor3 gamma(d, d, d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += inverse(k, l) * lowered(l, i, j);
        gamma(k, i, j) = s;
        gamma(k, j, i) = s;
      }
  return gamma;
}

Tensor3 first_kind_from_values(const std::vector<Eigen::MatrixXd>& df) {
  const int d = static_cast<int>(df.size());
  Tensor3 f(d, d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = j; k < d; ++k) {
        const double v = 0.5 * (df[static_cast<std::size_t>(k)](i, j) + df[static_cast<std::size_t>(j)](i, k) -
                                df[static_cast<std::size_t>(i)](j, k));
        f(i, j, k) = v;
        f(i, k, j) = v;
      }
  return f;
}

Tensor3 ChristoffelField::at(std::span<const double> point) const {
  const auto dg = metric_.first_derivatives(point);
  if (kind_ == ChristoffelKind::FirstKindOfF) return first_kind_from_values(dg);
  const auto g = evaluate_metric(metric_, point);
  return christoffel_from_values(g.inverse, dg);
}

ChristoffelField christoffel_second(const MetricField& g) { return {g, ChristoffelKind::SecondKind}; }
ChristoffelField christoffel_first_f(const MetricField& f) { return {f, ChristoffelKind::FirstKindOfF}; }

// ---------------------------------------------------------------------------
// Curvature

RiemannCurvature::RiemannCurvature(MetricField g) : g_(std::move(g)) {
  const int d = g_.dim();
  second_.reserve(static_cast<std::size_t>(d * d * d * d));
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) second_.push_back(g_.derivative(l, i, j).diff(g_.offset() + k));
}

Tensor4 RiemannCurvature::at(std::span<const double> point) const {
  const int d = g_.dim();
  const auto ud = static_cast<std::size_t>(d);
  const auto metric = evaluate_metric(g_, point);
  const auto dg = g_.first_derivatives(point);
  const Eigen::MatrixXd& ginv = metric.inverse;

  // d2g[k][l](i,j) = ∂_k ∂_l g_ij
  std::vector<std::vector<Eigen::MatrixXd>> d2g(ud, std::vector<Eigen::MatrixXd>(ud, Eigen::MatrixXd::Zero(d, d)));
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const auto& e = second_[((static_cast<std::size_t>(k) * ud + static_cast<std::size_t>(l)) * ud +
                                   static_cast<std::size_t>(i)) * ud + static_cast<std::size_t>(j)];
          if (!e.is_zero()) d2g[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)](i, j) = e.eval(point);
        }

  const Tensor3 gamma = christoffel_from_values(ginv, dg);

  // c(m, j, l) = ∂_j g_lm + ∂_l g_jm − ∂_m g_jl, and its derivatives.
  auto c = [&](int m, int j, int l) {
    return dg[static_cast<std::size_t>(j)](l, m) + dg[static_cast<std::size_t>(l)](j, m) -
           dg[static_cast<std::size_t>(m)](j, l);
  };
  auto dc = [&](int k, int m, int j, int l) {
    const auto uk = static_cast<std::size_t>(k);
    return d2g[uk][static_cast<std::size_t>(j)](l, m) + d2g[uk][static_cast<std::size_t>(l)](j, m) -
           d2g[uk][static_cast<std::size_t>(m)](j, l);
  };
  // ∂_k g^{-1} = −g^{-1} ∂_k g g^{-1}
  std::vector<Eigen::MatrixXd> dginv(ud);
  for (int k = 0; k < d; ++k) dginv[static_cast<std::size_t>(k)] = -ginv * dg[static_cast<std::size_t>(k)] * ginv;

  // dgamma(k, i, j, l) = ∂_k Γ^i_{jl}
  Tensor4 dgamma(d, d, d, d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) {
          double s = 0.0;
          for (int m = 0; m < d; ++m)
            s += dginv[static_cast<std::size_t>(k)](i, m) * c(m, j, l) + ginv(i, m) * dc(k, m, j, l);
          dgamma(k, i, j, l) = 0.5 * s;
        }

  Tensor4 r(d, d, d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double s = dgamma(k, i, j, l) - dgamma(l, i, j, k);
          for (int q = 0; q < d; ++q) s += gamma(i, k, q) * gamma(q, j, l) - gamma(i, l, q) * gamma(q, j, k);
          r(i, j, k, l) = s;
        }
  return r;
}

RiemannCurvature riemann_curvature(const MetricField& g) { return RiemannCurvature(g); }

std::vector<Tensor3> tabulated_christoffel_second(const GridSpec& grid, const std::vector<Eigen::MatrixXd>& metric) {
  if (metric.size() != grid.node_count()) throw ShapeError("tabulated metric needs one matrix per node");
  const int d = grid.dim();
  NodalField field(grid, d * d);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    if (metric[node].rows() != d || metric[node].cols() != d)
      throw ShapeError("tabulated metric must be " + std::to_string(d) + "x" + std::to_string(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) field.at(node)[static_cast<std::size_t>(i * d + j)] = metric[node](i, j);
  }
  std::vector<NodalField> partial;
  for (int a = 0; a < d; ++a) partial.push_back(differentiate(field, a));

  std::vector<Tensor3> out;
  out.reserve(grid.node_count());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(d), Eigen::MatrixXd(d, d));
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          dg[static_cast<std::size_t>(k)](i, j) = partial[static_cast<std::size_t>(k)].at(node)[static_cast<std::size_t>(i * d + j)];
    const auto inv = invert_metric(metric[node], "grid node " + std::to_string(node));
    out.push_back(christoffel_from_values(inv.inverse, dg));
  }
  return out;
}

DefinitenessReport check_positive_definite(const MetricField& g, const std::vector<std::vector<double>>& sample) {
  DefinitenessReport report;
  report.samples = sample.size();
  for (const auto& p : sample) {
    bool ok = false;
    try {
      const Eigen::MatrixXd value = g.value(p);
      Eigen::LLT<Eigen::MatrixXd> llt(value);
      ok = llt.info() == Eigen::Success;
      if (ok) {
        const double scale = std::max(1.0, value.cwiseAbs().maxCoeff());
        ok = llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-12 * std::sqrt(scale);
      }
    } catch (const DomainError&) {
      ok = false;
    }
    if (!ok) {
      report.passed = false;
      report.failures.push_back(p);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// DistTensor

std::string to_string(TensorShape shape) {
  switch (shape) {
    case TensorShape::Mixed: return "mixed";
    case TensorShape::Sheet: return "sheet";
    case TensorShape::Endomorphism: return "endomorphism";
  }
  return "unknown";
}

DistTensor::DistTensor(TensorShape shape, int m, int n, const std::vector<std::vector<ScalarExpr>>& entries)
    : shape_(shape), m_(m), n_(n) {
  if (static_cast<int>(entries.size()) != rows())
    throw ShapeError(to_string(shape) + " tensor needs " + std::to_string(rows()) + " rows");
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != cols())
      throw ShapeError(to_string(shape) + " tensor needs " + std::to_string(cols()) + " columns");
    for (const auto& e : row) {
      for (int v : e.variables_used()) {
        const bool is_t = v < m_;
        const bool is_x = v >= m_ && v < m_ + n_;
        const bool allowed = (shape_ == TensorShape::Mixed && (is_t || is_x)) ||
                             (shape_ == TensorShape::Sheet && is_t) ||
                             (shape_ == TensorShape::Endomorphism && is_x);
        if (!allowed) {
          const auto& vars = e.variable_set();
          const std::string name = vars && v < vars->size() ? vars->name(v) : "v" + std::to_string(v);
          throw ShapeError(to_string(shape) + " tensor entry '" + e.to_string() + "' may not reference " + name);
        }
      }
      entries_.push_back(e);
    }
  }
  for (int v = 0; v < m_ + n_; ++v)
    for (const auto& e : entries_) derivatives_.push_back(e.diff(v));
}

DistTensor DistTensor::zero(TensorShape shape, int m, int n) {
  const int cols = shape == TensorShape::Endomorphism ? n : m;
  std::vector<std::vector<ScalarExpr>> entries(static_cast<std::size_t>(n),
                                               std::vector<ScalarExpr>(static_cast<std::size_t>(cols)));
  return DistTensor(shape, m, n, entries);
}

DistTensor DistTensor::identity(int m, int n) {
  std::vector<std::vector<ScalarExpr>> entries(static_cast<std::size_t>(n),
                                               std::vector<ScalarExpr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = ScalarExpr::constant(1.0);
  return DistTensor(TensorShape::Endomorphism, m, n, entries);
}

const ScalarExpr& DistTensor::entry(int row, int col) const {
  return entries_[static_cast<std::size_t>(row * cols() + col)];
}

Eigen::MatrixXd DistTensor::value(std::span<const double> point) const {
  Eigen::MatrixXd out(rows(), cols());
  for (int r = 0; r < rows(); ++r)
    for (int c = 0; c < cols(); ++c) out(r, c) = entry(r, c).eval(point);
  return out;
}

Eigen::MatrixXd DistTensor::d_dt(std::span<const double> point, int beta) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), cols());
  const std::size_t base = static_cast<std::size_t>(beta) * entries_.size();
  for (int r = 0; r < rows(); ++r)
    for (int c = 0; c < cols(); ++c) {
      const auto& e = derivatives_[base + static_cast<std::size_t>(r * cols() + c)];
      if (!e.is_zero()) out(r, c) = e.eval(point);
    }
  return out;
}

Eigen::MatrixXd DistTensor::d_dx(std::span<const double> point, int j) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), cols());
  const std::size_t base = static_cast<std::size_t>(m_ + j) * entries_.size();
  for (int r = 0; r < rows(); ++r)
    for (int c = 0; c < cols(); ++c) {
      const auto& e = derivatives_[base + static_cast<std::size_t>(r * cols() + c)];
      if (!e.is_zero()) out(r, c) = e.eval(point);
    }
  return out;
}

DistTensor DistTensor::reshaped(TensorShape shape) const {
  std::vector<std::vector<ScalarExpr>> entries(static_cast<std::size_t>(rows()));
  for (int r = 0; r < rows(); ++r)
    for (int c = 0; c < cols(); ++c) entries[static_cast<std::size_t>(r)].push_back(entry(r, c));
  return DistTensor(shape, m_, n_, entries);
}

std::vector<double> base_point(std::span<const double> t, std::span<const double> x) {
  std::vector<double> p(t.begin(), t.end());
  p.insert(p.end(), x.begin(), x.end());
  return p;
}

}  // namespace varigeo
