#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "varigeo/conditions.hpp"
#include "varigeo/dynamics.hpp"

using namespace varigeo;
using testkit::metric;
using testkit::tensor;

namespace {

std::vector<std::vector<double>> points2() { return sample_box({{0, 1}, {0, 1}, {0.25, 1.25}, {0.25, 1.25}}, 64, 0); }

}  // namespace

TEST_CASE("condition 16") {
  auto V = testkit::base_vars(2, 2);
  auto pts = points2();
  auto Yc = tensor(TensorShape::Endomorphism, 2, 2, {{"2", "1"}, {"1", "3"}}, V);
  auto fc = metric({{"1", "1"}, {"", "2"}}, 2, V, MetricKind::Symmetric);
  CHECK(check_condition_16(fc, Yc, pts).max_violation == 0.0);
  auto f = metric({{"3*x1", "0"}, {"", "1"}}, 2, V, MetricKind::Symmetric);
  auto r = check_condition_16(f, DistTensor::identity(2, 2), pts);
  CHECK(r.max_violation == doctest::Approx(3.0));
  CHECK(r.id == "16");
  CHECK(r.samples == pts.size());

  auto V1 = testkit::base_vars(1, 1);
  auto pts1 = sample_box({{0, 1}, {0.25, 1.25}}, 16, 0);
  CHECK(check_condition_16(metric({{"x1"}}, 1, V1, MetricKind::Symmetric),
                           tensor(TensorShape::Endomorphism, 1, 1, {{"x1"}}, V1), pts1)
            .max_violation == 0.0);
}

TEST_CASE("condition 17") {
  auto V = testkit::base_vars(2, 2);
  auto pts = points2();
  auto g = MetricField::identity(2, 2);
  auto f = metric({{"2", "0"}, {"", "x1"}}, 2, V, MetricKind::Symmetric);
  auto identity = check_condition_17(f, g, DistTensor::identity(2, 2), pts);
  CHECK(identity.first.max_violation == doctest::Approx(2.0));
  CHECK(identity.second.max_violation == 0.0);

  auto Y = tensor(TensorShape::Endomorphism, 2, 2, {{"2", "0"}, {"0", "3"}}, V);
  auto ok = check_condition_17(metric({{"1", "0"}, {"", "2"}}, 2, V, MetricKind::Symmetric), g, Y, pts);
  CHECK(ok.first.max_violation == 0.0);
  CHECK(ok.second.max_violation == 0.0);
  CHECK(ok.first.id == "17a");
  CHECK(ok.second.id == "17b");
}

TEST_CASE("conditions 22 and 23") {
  auto V = testkit::base_vars(2, 2);
  auto pts = points2();
  auto flat = MetricField::identity(2, 2);
  CHECK(check_condition_22_23(flat, tensor(TensorShape::Endomorphism, 2, 2, {{"2", "1"}, {"1", "3"}}, V), pts)
            .first.max_violation == 0.0);
  CHECK(check_condition_22_23(flat, tensor(TensorShape::Endomorphism, 2, 2, {{"2*x2", "0"}, {"0", "0"}}, V), pts)
            .first.max_violation == doctest::Approx(2.0));
  auto anti = check_condition_22_23(flat, tensor(TensorShape::Endomorphism, 2, 2, {{"0", "1.5"}, {"-1.5", "0"}}, V), pts);
  CHECK(anti.first.max_violation == 0.0);
  CHECK(anti.second.max_violation == doctest::Approx(3.0));

  // Parallel projector on a product metric.
  auto g = metric({{"1+x1^2", "0"}, {"", "2+sin(x2)"}}, 2, V);
  auto P = tensor(TensorShape::Endomorphism, 2, 2, {{"1", "0"}, {"0", "0"}}, V);
  auto product = check_condition_22_23(g, P, pts);
  CHECK(product.first.max_violation <= 1e-12);
  CHECK(product.second.max_violation <= 1e-12);
}

TEST_CASE("condition 24") {
  auto V = testkit::base_vars(2, 2);
  auto pts = points2();
  auto Y = tensor(TensorShape::Endomorphism, 2, 2, {{"x1", "x2"}, {"1", "x1*x2"}}, V);
  CHECK(check_condition_24(MetricField::identity(2, 2), Y, pts).max_violation <= 1e-12);
  auto sphere = metric({{"1", "0"}, {"", "sin(x1)^2"}}, 2, V);
  CHECK(check_condition_24(sphere, DistTensor::identity(2, 2), pts).max_violation <= 1e-8);
  CHECK(check_condition_24(sphere, tensor(TensorShape::Endomorphism, 2, 2, {{"2.5", "0"}, {"0", "2.5"}}, V), pts)
            .max_violation <= 1e-8);
  CHECK(check_condition_24(sphere, tensor(TensorShape::Endomorphism, 2, 2, {{"1", "0"}, {"0", "0"}}, V), pts)
            .max_violation > 0.1);
}

TEST_CASE("condition 36") {
  auto V = testkit::base_vars(2, 2);
  auto pts = points2();
  auto flat = MetricField::identity(2, 2);
  CHECK(check_condition_36(flat, tensor(TensorShape::Endomorphism, 2, 2, {{"2", "1"}, {"1", "3"}}, V), pts)
            .max_violation == 0.0);
  CHECK(check_condition_36(flat, tensor(TensorShape::Endomorphism, 2, 2, {{"x2", "0"}, {"0", "0"}}, V), pts)
            .max_violation == doctest::Approx(2.0));
  auto g = metric({{"1", "0"}, {"", "2+sin(x2)"}}, 2, V);
  CHECK(check_condition_36(g, DistTensor::zero(TensorShape::Endomorphism, 2, 2), pts).max_violation == 0.0);
  CHECK(check_condition_36(g, tensor(TensorShape::Endomorphism, 2, 2, {{"1", "0"}, {"0", "0"}}, V), pts)
            .max_violation <= 1e-12);
}

TEST_CASE("property: the omega split") {
  auto V = testkit::base_vars(2, 2);
  auto pts = points2();
  auto flat = MetricField::identity(2, 2);
  auto Yc = tensor(TensorShape::Endomorphism, 2, 2, {{"2", "1"}, {"1", "3"}}, V);
  for (auto kind : {OmegaKind::Nonhomogeneous, OmegaKind::H0})
    for (const auto& o : omega_decomposition(kind, flat, Yc, pts)) CHECK(o.omega.max_abs() == 0.0);

  auto g = metric(testkit::random_metric_rows(2, 21), 2, V);
  auto Y = tensor(TensorShape::Endomorphism, 2, 2, {{"x1", "x2^2"}, {"sin(x1)", "1+x1*x2"}}, V);
  for (auto kind : {OmegaKind::Nonhomogeneous, OmegaKind::H0}) {
    for (const auto& o : omega_decomposition(kind, g, Y, pts)) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) {
            CHECK(std::abs(o.S(a, b, c) - o.S(b, a, c)) <= 1e-12);
            CHECK(std::abs(o.A(a, b, c) + o.A(b, a, c)) <= 1e-12);
            CHECK(std::abs(o.S(a, b, c) + o.A(a, b, c) - o.omega(a, b, c)) <= 1e-12);
          }
    }
  }
}

TEST_CASE("property: sigma plus S under condition 17") {
  auto V = testkit::base_vars(2, 2);
  auto g = metric({{"2+sin(x1)", "0.2*x1*x2"}, {"", "1+x2^2"}}, 2, V);
  auto I = DistTensor::identity(2, 2);
  auto zero = MetricField::zero(2, 2);
  for (const auto& p : points2()) {
    auto sigma = sigma_table(g, I, p);
    auto S = omega_at(OmegaKind::Nonhomogeneous, g, I, p).S;
    auto target = sigma_plus_s_target(zero, I, p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(std::abs(sigma(i, j, k) + S(i, j, k) - target(i, j, k)) <= 1e-9);
  }
}

TEST_CASE("property: antisymmetric contraction vanishes along homogeneous solutions") {
  auto V = testkit::base_vars(2, 2);
  auto h = metric({{"1+0.1*t1^2", "0.1*t1*t2"}, {"", "1.5+0.2*sin(t2)"}}, 0, V);
  auto g = metric({{"1+x1^2", "0"}, {"", "2+sin(x2)"}}, 2, V);
  auto Y = tensor(TensorShape::Endomorphism, 2, 2, {{"1", "0"}, {"0", "0"}}, V);
  // Columns of X lie in the kernel of Y.
  auto X = tensor(TensorShape::Mixed, 2, 2, {{"0", "0"}, {"0.5*x2", "0.5*x2"}}, V);
  std::vector<double> x0{0.7, 0.6};
  auto grid = testkit::square_grid(2, 0.0, 1.0, 33);
  auto x = grid_partials(integrate_normal_system(X, x0, grid).map);
  const double h2 = grid.max_spacing() * grid.max_spacing();
  CHECK(homogeneous_system_residual(x, Y).max_norm <= 5.0 * h2);
  CHECK(antisymmetric_contraction(OmegaKind::Nonhomogeneous, x, h, g, Y).max_norm <= 5.0 * h2);
  CHECK(antisymmetric_contraction(OmegaKind::H0, x, h, g, Y).max_norm <= 5.0 * h2);
}

TEST_CASE("sample boxes are reproducible") {
  auto a = sample_box({{0, 1}, {-2, 2}}, 8, 42);
  auto b = sample_box({{0, 1}, {-2, 2}}, 8, 42);
  CHECK(a == b);
  CHECK(a != sample_box({{0, 1}, {-2, 2}}, 8, 43));
  for (const auto& p : a) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 1.0);
    CHECK(p[1] >= -2.0);
    CHECK(p[1] < 2.0);
  }
}
