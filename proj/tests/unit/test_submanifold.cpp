#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "varigeo/conditions.hpp"
#include "varigeo/errors.hpp"
#include "varigeo/submanifold.hpp"

using namespace varigeo;
using testkit::exprs;
using testkit::metric;
using testkit::tensor;

namespace {

const std::vector<std::string> kSphere = {"sin(t1)*cos(t2)", "sin(t1)*sin(t2)", "cos(t1)"};

GridSpec sphere_grid(int points) { return GridSpec({{0.4, M_PI - 0.4}, {0.0, 1.5}}, {points, points}); }

MapPartials sphere_exact(int points) { return analytic_partials(exprs(kSphere, testkit::base_vars(2, 3)), sphere_grid(points)); }

MapPartials sphere_sampled(int points) {
  return grid_partials(sample_map(exprs(kSphere, testkit::base_vars(2, 3)), sphere_grid(points)));
}

double eta_error(const Eigen::MatrixXd& eta, double theta) {
  Eigen::Matrix2d expected;
  expected << 1.0, 0.0, 0.0, std::sin(theta) * std::sin(theta);
  return (eta - expected).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("induced metric") {
  auto V = testkit::base_vars(2, 3);
  auto g = MetricField::identity(3, 2);
  auto plane = analytic_partials(exprs({"t1", "t2", "0"}, V), testkit::square_grid(2, 0, 1, 5));
  for (const auto& eta : induced_metric(plane, g)) CHECK((eta - Eigen::Matrix2d::Identity()).norm() == 0.0);

  auto x = sphere_exact(17);
  auto eta = induced_metric(x, g);
  for (std::size_t k = 0; k < eta.size(); ++k) CHECK(eta_error(eta[k], x.grid().coordinates(k)[0]) <= 1e-10);
  auto symbolic = induced_metric_expr(exprs(kSphere, V), g);
  CHECK(symbolic.offset() == 0);
  CHECK(eta_error(symbolic.value(std::vector<double>{0.9, 0.3}), 0.9) <= 1e-15);

  auto V1 = testkit::base_vars(1, 1);
  auto line = analytic_partials(exprs({"2*t1"}, V1), GridSpec({{0, 1}}, {5}));
  CHECK(induced_metric(line, MetricField::identity(1, 1))[0](0, 0) == 4.0);

  auto fold = analytic_partials(exprs({"t1", "t1", "0"}, V), testkit::square_grid(2, 0, 1, 5));
  CHECK_THROWS_AS(induced_metric(fold, g), RankDeficiencyError);
}

TEST_CASE("normal frames") {
  auto V = testkit::base_vars(2, 3);
  auto g = MetricField::identity(3, 2);
  auto plane = analytic_partials(exprs({"t1", "t2", "0"}, V), testkit::square_grid(2, 0, 1, 5));
  for (const auto& N : normal_frame(plane, g).normals) CHECK((N - Eigen::Vector3d(0, 0, 1)).norm() <= 1e-15);

  auto V1 = testkit::base_vars(1, 2);
  auto circle = analytic_partials(exprs({"cos(t1)", "sin(t1)"}, V1), GridSpec({{0.1, 3.0}}, {9}));
  auto cf = normal_frame(circle, MetricField::identity(2, 1));
  for (std::size_t k = 0; k < cf.normals.size(); ++k) {
    const double t = circle.grid().coordinates(k)[0];
    const Eigen::Vector2d radial(std::cos(t), std::sin(t));
    const auto& N = cf.normals[k];
    CHECK(std::abs(std::abs(N.col(0).dot(radial)) - 1.0) <= 1e-12);
    const int first = std::abs(N(0, 0)) > 1e-14 ? 0 : 1;
    CHECK(N(first, 0) > 0.0);
  }

  GridSpec single({{M_PI / 3 - 0.1, M_PI / 3 + 0.1}, {-0.1, 0.1}}, {5, 5});
  auto at = analytic_partials(exprs(kSphere, V), single);
  auto sf = normal_frame(at, g, FrameOrientation::AlongPosition);
  const std::size_t centre = 12;
  Eigen::Vector3d position(at.x(centre, 0), at.x(centre, 1), at.x(centre, 2));
  CHECK((sf.normals[centre].col(0) - position).norm() <= 1e-12);
}

TEST_CASE("property: frame invariants on a curved target") {
  auto V = testkit::base_vars(2, 3);
  auto g = metric(testkit::random_metric_rows(3, 5), 2, V);
  auto x = sphere_sampled(17);
  for (auto orientation : {FrameOrientation::FirstComponentPositive, FrameOrientation::AlongPosition}) {
    auto frame = normal_frame(x, g, orientation);
    CHECK(frame_defect(frame, x, g) <= 1e-10);
  }
  auto V4 = testkit::base_vars(2, 4);
  auto g4 = metric(testkit::random_metric_rows(4, 6), 2, V4);
  auto surface = grid_partials(sample_map(
      exprs({"t1", "t2", "sin(t1)*t2", "cos(t1+t2)"}, V4), testkit::square_grid(2, 0, 1, 9)));
  auto frame4 = normal_frame(surface, g4);
  CHECK(frame4.normals[0].cols() == 2);
  CHECK(frame_defect(frame4, surface, g4) <= 1e-10);
}

TEST_CASE("Tzitzeica connection of tangent fields") {
  auto V = testkit::base_vars(2, 3);
  auto g = MetricField::identity(3, 2);
  auto pts = sample_box({{0.5, 2.5}, {0, 1.5}, {-1, 1}, {-1, 1}, {-1, 1}}, 16, 3);
  auto constant = tensor(TensorShape::Mixed, 2, 3, {{"1", "0"}, {"0", "1"}, {"1", "1"}}, V);
  for (const auto& L : tzitzeica_connection(constant, g, pts)) CHECK(L.max_abs() <= 1e-15);

  auto tangent = tensor(TensorShape::Mixed, 2, 3,
                        {{"cos(t1)*cos(t2)", "-sin(t1)*sin(t2)"}, {"cos(t1)*sin(t2)", "sin(t1)*cos(t2)"}, {"-sin(t1)", "0"}},
                        V);
  std::vector<std::vector<double>> on_sphere;
  for (auto p : pts) {
    p[2] = std::sin(p[0]) * std::cos(p[1]);
    p[3] = std::sin(p[0]) * std::sin(p[1]);
    p[4] = std::cos(p[0]);
    on_sphere.push_back(p);
  }
  auto eta = christoffel_second(metric({{"1", "0"}, {"", "sin(t1)^2"}}, 0, V));
  auto lambda = tzitzeica_connection(tangent, g, on_sphere);
  for (std::size_t k = 0; k < on_sphere.size(); ++k) {
    auto expected = eta.at(on_sphere[k]);
    for (std::size_t e = 0; e < expected.data().size(); ++e) CHECK(std::abs(lambda[k].data()[e] - expected.data()[e]) <= 1e-6);
    CHECK(lambda[k](0, 1, 1) == doctest::Approx(-std::sin(on_sphere[k][0]) * std::cos(on_sphere[k][0])));
  }

  auto forms = fundamental_forms_field(tangent, g, on_sphere, FrameOrientation::AlongPosition);
  for (std::size_t k = 0; k < on_sphere.size(); ++k) {
    const double s = std::sin(on_sphere[k][0]);
    CHECK(forms.forms[k](0, 0, 0) == doctest::Approx(-1.0));
    CHECK(forms.forms[k](0, 1, 1) == doctest::Approx(-s * s));
    CHECK(std::abs(forms.forms[k](0, 0, 1)) <= 1e-12);
  }
  CHECK(forms.asymmetry <= 1e-12);

  auto V1 = testkit::base_vars(1, 2);
  auto unit_speed = tensor(TensorShape::Mixed, 1, 2, {{"-sin(t1)"}, {"cos(t1)"}}, V1);
  for (const auto& L : tzitzeica_connection(unit_speed, MetricField::identity(2, 1), {{0.3, 0, 0}, {1.2, 0, 0}}))
    CHECK(std::abs(L(0, 0, 0)) <= 1e-15);
}

TEST_CASE("sphere fixture: connection, forms and Gauss residual") {
  auto g = MetricField::identity(3, 2);
  auto x = sphere_exact(33);
  auto eta = christoffel_second(metric({{"1", "0"}, {"", "sin(t1)^2"}}, 0, testkit::base_vars(2, 3)));
  auto lambda = tzitzeica_on_map(x, g);
  auto induced = induced_connection(x, g);
  auto frame = normal_frame(x, g, FrameOrientation::AlongPosition);
  auto forms = fundamental_forms(x, g, frame);
  for (std::size_t k = 0; k < x.grid().node_count(); ++k) {
    const auto t = x.grid().coordinates(k);
    auto expected = eta.at(t);
    for (std::size_t e = 0; e < expected.data().size(); ++e) {
      CHECK(std::abs(lambda[k].data()[e] - expected.data()[e]) <= 1e-6);
      CHECK(std::abs(induced[k].data()[e] - expected.data()[e]) <= 1e-6);
    }
    const double s = std::sin(t[0]);
    CHECK(std::abs(forms.forms[k](0, 0, 0) + 1.0) <= 1e-6);
    CHECK(std::abs(forms.forms[k](0, 1, 1) + s * s) <= 1e-6);
  }
  CHECK(gauss_residual(x, g, frame).max_norm <= 1e-8);

  auto coarse_x = sphere_sampled(33);
  auto fine_x = sphere_sampled(65);
  auto coarse = gauss_residual(coarse_x, g, normal_frame(coarse_x, g));
  auto fine = gauss_residual(fine_x, g, normal_frame(fine_x, g));
  CHECK(coarse.max_norm <= 1e-2);
  const double ratio = convergence_ratio(coarse, fine);
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("property: induced connection agrees with the projection formula on a curved target") {
  auto V = testkit::base_vars(2, 3);
  auto g = metric(testkit::random_metric_rows(3, 9), 2, V);
  auto x = sphere_exact(9);
  auto a = tzitzeica_on_map(x, g);
  auto b = induced_connection(x, g);
  auto frame = normal_frame(x, g);
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t e = 0; e < a[k].data().size(); ++e) CHECK(std::abs(a[k].data()[e] - b[k].data()[e]) <= 1e-9);
  CHECK(gauss_residual(x, g, frame).max_norm <= 1e-8);
}

TEST_CASE("plane and circle fixtures") {
  auto V = testkit::base_vars(2, 3);
  auto g = MetricField::identity(3, 2);
  auto plane = grid_partials(sample_map(exprs({"t1+t2", "t2", "0"}, V), testkit::square_grid(2, 0, 1, 9)));
  auto frame = normal_frame(plane, g);
  CHECK(gauss_residual(plane, g, frame).max_norm <= 1e-12);
  for (const auto& F : fundamental_forms(plane, g, frame).forms) CHECK(F.max_abs() <= 1e-12);

  auto V1 = testkit::base_vars(1, 2);
  auto circle = analytic_partials(exprs({"2*cos(t1)", "2*sin(t1)"}, V1), GridSpec({{0.1, 3.0}}, {9}));
  auto cf = normal_frame(circle, MetricField::identity(2, 1), FrameOrientation::AlongPosition);
  for (const auto& F : fundamental_forms(circle, MetricField::identity(2, 1), cf).forms)
    CHECK(F(0, 0, 0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("jet lifts") {
  auto V = testkit::base_vars(2, 3);
  auto g = MetricField::identity(3, 2);
  auto affine = grid_partials(sample_map(exprs({"t1+t2", "2*t2", "0.5*t1"}, V), testkit::square_grid(2, 0, 1, 9)));
  auto lift = jet_lift(affine, g, normal_frame(affine, g));
  CHECK(lift.jet_dim() == 9);
  CHECK(lift.first_order.max_norm <= 1e-12);
  for (const auto& X : lift.X) CHECK((X - lift.X[0]).norm() <= 1e-12);
  auto gamma = MetricField::identity(9, 2);
  CHECK(jet_potential_residual(lift, MetricField::identity(2, 0), gamma).max_norm <= 1e-8);

  auto V1 = testkit::base_vars(1, 2);
  auto circle = analytic_partials(exprs({"cos(t1)", "sin(t1)"}, V1), GridSpec({{0.1, 3.0}}, {9}));
  auto cl = jet_lift(circle, MetricField::identity(2, 1), normal_frame(circle, MetricField::identity(2, 1)));
  for (std::size_t k = 0; k < cl.grid.node_count(); ++k) {
    const double t = cl.grid.coordinates(k)[0];
    auto xi = cl.xi.at(k);
    CHECK(xi[0] == doctest::Approx(std::cos(t)));
    CHECK(xi[1] == doctest::Approx(std::sin(t)));
    CHECK(xi[2] == doctest::Approx(-std::sin(t)));
    CHECK(xi[3] == doctest::Approx(std::cos(t)));
    const Eigen::Vector4d derivative(-std::sin(t), std::cos(t), -std::cos(t), -std::sin(t));
    CHECK((cl.X[k].col(0) - derivative).norm() <= 1e-12);
  }
  CHECK(cl.first_order.max_norm <= 1e-12);

  auto x = sphere_sampled(33);
  auto sl = jet_lift(x, g, normal_frame(x, g));
  const double h = x.grid().max_spacing();
  CHECK(sl.first_order.max_norm <= 5.0 * h * h);
  // The field rebuilt at the node's own jet point reproduces the table.
  const std::size_t node = x.grid().node_count() / 2;
  CHECK((sl.field(node, sl.xi.at(node)) - sl.X[node]).norm() <= 1e-12);
}

TEST_CASE("Ricci system checker") {
  auto V = testkit::base_vars(2, 1);
  auto pts = sample_box({{0, 1}, {0, 1}}, 16, 0);
  auto h0 = metric({{"2", "0.5"}, {"", "1"}}, 0, V);
  auto zero = connection_from_exprs(exprs(std::vector<std::string>(8, "0"), V), 2);
  CHECK(verify_h0_ricci(h0, zero, pts).max_violation == 0.0);

  auto V1 = testkit::base_vars(1, 1);
  auto pts1 = sample_box({{0, 1}}, 16, 0);
  auto one = connection_from_exprs(exprs({"1"}, V1), 1);
  CHECK(verify_h0_ricci(metric({{"exp(2*t1)"}}, 0, V1), one, pts1).max_violation <= 1e-12);
  auto half = connection_from_exprs(exprs({"0.5"}, V1), 1);
  CHECK(verify_h0_ricci(metric({{"3"}}, 0, V1), half, pts1).max_violation == doctest::Approx(3.0));

  auto product = metric({{"exp(0.2*t1)", "0"}, {"", "1+0.3*t2^2"}}, 0, V);
  auto lambda0 = connection_from_exprs(
      exprs({"0.1", "0", "0", "0", "0", "0", "0", "0.3*t2/(1+0.3*t2^2)"}, V), 2);
  CHECK(verify_h0_ricci(product, lambda0, pts).max_violation <= 1e-12);

  auto V3 = testkit::base_vars(2, 3);
  auto plane = analytic_partials(exprs({"t1", "t2", "0"}, V3), testkit::square_grid(2, 0, 1, 9));
  auto flat0 = connection_from_exprs(exprs(std::vector<std::string>(8, "0"), V3), 2);
  CHECK(lambda0_display_defect(plane, flat0).max_norm == 0.0);
  CHECK(lambda0_display_defect(sphere_exact(9), flat0).max_norm > 0.1);
}
