#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "varigeo/energies.hpp"
#include "varigeo/errors.hpp"

using namespace varigeo;
using testkit::exprs;
using testkit::metric;
using testkit::tensor;

namespace {

MapPartials analytic(const std::vector<std::string>& map, int m, int n, int points = 9) {
  return analytic_partials(exprs(map, testkit::base_vars(m, n)), testkit::square_grid(m, 0.0, 1.0, points));
}

void check_all(const DensityField& d, double expected, double tol = 1e-12) {
  for (double v : d.values) CHECK(std::abs(v - expected) <= tol);
}

}  // namespace

TEST_CASE("f-energy") {
  auto I2 = MetricField::identity(2, 0);
  auto G2 = MetricField::identity(2, 2);
  check_all(energy_f(analytic({"t1", "t2"}, 2, 2), I2, G2), 1.0);
  check_all(energy_f(analytic({"sin(t1)", "t2^3"}, 2, 2), I2, MetricField::zero(2, 2)), 0.0);
  check_all(energy_f(analytic({"2*t1", "t2"}, 2, 2), I2, G2), 2.5);
  CHECK_THROWS_AS(energy_f(analytic({"t1", "t2"}, 2, 2), MetricField::zero(2, 0), G2), SingularMetricError);
}

TEST_CASE("deviated energy") {
  auto V = testkit::base_vars(2, 2);
  auto I2 = MetricField::identity(2, 0);
  auto G2 = MetricField::identity(2, 2);
  auto x = analytic({"2*t1 + t2", "t1"}, 2, 2);
  auto T = tensor(TensorShape::Sheet, 2, 2, {{"2", "1"}, {"1", "0"}}, V);
  check_all(energy_deviated(x, I2, G2, MetricField::zero(2, 2), T), 0.0);

  auto f = metric({{"1+x1^2", "0.3"}, {"", "2"}}, 2, V, MetricKind::Symmetric);
  auto y = analytic({"sin(t1)", "t1*t2"}, 2, 2);
  auto dev = energy_deviated(y, I2, G2, f, DistTensor::zero(TensorShape::Sheet, 2, 2));
  auto ef = energy_f(y, I2, f);
  auto eg = energy_f(y, I2, G2);
  for (std::size_t k = 0; k < dev.values.size(); ++k)
    CHECK(dev.values[k] == doctest::Approx(ef.values[k] + eg.values[k]).epsilon(1e-13));

  auto V1 = testkit::base_vars(1, 1);
  auto T1 = tensor(TensorShape::Sheet, 1, 1, {{"2"}}, V1);
  check_all(energy_deviated(analytic({"t1"}, 1, 1), MetricField::identity(1, 0), MetricField::identity(1, 1),
                            MetricField::zero(1, 1), T1),
            0.5);
  CHECK_THROWS_AS(energy_deviated(analytic({"t1"}, 1, 1), MetricField::identity(1, 0), MetricField::identity(1, 1),
                                  MetricField::zero(1, 1), DistTensor::zero(TensorShape::Mixed, 1, 1)),
                  ShapeError);
}

TEST_CASE("general energy and the perfect square") {
  auto V = testkit::base_vars(1, 1);
  auto h = MetricField::identity(1, 0);
  auto g = MetricField::identity(1, 1);
  auto X = tensor(TensorShape::Mixed, 1, 1, {{"x1"}}, V);
  check_all(energy_general(analytic({"exp(t1)"}, 1, 1), h, g, X, perfect_square_c(h, g, X)), 0.0, 1e-12);

  auto y = analytic({"sin(2*t1)"}, 1, 1);
  auto kinetic = energy_general(y, h, g, DistTensor::zero(TensorShape::Mixed, 1, 1), PotentialField::zero(1, 1));
  auto eg = energy_f(y, h, g);
  for (std::size_t k = 0; k < kinetic.values.size(); ++k) CHECK(kinetic.values[k] == doctest::Approx(eg.values[k]));

  // x = t1 on a grid containing t1 = 0.5.
  auto lin = analytic({"t1"}, 1, 1, 5);
  auto c = PotentialField(parse_expr("0.5*x1^2", V), 1, 1);
  auto d = energy_general(lin, h, g, X, c);
  CHECK(d.values[2] == doctest::Approx(0.125));
}

TEST_CASE("perfect_square_c values") {
  auto V = testkit::base_vars(2, 1);
  auto g = MetricField::identity(1, 2);
  std::vector<double> p{0.2, 0.3, 0.7};
  auto X0 = DistTensor::zero(TensorShape::Mixed, 2, 1);
  CHECK(perfect_square_c(MetricField::identity(2, 0), g, X0).value(p) == 0.0);
  auto X = tensor(TensorShape::Mixed, 2, 1, {{"1", "0"}}, V);
  CHECK(perfect_square_c(MetricField::identity(2, 0), g, X).value(p) == doctest::Approx(0.5));
  auto quarter = metric({{"0.25", "0"}, {"", "0.25"}}, 0, V);
  CHECK(perfect_square_c(quarter, g, X).value(p) == doctest::Approx(2.0));
}

TEST_CASE("least-squares density") {
  auto V = testkit::base_vars(2, 2);
  auto h = metric({{"1+0.1*t1^2", "0.1*t1*t2"}, {"", "1.5"}}, 0, V);
  auto g = MetricField::identity(2, 2);
  auto X = tensor(TensorShape::Mixed, 2, 2, {{"x1", "x1"}, {"t2", "t1"}}, V);
  check_all(least_squares_density(analytic({"exp(t1+t2)", "t1*t2+1"}, 2, 2), h, g, X), 0.0, 1e-12);

  auto y = analytic({"sin(t1)", "t2^2"}, 2, 2);
  auto ls = least_squares_density(y, h, g, DistTensor::zero(TensorShape::Mixed, 2, 2));
  auto eg = energy_f(y, h, g);
  for (std::size_t k = 0; k < ls.values.size(); ++k)
    CHECK(ls.values[k] == doctest::Approx(eg.values[k] * eg.volume[k]).epsilon(1e-13));

  auto V1 = testkit::base_vars(1, 1);
  check_all(least_squares_density(analytic({"t1"}, 1, 1), MetricField::identity(1, 0), MetricField::identity(1, 1),
                                  tensor(TensorShape::Mixed, 1, 1, {{"0.5"}}, V1)),
            0.125);
}

TEST_CASE("composite Lagrangians reduce to the kinetic energy") {
  auto V = testkit::base_vars(2, 2);
  auto h = metric({{"1+0.1*t1^2", "0.1*t1*t2"}, {"", "1.5+0.2*sin(t2)"}}, 0, V);
  auto g = MetricField::identity(2, 2);
  auto x = analytic({"sin(t1)+0.5*t2", "exp(0.3*t1)*cos(t2)"}, 2, 2);
  auto eg = energy_f(x, h, g);
  CompositeInputs in{h, g, MetricField::zero(2, 2), DistTensor::zero(TensorShape::Sheet, 2, 2),
                     DistTensor::identity(2, 2)};
  auto l8 = composite_densities(LagrangianKind::L8, x, in);
  auto l9 = composite_densities(LagrangianKind::L9, x, in);
  auto l7 = composite_densities(LagrangianKind::L7, x, in);
  CHECK(l8.includes_volume_factor);
  for (std::size_t k = 0; k < eg.values.size(); ++k) {
    const double ref = eg.values[k] * eg.volume[k];
    CHECK(l8.values[k] == doctest::Approx(ref).epsilon(1e-13));
    CHECK(l9.values[k] == doctest::Approx(2.0 * ref).epsilon(1e-13));
    CHECK(l7.values[k] == doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK_THROWS_AS(composite_densities(LagrangianKind::L4, x, in), ShapeError);
}

TEST_CASE("property: L7 = L6 - L5 when f = g(Y - I) and gY is symmetric") {
  auto V = testkit::base_vars(2, 2);
  auto h = metric({{"1+0.1*t1^2", "0.1*t1*t2"}, {"", "1.5+0.2*sin(t2)"}}, 0, V);
  auto g = metric({{"2", "0.5"}, {"", "1"}}, 2, V);
  // gY symmetric: Y = g^{-1} S with S symmetric; g(Y - I) = S - g.
  auto Y = tensor(TensorShape::Endomorphism, 2, 2, {{"0", "2/7"}, {"2", "20/7"}}, V);
  auto f = metric({{"1-2", "2-0.5"}, {"", "3-1"}}, 2, V, MetricKind::Symmetric);
  auto T = tensor(TensorShape::Sheet, 2, 2, {{"sin(t1)", "t2^2"}, {"cos(t1*t2)", "1+t1"}}, V);
  auto x = analytic({"sin(t1)+0.5*t2+0.3", "exp(0.3*t1)*cos(t2)+0.5"}, 2, 2);
  auto l7 = composite_densities(LagrangianKind::L7, x, {h, g, f, T, Y});
  auto l6 = evaluate_density(x, l6_density(h, g, Y), h, LagrangianKind::L6, true);
  auto l5 = evaluate_density(x, l5_density(h, g, T), h, LagrangianKind::L5, true);
  for (std::size_t k = 0; k < l7.values.size(); ++k) CHECK(std::abs(l7.values[k] - (l6.values[k] - l5.values[k])) <= 1e-12);
}

TEST_CASE("property: completing the square and nonnegativity") {
  auto V = testkit::base_vars(2, 2);
  auto h = metric({{"1+0.1*t1^2", "0.1*t1*t2"}, {"", "1.5+0.2*sin(t2)"}}, 0, V);
  auto g = metric(testkit::random_metric_rows(2, 4), 2, V);
  auto X = tensor(TensorShape::Mixed, 2, 2, {{"x2+t1", "sin(x1)"}, {"x1*x2", "t2*x1"}}, V);
  auto x = analytic({"sin(t1)+0.5*t2+0.3", "exp(0.3*t1)*cos(t2)+0.5"}, 2, 2);
  auto general = energy_general(x, h, g, X, perfect_square_c(h, g, X));
  auto ls = least_squares_density(x, h, g, X);
  auto eg = energy_f(x, h, g);
  for (std::size_t k = 0; k < ls.values.size(); ++k) {
    CHECK(std::abs(general.values[k] - ls.values[k] / ls.volume[k]) <= 1e-12);
    CHECK(ls.values[k] >= 0.0);
    CHECK(eg.values[k] >= 0.0);
  }
}

TEST_CASE("trapezoidal totals") {
  auto grid = testkit::square_grid(2, 0.0, 1.0, 9);
  DensityField one;
  one.grid = grid;
  one.values.assign(grid.node_count(), 1.0);
  one.volume.assign(grid.node_count(), 1.0);
  CHECK(total_energy(one) == doctest::Approx(1.0).epsilon(1e-14));

  auto eg = energy_f(analytic({"t1", "t2"}, 2, 2), MetricField::identity(2, 0), MetricField::identity(2, 2));
  CHECK(total_energy(eg) == doctest::Approx(1.0).epsilon(1e-14));

  GridSpec line({{0.0, 1.0}}, {65});
  DensityField wave;
  wave.grid = line;
  wave.includes_volume_factor = true;
  for (std::size_t k = 0; k < line.node_count(); ++k) wave.values.push_back(std::sin(M_PI * line.coordinates(k)[0]));
  CHECK(std::abs(total_energy(wave) - 2.0 / M_PI) <= 1e-3);
}
