#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "varigeo/errors.hpp"
#include "varigeo/grid.hpp"

using namespace varigeo;

TEST_CASE("GridSpec validation") {
  CHECK_THROWS_AS(GridSpec({{1.0, 0.0}}, {9}), GridError);
  CHECK_THROWS_AS(GridSpec({{0.0, 1.0}}, {4}), GridError);
  CHECK_THROWS_AS(GridSpec({{0.0, 1.0}}, {9, 9}), GridError);
  GridSpec g({{0.0, 1.0}, {-1.0, 1.0}}, {5, 9});
  CHECK(g.node_count() == 45);
  CHECK(g.spacing(0) == 0.25);
  CHECK(g.spacing(1) == 0.25);
  CHECK(g.refined().points() == std::vector<int>{9, 17});
  CHECK(g.coordinates(g.node_count() - 1) == std::vector<double>{1.0, 1.0});
  // Last axis varies fastest.
  CHECK(g.coordinates(1) == std::vector<double>{0.0, -0.75});
  CHECK(g.interior_nodes().size() == 1u * 5u);
}

TEST_CASE("linear maps are differentiated exactly") {
  auto V = testkit::base_vars(1, 1);
  GridSpec grid({{0.0, 1.0}}, {11});
  auto x = grid_partials(sample_map(testkit::exprs({"3*t1"}, V), grid));
  for (std::size_t k = 0; k < grid.node_count(); ++k) CHECK(x.dx(k, 0, 0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("quadratics have exact second partials inside") {
  auto V = testkit::base_vars(2, 1);
  auto grid = testkit::square_grid(2, 0.0, 1.0, 9);
  auto x = grid_partials(sample_map(testkit::exprs({"t1^2 + 3*t1*t2"}, V), grid));
  for (std::size_t k : grid.interior_nodes(1)) {
    CHECK(x.ddx(k, 0, 0, 0) == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(x.ddx(k, 0, 0, 1) == doctest::Approx(3.0).epsilon(1e-11));
    CHECK(x.ddx(k, 0, 1, 0) == doctest::Approx(3.0).epsilon(1e-11));
    CHECK(std::abs(x.ddx(k, 0, 1, 1)) <= 1e-10);
  }
}

TEST_CASE("first partials converge at second order, boundary included") {
  auto V = testkit::base_vars(1, 1);
  auto error = [&](int points) {
    GridSpec grid({{0.0, 1.0}}, {points});
    auto x = grid_partials(sample_map(testkit::exprs({"sin(t1)"}, V), grid));
    double e = 0.0;
    for (std::size_t k = 0; k < grid.node_count(); ++k)
      e = std::max(e, std::abs(x.dx(k, 0, 0) - std::cos(grid.coordinates(k)[0])));
    return e;
  };
  const double ratio = error(33) / error(65);
  CHECK(ratio > 3.6);
  CHECK(ratio < 4.4);
}

TEST_CASE("analytic partials match symbolic derivatives") {
  auto V = testkit::base_vars(2, 1);
  auto grid = testkit::square_grid(2, 0.0, 1.0, 5);
  auto x = analytic_partials(testkit::exprs({"sin(t1)*t2^2"}, V), grid);
  CHECK(x.exact());
  auto t = grid.coordinates(7);
  CHECK(x.dx(7, 0, 1) == doctest::Approx(2.0 * std::sin(t[0]) * t[1]));
  CHECK(x.ddx(7, 0, 0, 1) == doctest::Approx(2.0 * std::cos(t[0]) * t[1]));
  CHECK_THROWS_AS(analytic_partials(testkit::exprs({"x1"}, V), grid), ShapeError);
}

TEST_CASE("map validation") {
  GridSpec grid({{0.0, 1.0}}, {5});
  MapGrid bad(grid, 1, Provenance::UserSupplied);
  bad.values[2] = std::nan("");
  CHECK_THROWS_AS(bad.validate(), GridError);
  bad.values.pop_back();
  CHECK_THROWS_AS(bad.validate(), GridError);
}

TEST_CASE("trapezoid weights integrate polynomials of degree one exactly") {
  auto grid = testkit::square_grid(2, 0.0, 2.0, 7);
  double area = 0.0;
  double moment = 0.0;
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    area += grid.trapezoid_weight(k);
    moment += grid.trapezoid_weight(k) * grid.coordinates(k)[0];
  }
  CHECK(area == doctest::Approx(4.0));
  CHECK(moment == doctest::Approx(4.0));
}
