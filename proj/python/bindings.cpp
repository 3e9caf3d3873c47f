#include <memory>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "varigeo/commands.hpp"
#include "varigeo/errors.hpp"
#include "varigeo/expr.hpp"
#include "varigeo/geometry.hpp"
#include "varigeo/scenario.hpp"

namespace py = pybind11;
using namespace varigeo;

namespace {

// Reports cross the boundary as JSON text; the Python side decodes them.
py::tuple run(const std::string& command, const Scenario& scenario, const std::string& kind, int theorem,
              const std::string& metric, std::optional<double> tol, bool refine, bool analytic,
              std::optional<std::uint64_t> seed, std::size_t samples) {
  CommandOptions opt;
  opt.kind = kind;
  opt.theorem = theorem;
  opt.metric = metric;
  opt.tol = tol;
  opt.refine = refine;
  opt.analytic = analytic;
  opt.seed = seed;
  opt.samples = samples;
  CommandResult result;
  {
    py::gil_scoped_release release;
    result = run_command(command, scenario, opt);
  }
  return py::make_tuple(report_text(result), result.exit_code);
}

std::vector<std::vector<std::vector<double>>> christoffel(const std::vector<std::vector<std::string>>& rows,
                                                          const std::vector<double>& point) {
  const int n = static_cast<int>(rows.size());
  auto vars = std::make_shared<const VariableSet>(VariableSet::coordinates(0, n));
  std::vector<std::vector<ScalarExpr>> entries;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n) throw ShapeError("metric rows must be square");
    entries.emplace_back();
    for (const auto& s : row) entries.back().push_back(s.empty() ? ScalarExpr::constant(0.0) : parse_expr(s, vars));
  }
  if (static_cast<int>(point.size()) != n) throw ShapeError("point must have one entry per coordinate");
  const Tensor3 G = christoffel_second(MetricField(entries, 0, MetricKind::Riemannian)).at(point);
  std::vector<std::vector<std::vector<double>>> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(k)].emplace_back();
      for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(k)].back().push_back(G(k, i, j));
    }
  return out;
}

}  // namespace

PYBIND11_MODULE(_varigeo, m) {
  m.doc() = "Variational geometry checks: expressions, scenarios and command reports";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ScenarioError>(m, "ScenarioError", base.ptr());
  py::register_exception<BlowUpError>(m, "BlowUpError", base.ptr());

  py::class_<ScalarExpr>(m, "Expr")
      .def("__call__", [](const ScalarExpr& e, const std::vector<double>& point) { return e.eval(point); })
      .def("diff", py::overload_cast<std::string_view>(&ScalarExpr::diff, py::const_))
      .def("__str__", &ScalarExpr::to_string)
      .def("__repr__", [](const ScalarExpr& e) { return "Expr(" + e.to_string() + ")"; });

  m.def(
      "parse_expr",
      [](const std::string& text, int m_dim, int n_dim) {
        return parse_expr(text, std::make_shared<const VariableSet>(VariableSet::coordinates(m_dim, n_dim)));
      },
      py::arg("text"), py::arg("m"), py::arg("n"), "Parse over t1..tm, x1..xn; call with a point in that order.");

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("m", &Scenario::m)
      .def_readonly("n", &Scenario::n)
      .def_readonly("hash", &Scenario::hash)
      .def_readonly("seed", &Scenario::seed);
  m.def("load_scenario", [](const std::string& path) { return load_scenario(path); }, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("origin") = "<scenario>");

  m.def("run_command", &run, py::arg("command"), py::arg("scenario"), py::arg("kind") = "", py::arg("theorem") = 0,
        py::arg("metric") = "g", py::arg("tol") = py::none(), py::arg("refine") = false, py::arg("analytic") = false,
        py::arg("seed") = py::none(), py::arg("samples") = 64);
  m.def("christoffel", &christoffel, py::arg("rows"), py::arg("point"),
        "Gamma[k][i][j] of the metric over x1..xn given by upper-triangle expression rows.");
  m.def("command_names", &command_names);
  m.def("residual_kinds", &residual_kinds);
  m.def("energy_kinds", &energy_kinds);
}
