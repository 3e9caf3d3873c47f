#include "varigeo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "varigeo/conditions.hpp"
#include "varigeo/dynamics.hpp"
#include "varigeo/energies.hpp"
#include "varigeo/errors.hpp"
#include "varigeo/submanifold.hpp"

namespace varigeo {

namespace {

using ojson = nlohmann::ordered_json;

ojson grid_json(const GridSpec& grid) {
  ojson bounds = ojson::array();
  for (const auto& [lo, hi] : grid.bounds()) bounds.push_back({lo, hi});
  return ojson{{"bounds", bounds}, {"points", grid.points()}};
}

ojson vector_json(std::span<const double> v) { return ojson(std::vector<double>(v.begin(), v.end())); }

ojson tensor3_json(const Tensor3& t) {
  ojson out = ojson::array();
  for (int a = 0; a < t.dim(0); ++a) {
    ojson mid = ojson::array();
    for (int b = 0; b < t.dim(1); ++b) {
      ojson row = ojson::array();
      for (int c = 0; c < t.dim(2); ++c) row.push_back(t(a, b, c));
      mid.push_back(row);
    }
    out.push_back(mid);
  }
  return out;
}

ojson matrix_json(const Eigen::MatrixXd& M) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    out.push_back(row);
  }
  return out;
}

MetricField metric_or_identity(const Scenario& s, const std::string& name, int dim, int offset) {
  return s.has_metric(name) ? s.metric(name) : MetricField::identity(dim, offset);
}

MetricField g_of(const Scenario& s) { return metric_or_identity(s, "g", s.n, s.m); }
MetricField h_of(const Scenario& s) { return metric_or_identity(s, "h", s.m, 0); }

// f for the non-homogeneous dynamics: the scenario's f, else g(Y − I).
MetricField f_of(const Scenario& s) {
  if (s.has_metric("f")) return s.metric("f");
  if (s.Y) return (lowered_endomorphism(g_of(s), *s.Y) + g_of(s).scaled(-1.0)).with_kind(MetricKind::Symmetric);
  throw ScenarioError("scenario needs metric f (or Y to build f = g(Y - I))");
}

PotentialField c_of(const Scenario& s) {
  if (s.c) return PotentialField(*s.c, s.m, s.n);
  return perfect_square_c(h_of(s), g_of(s), s.tensor("X"));
}

std::vector<std::vector<double>> sample_points(const Scenario& s, const CommandOptions& opt) {
  auto box = s.grid.bounds();
  box.insert(box.end(), s.sample_box.begin(), s.sample_box.end());
  return sample_box(box, opt.samples, opt.seed.value_or(s.seed));
}

// Points in the metric's own layout: t only for h and h0, (t, x) for g and f,
// (t, 𝔵) for the jet metric with the derivative block drawn like x.
std::vector<std::vector<double>> metric_points(const Scenario& s, const CommandOptions& opt, const MetricField& g) {
  std::vector<std::pair<double, double>> box = s.grid.bounds();
  if (g.offset() != 0)
    for (int k = 0; k < g.dim(); ++k) box.push_back(s.sample_box[static_cast<std::size_t>(k % s.n)]);
  return sample_box(box, opt.samples, opt.seed.value_or(s.seed));
}

ojson pair_json(const ResidualReport& coarse, const ResidualReport& fine) {
  return ojson{{"coarsePoints", coarse.grid.points()},
               {"finePoints", fine.grid.points()},
               {"coarseMaxNorm", coarse.max_norm},
               {"fineMaxNorm", shared_max_norm(coarse, fine)},
               {"ratio", convergence_ratio(coarse, fine)}};
}

struct Outcome {
  ResidualReport primary;
  bool has_primary = false;
  double max_norm = 0.0;
  double mean_norm = 0.0;
  ojson conditions = ojson::object();
  ojson pairs;  // null unless refined
  ojson details = ojson::object();

  void set_primary(ResidualReport r) {
    max_norm = r.max_norm;
    mean_norm = r.mean_norm;
    primary = std::move(r);
    has_primary = true;
  }
};

DensityFunction density_for(const std::string& kind, const Scenario& s, MetricField& volume_metric) {
  const MetricField h = h_of(s);
  volume_metric = h;
  if (kind == "Ef") return f_energy_density(h, s.has_metric("f") ? s.metric("f") : g_of(s));
  if (kind == "EfgT") return deviated_density(h, g_of(s), s.metric("f"), s.tensor("T"));
  if (kind == "EgcX") return general_density(h, g_of(s), s.tensor("X"), c_of(s));
  if (kind == "L4") return least_squares_density_function(h, g_of(s), s.tensor("X"));
  if (kind == "L5") return l5_density(h, g_of(s), s.tensor("T"));
  if (kind == "L6") return l6_density(h, g_of(s), s.tensor("Y"));
  if (kind == "L7") return deviated_density(h, g_of(s), f_of(s), s.tensor("T"));
  if (kind == "L8") return f_energy_density(h, lowered_endomorphism(g_of(s), s.tensor("Y")));
  if (kind == "L9") {
    volume_metric = s.metric("h0");
    return f_energy_density(volume_metric, symmetrized_endomorphism(g_of(s), s.tensor("Y")));
  }
  throw ScenarioError("unknown energy kind '" + kind + "'");
}

// Generic EL of the density behind a named residual, in the residual's
// index convention.
ResidualReport el_oracle(const std::string& kind, const MapPartials& x, const Scenario& s) {
  const MetricField g = g_of(s);
  const MetricField h = h_of(s);
  auto lower = [&](const DensityFunction& d, const MetricField& hh) {
    return named_from_el(el_residual_generic(x, d, hh), x, g, IndexPosition::Lower);
  };
  auto upper = [&](const DensityFunction& d) {
    return named_from_el(el_residual_generic(x, d, h), x, g, IndexPosition::Upper);
  };
  if (kind == "harmonic") return upper(f_energy_density(h, g));
  if (kind == "ultra-harmonic") return lower(f_energy_density(h, s.metric("f")), h);
  if (kind == "ultra-potential") return lower(deviated_density(h, g, s.metric("f"), s.tensor("T")), h);
  if (kind == "potential") return upper(general_density(h, g, s.tensor("X"), c_of(s)));
  if (kind == "nonhomogeneous") return lower(deviated_density(h, g, f_of(s), s.tensor("T")), h);
  if (kind == "homogeneous") return lower(f_energy_density(h, lowered_endomorphism(g, s.tensor("Y"))), h);
  if (kind == "h0") {
    const MetricField& h0 = s.metric("h0");
    return lower(f_energy_density(h0, symmetrized_endomorphism(g, s.tensor("Y"))), h0);
  }
  throw ScenarioError("no variational oracle for residual kind '" + kind + "'");
}

void run_christoffel(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const MetricField& g = s.metric(opt.metric);
  const auto pts = metric_points(s, opt, g);
  const auto field = christoffel_second(g);
  double worst = 0.0, total = 0.0, sym = 0.0;
  ojson tables = ojson::array();
  for (const auto& p : pts) {
    const std::span<const double> at(p);
    const Tensor3 G = field.at(at);
    const Eigen::MatrixXd gv = g.value(at);
    const auto dg = g.first_derivatives(at);
    const int d = g.dim();
    double here = 0.0;
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double v = dg[static_cast<std::size_t>(k)](i, j);
          for (int hh = 0; hh < d; ++hh) v -= G(hh, k, i) * gv(hh, j) + G(hh, k, j) * gv(hh, i);
          here = std::max(here, std::abs(v));
          sym = std::max(sym, std::abs(G(k, i, j) - G(k, j, i)));
        }
    worst = std::max(worst, here);
    total += here;
    tables.push_back(ojson{{"point", vector_json(at)}, {"christoffel", tensor3_json(G)}});
  }
  out.max_norm = worst;
  out.mean_norm = pts.empty() ? 0.0 : total / static_cast<double>(pts.size());
  out.conditions["compatibility"] = worst;
  out.conditions["symmetry"] = sym;
  out.details["metric"] = opt.metric;
  out.details["samples"] = tables;
}

void run_curvature(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const MetricField& g = s.metric(opt.metric);
  const auto pts = metric_points(s, opt, g);
  const RiemannCurvature R(g);
  const int d = g.dim();
  double worst = 0.0, total = 0.0, anti = 0.0, bianchi = 0.0;
  for (const auto& p : pts) {
    const std::span<const double> at(p);
    const Tensor4 r = R.at(at);
    worst = std::max(worst, r.max_abs());
    total += r.max_abs();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            anti = std::max(anti, std::abs(r(i, j, k, l) + r(i, j, l, k)));
            bianchi = std::max(bianchi, std::abs(r(i, j, k, l) + r(i, k, l, j) + r(i, l, j, k)));
          }
  }
  out.max_norm = worst;
  out.mean_norm = pts.empty() ? 0.0 : total / static_cast<double>(pts.size());
  out.conditions["antisymmetry"] = anti;
  out.conditions["bianchi"] = bianchi;
  if (s.Y && opt.metric == "g") out.conditions["24"] = check_condition_24(g, *s.Y, sample_points(s, opt)).max_violation;
  out.details["metric"] = opt.metric;
}

void run_energy(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const std::string kind = opt.kind.empty() ? "Ef" : opt.kind;
  const auto& kinds = energy_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) throw ScenarioError("unknown energy kind '" + kind + "'");
  auto total_of = [&](const GridSpec& grid, double& maxabs, double& meanabs) {
    const MapPartials x = scenario_map(s, grid, opt.analytic);
    MetricField hv;
    const DensityFunction d = density_for(kind, s, hv);
    // Reported densities are Lagrangians, i.e. include √det h.
    const DensityField field = evaluate_density(x, d, hv, LagrangianKind::Ef, true);
    maxabs = 0.0;
    meanabs = 0.0;
    for (double v : field.values) {
      maxabs = std::max(maxabs, std::abs(v));
      meanabs += std::abs(v);
    }
    meanabs /= static_cast<double>(std::max<std::size_t>(1, field.values.size()));
    return total_energy(field);
  };
  double mx = 0.0, mn = 0.0;
  const double e = total_of(s.grid, mx, mn);
  out.max_norm = mx;
  out.mean_norm = mn;
  out.details["kind"] = kind;
  out.details["energy"] = e;
  if (opt.refine) {
    double fx = 0.0, fm = 0.0;
    const double ef = total_of(s.grid.refined(), fx, fm);
    out.pairs = ojson::array({ojson{{"coarsePoints", s.grid.points()},
                                    {"finePoints", s.grid.refined().points()},
                                    {"coarseEnergy", e},
                                    {"fineEnergy", ef}}});
  }
}

void run_residual(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  if (opt.kind.empty()) throw ScenarioError("residual needs --kind");
  const auto& kinds = residual_kinds();
  if (std::find(kinds.begin(), kinds.end(), opt.kind) == kinds.end())
    throw ScenarioError("unknown residual kind '" + opt.kind + "'");
  out.set_primary(named_residual(opt.kind, scenario_map(s, s.grid, opt.analytic), s));
  out.details["kind"] = opt.kind;
  if (opt.refine) {
    const ResidualReport fine = named_residual(opt.kind, scenario_map(s, s.grid.refined(), opt.analytic), s);
    out.pairs = ojson::array({pair_json(out.primary, fine)});
  }
}

IntegrationOptions integration_options(const Scenario& s) {
  IntegrationOptions io;
  if (auto it = s.tolerances.find("resolution"); it != s.tolerances.end()) io.resolution_limit = it->second;
  if (auto it = s.tolerances.find("blowUp"); it != s.tolerances.end()) io.blow_up_limit = it->second;
  return io;
}

void run_integrate(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const DistTensor& X = s.tensor("X");
  if (!s.x0) throw ScenarioError("integrate needs x0");
  auto solve = [&](const GridSpec& grid, IntegrationResult& res) {
    res = integrate_normal_system(X, *s.x0, grid, integration_options(s));
    const PotentialField c = perfect_square_c(h_of(s), g_of(s), X);
    return potential_residual(grid_partials(res.map), h_of(s), g_of(s), X, c);
  };
  IntegrationResult res;
  out.set_primary(solve(s.grid, res));
  out.conditions["integrability"] = integrability_check(X, sample_points(s, opt)).max_defect;
  out.conditions["consistency"] = res.consistency_defect;
  out.details["integrabilityAlongMap"] = res.integrability_defect;
  out.details["endpoint"] = vector_json(res.map.at(s.grid.node_count() - 1));
  if (opt.refine) {
    IntegrationResult fine_res;
    const ResidualReport fine = solve(s.grid.refined(), fine_res);
    out.pairs = ojson::array({pair_json(out.primary, fine)});
    out.details["fineEndpoint"] = vector_json(fine_res.map.at(fine_res.map.grid.node_count() - 1));
  }
}

void run_gauss(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const MetricField g = g_of(s);
  auto solve = [&](const GridSpec& grid, ojson* extra) {
    const MapPartials x = scenario_map(s, grid, opt.analytic);
    const NormalFrame frame = normal_frame(x, g, s.orientation);
    if (extra) {
      const auto ff = fundamental_forms(x, g, frame);
      const auto proj = tzitzeica_on_map(x, g);
      const auto ind = induced_connection(x, g);
      double gap = 0.0;
      for (std::size_t k = 0; k < proj.size(); ++k)
        for (std::size_t e = 0; e < proj[k].data().size(); ++e)
          gap = std::max(gap, std::abs(proj[k].data()[e] - ind[k].data()[e]));
      out.conditions["frame"] = frame_defect(frame, x, g);
      out.conditions["form-asymmetry"] = ff.asymmetry;
      (*extra)["tzitzeicaVsInduced"] = gap;
      const std::size_t mid = grid.node_count() / 2;
      (*extra)["sampleNode"] = ojson{{"t", grid.coordinates(mid)},
                                     {"inducedMetric", matrix_json(induced_metric(x, g)[mid])},
                                     {"tzitzeica", tensor3_json(proj[mid])},
                                     {"forms", tensor3_json(ff.forms[mid])},
                                     {"normals", matrix_json(frame.normals[mid])}};
    }
    return gauss_residual(x, g, frame);
  };
  out.set_primary(solve(s.grid, &out.details));
  if (opt.refine) out.pairs = ojson::array({pair_json(out.primary, solve(s.grid.refined(), nullptr))});
}

MetricField gamma_of(const Scenario& s) {
  return metric_or_identity(s, "gamma", s.n * (s.m + 1), s.m);
}

void run_lift(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const MetricField g = g_of(s);
  const MetricField gamma = gamma_of(s);
  auto solve = [&](const GridSpec& grid, bool record) {
    const MapPartials x = scenario_map(s, grid, opt.analytic);
    const NormalFrame frame = normal_frame(x, g, s.orientation);
    const JetLift lift = jet_lift(x, g, frame);
    if (record) {
      out.conditions["first-order-system"] = lift.first_order.max_norm;
      out.details["firstOrderBound"] = 5.0 * grid.max_spacing() * grid.max_spacing();
    }
    return jet_potential_residual(lift, h_of(s), gamma);
  };
  out.set_primary(solve(s.grid, true));
  out.details["jetMetric"] = s.has_metric("gamma") ? "scenario" : "identity";
  if (opt.refine) out.pairs = ojson::array({pair_json(out.primary, solve(s.grid.refined(), false))});
}

void run_verify(const Scenario& s, const CommandOptions& opt, Outcome& out) {
  const auto pts = sample_points(s, opt);
  const GridSpec fine_grid = s.grid.refined();
  auto el_gap = [&](const std::string& kind, const GridSpec& grid) {
    const MapPartials x = scenario_map(s, grid, opt.analytic);
    return difference(named_residual(kind, x, s), el_oracle(kind, x, s));
  };
  auto paired = [&](ResidualReport coarse, ResidualReport fine) {
    out.pairs = ojson::array({pair_json(coarse, fine)});
    out.set_primary(std::move(coarse));
  };
  switch (opt.theorem) {
    case 1: {
      const DistTensor& X = s.tensor("X");
      out.conditions["integrability"] = integrability_check(X, pts).max_defect;
      auto residual = [&](const GridSpec& grid) {
        const MapPartials x = scenario_map(s, grid, opt.analytic);
        return potential_residual(x, h_of(s), g_of(s), X, perfect_square_c(h_of(s), g_of(s), X));
      };
      paired(residual(s.grid), residual(fine_grid));
      out.details["check"] = "L4 Euler-Lagrange residual along the first-order solution";
      break;
    }
    case 2: {
      const MetricField f = f_of(s);
      const DistTensor& Y = s.tensor("Y");
      out.conditions["16"] = check_condition_16(f, Y, pts).max_violation;
      const auto c17 = check_condition_17(f, g_of(s), Y, pts);
      out.conditions["17a"] = c17.first.max_violation;
      out.conditions["17b"] = c17.second.max_violation;
      paired(el_gap("nonhomogeneous", s.grid), el_gap("nonhomogeneous", fine_grid));
      const MapPartials x = scenario_map(s, s.grid, opt.analytic);
      out.details["antisymmetricContraction"] =
          antisymmetric_contraction(OmegaKind::Nonhomogeneous, x, h_of(s), g_of(s), Y).max_norm;
      out.details["check"] = "named residual minus the EL of L7";
      break;
    }
    case 3: {
      const DistTensor& Y = s.tensor("Y");
      const auto c = check_condition_22_23(g_of(s), Y, pts);
      out.conditions["22"] = c.first.max_violation;
      out.conditions["23"] = c.second.max_violation;
      out.conditions["24"] = check_condition_24(g_of(s), Y, pts).max_violation;
      paired(el_gap("homogeneous", s.grid), el_gap("homogeneous", fine_grid));
      out.details["check"] = "named residual minus the EL of L8";
      break;
    }
    case 4: {
      run_lift(s, CommandOptions{opt.kind, 4, opt.metric, opt.tol, true, opt.analytic, opt.seed, opt.samples, {}}, out);
      const MapPartials x = scenario_map(s, s.grid, opt.analytic);
      const NormalFrame frame = normal_frame(x, g_of(s), s.orientation);
      out.conditions["frame"] = frame_defect(frame, x, g_of(s));
      out.details["gaussResidual"] = gauss_residual(x, g_of(s), frame).max_norm;
      out.details["check"] = "jet residual of the least-squares Lagrangian along the lift";
      break;
    }
    case 5: {
      const DistTensor& Y = s.tensor("Y");
      out.conditions["36"] = check_condition_36(g_of(s), Y, pts).max_violation;
      paired(el_gap("h0", s.grid), el_gap("h0", fine_grid));
      const MapPartials x = scenario_map(s, s.grid, opt.analytic);
      out.details["antisymmetricContraction"] =
          antisymmetric_contraction(OmegaKind::H0, x, s.metric("h0"), g_of(s), Y).max_norm;
      if (!s.lambda0.empty()) {
        const ConnectionAt L0 = connection_from_exprs(s.lambda0, s.m);
        std::vector<std::vector<double>> tpts;
        for (const auto& p : pts) tpts.emplace_back(p.begin(), p.begin() + s.m);
        out.conditions["ricci"] = verify_h0_ricci(s.metric("h0"), L0, tpts).max_violation;
        out.details["lambda0Display"] = lambda0_display_defect(x, L0).max_norm;
      }
      out.details["check"] = "named residual minus the EL of L9";
      break;
    }
    default:
      throw ScenarioError("verify --theorem must be 1..5");
  }
  out.details["theorem"] = opt.theorem;
}

}  // namespace

const std::vector<std::string>& residual_kinds() {
  static const std::vector<std::string> k = {"harmonic", "ultra-harmonic", "ultra-potential", "potential", "nonhomogeneous",
                                             "homogeneous", "h0", "implicit", "kernel", "gauss"};
  return k;
}

const std::vector<std::string>& energy_kinds() {
  static const std::vector<std::string> k = {"Ef", "EfgT", "EgcX", "L4", "L5", "L6", "L7", "L8", "L9"};
  return k;
}

MapPartials scenario_map(const Scenario& s, const GridSpec& grid, bool analytic) {
  if (!s.map.empty()) return analytic ? analytic_partials(s.map, grid) : grid_partials(sample_map(s.map, grid));
  if (s.map_data) {
    if (!(grid == s.grid)) throw ScenarioError("mapData is tabulated on the scenario grid only; --refine needs map or X");
    MapGrid mg(s.grid, s.n, Provenance::UserSupplied);
    mg.values = *s.map_data;
    return grid_partials(mg);
  }
  if (s.X && s.x0) return grid_partials(integrate_normal_system(*s.X, *s.x0, grid, integration_options(s)).map);
  throw ScenarioError("scenario needs map, mapData, or X with x0");
}

ResidualReport named_residual(const std::string& kind, const MapPartials& x, const Scenario& s) {
  const MetricField g = g_of(s);
  const MetricField h = h_of(s);
  if (kind == "harmonic") return harmonic_residual(x, h, g);
  if (kind == "ultra-harmonic") return ultra_harmonic_residual(x, h, s.metric("f"));
  if (kind == "ultra-potential") return ultra_potential_residual(x, h, g, s.metric("f"), s.tensor("T"));
  if (kind == "potential") return potential_residual(x, h, g, s.tensor("X"), c_of(s));
  if (kind == "nonhomogeneous") return nonhomogeneous_dynamics_residual(x, h, g, s.tensor("Y"), s.tensor("T"));
  if (kind == "homogeneous") return homogeneous_dynamics_residual(x, h, g, s.tensor("Y"));
  if (kind == "h0") return h0_dynamics_residual(x, s.metric("h0"), g, s.tensor("Y"));
  if (kind == "implicit") return implicit_system_residual(x, s.tensor("Y"), s.tensor("T"));
  if (kind == "kernel") return kernel_system_residual(x, kernel_field_from_map(x));
  if (kind == "gauss") return gauss_residual(x, g, normal_frame(x, g, s.orientation));
  throw ScenarioError("unknown residual kind '" + kind + "'");
}

void write_residual_csv(const ResidualReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  const int m = report.grid.dim();
  for (int a = 0; a < m; ++a) os << (a ? "," : "") << 't' << a + 1;
  for (int k = 0; k < report.width; ++k) os << ",r" << k + 1;
  os << '\n';
  char buf[32];
  for (std::size_t k = 0; k < report.nodes.size(); ++k) {
    const auto t = report.grid.coordinates(report.nodes[k]);
    for (int a = 0; a < m; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", t[static_cast<std::size_t>(a)]);
      os << (a ? "," : "") << buf;
    }
    for (double v : report.at(k)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

CommandResult run_command(const std::string& command, const Scenario& scenario, const CommandOptions& options) {
  Outcome out;
  if (command == "christoffel")
    run_christoffel(scenario, options, out);
  else if (command == "curvature")
    run_curvature(scenario, options, out);
  else if (command == "energy")
    run_energy(scenario, options, out);
  else if (command == "residual")
    run_residual(scenario, options, out);
  else if (command == "integrate")
    run_integrate(scenario, options, out);
  else if (command == "gauss")
    run_gauss(scenario, options, out);
  else if (command == "lift")
    run_lift(scenario, options, out);
  else if (command == "verify")
    run_verify(scenario, options, out);
  else
    throw ScenarioError("unknown command '" + command + "'");

  if (!options.dump_csv.empty()) {
    if (!out.has_primary) throw ScenarioError("--dump-csv needs a command that produces a grid residual");
    write_residual_csv(out.primary, options.dump_csv);
  }

  CommandResult result;
  ojson& r = result.report;
  r["command"] = command;
  r["scenarioHash"] = scenario.hash;
  r["seed"] = options.seed.value_or(scenario.seed);
  r["gridSpec"] = grid_json(scenario.grid);
  r["maxNorm"] = out.max_norm;
  r["meanNorm"] = out.mean_norm;
  r["perConditionViolations"] = out.conditions;
  if (!out.pairs.is_null()) r["convergencePairs"] = out.pairs;
  r["details"] = out.details;

  std::optional<double> tol = options.tol;
  if (!tol)
    if (auto it = scenario.tolerances.find("tol"); it != scenario.tolerances.end()) tol = it->second;
  if (tol) {
    bool passed = std::isfinite(out.max_norm) && out.max_norm <= *tol;
    for (const auto& [name, v] : out.conditions.items()) passed = passed && v.is_number() && v.get<double>() <= *tol;
    r["tol"] = *tol;
    r["passed"] = passed;
    result.exit_code = passed ? 0 : 2;
  }
  return result;
}

std::string report_text(const CommandResult& result) { return result.report.dump(2) + "\n"; }

}  // namespace varigeo
