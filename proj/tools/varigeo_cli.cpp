// varigeo: run one command on a scenario file and write a JSON report.
//
// Exit codes: 0 success, 1 error, 2 report failed --tol.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varigeo/commands.hpp"
#include "varigeo/errors.hpp"
#include "varigeo/scenario.hpp"

namespace {

struct Shared {
  std::string scenario;
  std::string out;
  varigeo::CommandOptions opt;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Shared& s) {
  cmd->add_option("scenario", s.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out,-o", s.out, "Write the report here instead of stdout");
  cmd->add_option("--tol", s.tol, "Fail (exit 2) when maxNorm or a condition exceeds this");
  cmd->add_flag("--refine", s.opt.refine, "Also run at 2*points-1 and report the ratio");
  cmd->add_option("--seed", s.seed, "Seed for sampled condition checks (default: scenario seed)");
  cmd->add_option("--samples", s.opt.samples, "Number of sample points")->check(CLI::Range(1, 1000000));
  cmd->add_option("--dump-csv", s.opt.dump_csv, "Write per-node residuals as CSV");
  cmd->add_flag("--analytic", s.opt.analytic, "Use exact partials of the analytic map");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational geometry checks on scenario files"};
  app.require_subcommand(1);
  Shared s;

  for (const auto& name : varigeo::command_names()) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, s);
    if (name == "christoffel" || name == "curvature")
      cmd->add_option("--metric", s.opt.metric, "Metric name (h, g, f, h0, gamma)");
    if (name == "residual")
      cmd->add_option("--kind", s.opt.kind, "Residual kind")->required()->check(CLI::IsMember(varigeo::residual_kinds()));
    if (name == "energy") cmd->add_option("--kind", s.opt.kind, "Energy kind")->check(CLI::IsMember(varigeo::energy_kinds()));
    if (name == "verify") cmd->add_option("--theorem", s.opt.theorem, "Theorem 1..5")->required()->check(CLI::Range(1, 5));
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* cmd = app.get_subcommands().front();
  if (cmd->count("--tol")) s.opt.tol = s.tol;
  if (cmd->count("--seed")) s.opt.seed = s.seed;

  try {
    const varigeo::Scenario scenario = varigeo::load_scenario(s.scenario);
    const varigeo::CommandResult result = varigeo::run_command(cmd->get_name(), scenario, s.opt);
    const std::string text = varigeo::report_text(result);
    if (s.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream os(s.out, std::ios::binary);
      if (!os) throw varigeo::Error("cannot write " + s.out);
      os << text;
    }
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "varigeo " << cmd->get_name() << ": " << e.what() << '\n';
    return 1;
  }
}
