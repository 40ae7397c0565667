// Command-line front end: single solves, spatial convergence studies,
// temporal-order studies and superconvergence studies, with CSV/JSON output.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hho/analysis.hpp"
#include "hho/assembly.hpp"
#include "hho/solver.hpp"
#include "hho/timeloop.hpp"

namespace {

struct CommonOpts {
  std::string family = "triangular";
  double distortion = 0.3;
  int k = 1;
  double T = 1.0;
  int threads = 1;
  std::string problem = "default";
  std::string config;  // consumed by expand_config_args before the parse
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config,
                  "Config file (key = value lines); flags take precedence");
  cmd->add_option("--family", opts.family, "Mesh family: triangular, distorted_quad, hexagonal");
  cmd->add_option("--distortion", opts.distortion, "Distortion for distorted_quad, in [0,1)")
      ->check(CLI::Range(0.0, 0.999));
  cmd->add_option("--k", opts.k, "Polynomial degree")->required()->check(CLI::Range(0, 3));
  cmd->add_option("--T", opts.T, "Final time")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", opts.threads, "Per-cell parallelism cap")->check(CLI::Range(1, 256));
  cmd->add_option("--problem", opts.problem, "Manufactured problem: default or zero");
}

// Reads `key = value` lines from the file named by a --config argument and
// appends them as --key value tokens for any key not already given as a
// flag, so explicit flags always win.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) continue;
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (given) continue;
    args.push_back(flag);
    std::istringstream vs(value);  // multi-valued keys split on whitespace
    std::string tok;
    while (vs >> tok) args.push_back(tok);
  }
  return args;
}

hho::ManufacturedProblem pick_problem(const std::string& name) {
  if (name == "default") return hho::default_problem();
  if (name == "zero") return hho::zero_problem();
  throw CLI::ValidationError("--problem", "expected 'default' or 'zero'");
}

std::vector<int> refinement_ladder(int base, int count) {
  std::vector<int> levels;
  for (int i = 0, n = base; i < count; ++i, n *= 2) levels.push_back(n);
  return levels;
}

void write_stability_csv(const std::vector<hho::StabilityRow>& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "step,t,l2_cell_norm,energy_half_norm\n";
  out.precision(12);
  out << std::scientific;
  for (const auto& r : log)
    out << r.step << "," << r.t << "," << r.l2_cell << "," << r.energy_half << "\n";
}

int run_convergence(const CommonOpts& opts, hho::TauRule rule, double tau_const,
                    double tau_fixed, int base, int count, const std::vector<int>& levels,
                    const std::string& out_csv, const std::string& out_json) {
  hho::StudyConfig cfg;
  cfg.family = hho::parse_family(opts.family);
  cfg.distortion = opts.distortion;
  cfg.k = opts.k;
  cfg.refinements = levels.empty() ? refinement_ladder(base, count) : levels;
  cfg.rule = rule;
  cfg.tau_constant = tau_const;
  cfg.tau_fixed = tau_fixed;
  cfg.T = opts.T;
  cfg.threads = opts.threads;

  const hho::ConvergenceReport report = hho::convergence_study(cfg, pick_problem(opts.problem));
  hho::print_table(report, std::cout);
  if (!out_csv.empty()) hho::write_csv(report, out_csv);
  if (!out_json.empty()) hho::write_json(report, out_json);
  return 0;
}

int run_temporal(const CommonOpts& opts, int n, std::vector<double> taus,
                 const std::string& out_csv) {
  const hho::TemporalStudy study =
      hho::temporal_study(hho::parse_family(opts.family), opts.distortion, n, opts.k, opts.T,
                          taus, pick_problem(opts.problem), opts.threads);
  std::cout << "# family=" << opts.family << " n=" << n << " k=" << opts.k << " h=" << study.h
            << "\n";
  std::cout << "tau            l2_error\n";
  std::cout.precision(6);
  std::cout << std::scientific;
  for (const auto& r : study.rows) std::cout << r.tau << "   " << r.l2_error << "\n";
  if (study.slope)
    std::cout << "least-squares slope: " << *study.slope << "\n";
  else
    std::cout << "least-squares slope: undefined (fewer than 2 nonzero errors)\n";
  if (!out_csv.empty()) hho::write_temporal_csv(study, out_csv);
  return 0;
}

int run_solve(const CommonOpts& opts, const std::string& mesh_file, int n, int steps,
              double tau, const std::string& dump_prefix, const std::string& stability_path) {
  const hho::Mesh mesh = mesh_file.empty()
                             ? hho::generate(hho::parse_family(opts.family), n, opts.distortion)
                             : hho::load_mesh_file(mesh_file);
  const hho::ManufacturedProblem problem = pick_problem(opts.problem);

  int M = steps;
  if (M <= 0) {
    const double t = tau > 0 ? tau : 0.1;
    M = std::max(1, static_cast<int>(std::ceil(opts.T / t - 1e-12)));
  }
  const hho::TimeGrid grid{opts.T, M};

  const hho::GlobalSystem sys = hho::assemble_global(mesh, opts.k, opts.threads);
  const hho::CondensedSolver solver(sys, grid.tau());
  const hho::TimeLoop loop(mesh, sys, solver, grid, problem.initial, problem.forcing, true,
                           opts.threads);

  std::vector<hho::StabilityRow> log;
  const hho::TimeState state = loop.run(stability_path.empty() ? nullptr : &log);

  if (!dump_prefix.empty()) {
    hho::dump_mass_coordinate_format(sys, dump_prefix + "M_KK.txt");
    hho::dump_coordinate_format(sys.A_KK, dump_prefix + "A_KK.txt");
    hho::dump_coordinate_format(sys.A_KF, dump_prefix + "A_KF.txt");
    hho::dump_coordinate_format(hho::SpMat(sys.A_KF.transpose()), dump_prefix + "A_FK.txt");
    hho::dump_coordinate_format(sys.A_FF, dump_prefix + "A_FF.txt");
  }
  if (!stability_path.empty()) write_stability_csv(log, stability_path);

  const double l2 = hho::l2_error(mesh, sys.dofs, state.P, problem.exact, opts.T);
  const hho::EnergyError ee = hho::energy_error(mesh, sys, state.P, problem, opts.T);
  std::cout.precision(6);
  std::cout << std::scientific;
  std::cout << "cells:         " << mesh.n_cells() << "\n"
            << "h:             " << mesh.size() << "\n"
            << "cell dofs:     " << sys.dofs.cell_dofs << "\n"
            << "face dofs:     " << sys.dofs.face_dofs << "\n"
            << "tau:           " << grid.tau() << " (" << M << " steps)\n"
            << "l2 error:      " << l2 << "\n"
            << "energy error:  " << ee.discrete << "\n"
            << "recon error:   " << ee.reconstruction << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equal-order HHO solver for the parabolic integro-differential equation "
               "p_t - lap p - int_0^t lap p = f on polygonal meshes"};
  app.require_subcommand(1);

  CommonOpts conv_opts, sup_opts, temp_opts, solve_opts;

  auto* conv = app.add_subcommand("convergence", "Spatial convergence study");
  add_common(conv, conv_opts);
  std::string conv_tau = "coupled";
  double conv_tau_const = 10.0, conv_tau_fixed = 0.1;
  int conv_base = 8, conv_count = 4;
  std::vector<int> conv_levels;
  std::string conv_csv, conv_json;
  conv->add_option("--tau", conv_tau, "Tau rule: sqrt_h, coupled, superconv, fixed");
  conv->add_option("--tau-const", conv_tau_const, "c in tau = c h^p");
  conv->add_option("--tau-value", conv_tau_fixed, "tau for the fixed rule");
  conv->add_option("--n0", conv_base, "Coarsest subdivision count")->check(CLI::PositiveNumber);
  conv->add_option("--refine", conv_count, "Number of refinement levels (doubling ladder)")
      ->check(CLI::PositiveNumber);
  conv->add_option("--levels", conv_levels, "Explicit subdivision counts (overrides ladder)");
  conv->add_option("--out", conv_csv, "CSV output path");
  conv->add_option("--json", conv_json, "JSON output path");

  auto* sup = app.add_subcommand("superconv", "L2 superconvergence study (tau = c h^{(k+2)/2})");
  sup_opts.family = "distorted_quad";
  add_common(sup, sup_opts);
  double sup_tau_const = 10.0;
  int sup_base = 8, sup_count = 4;
  std::vector<int> sup_levels;
  std::string sup_csv, sup_json;
  sup->add_option("--tau-const", sup_tau_const, "c in tau = c h^{(k+2)/2}");
  sup->add_option("--n0", sup_base, "Coarsest subdivision count")->check(CLI::PositiveNumber);
  sup->add_option("--refine", sup_count, "Number of refinement levels (doubling ladder)")
      ->check(CLI::PositiveNumber);
  sup->add_option("--levels", sup_levels, "Explicit subdivision counts (overrides ladder)");
  sup->add_option("--out", sup_csv, "CSV output path");
  sup->add_option("--json", sup_json, "JSON output path");

  auto* temp = app.add_subcommand("temporal", "Temporal-order study on a fixed mesh");
  add_common(temp, temp_opts);
  int temp_n = 64;
  std::vector<double> temp_taus = {0.2, 0.1, 0.05, 0.025};
  std::string temp_csv;
  temp->add_option("--n", temp_n, "Subdivision count of the fixed mesh")
      ->check(CLI::PositiveNumber);
  temp->add_option("--taus", temp_taus, "Time steps to sweep");
  temp->add_option("--out", temp_csv, "CSV output path (log-log pairs)");

  auto* solve = app.add_subcommand("solve", "One mesh, one run");
  add_common(solve, solve_opts);
  std::string solve_mesh;
  int solve_n = 16, solve_steps = 0;
  double solve_tau = 0.0;
  std::string solve_dump, solve_stab;
  solve->add_option("--mesh", solve_mesh, "Mesh file (poly2d format)");
  solve->add_option("--n", solve_n, "Subdivision count when generating")
      ->check(CLI::PositiveNumber);
  solve->add_option("--steps", solve_steps, "Number of time steps");
  solve->add_option("--tau", solve_tau, "Time step (steps derived; T divided exactly)");
  solve->add_option("--dump-matrices", solve_dump,
                    "Write sparse blocks in coordinate format with this path prefix");
  solve->add_option("--log-stability", solve_stab, "Write the per-step stability log CSV here");

  std::vector<std::string> args;
  try {
    args = expand_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    // CLI11 expects reversed argument order for the vector overload.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (conv->parsed())
      return run_convergence(conv_opts, hho::parse_tau_rule(conv_tau), conv_tau_const,
                             conv_tau_fixed, conv_base, conv_count, conv_levels, conv_csv,
                             conv_json);
    if (sup->parsed())
      return run_convergence(sup_opts, hho::TauRule::superconv, sup_tau_const, 0.1, sup_base,
                             sup_count, sup_levels, sup_csv, sup_json);
    if (temp->parsed()) return run_temporal(temp_opts, temp_n, temp_taus, temp_csv);
    if (solve->parsed())
      return run_solve(solve_opts, solve_mesh, solve_n, solve_steps, solve_tau, solve_dump,
                       solve_stab);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
