#include "hho/analysis.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hho/quadrature.hpp"

namespace hho {

ManufacturedProblem default_problem() {
  const double pi = std::acos(-1.0);
  ManufacturedProblem p;
  p.name = "exp(-t) sin(pi x) sin(pi y)";
  p.exact = [pi](const Vec2& x, double t) {
    return std::exp(-t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  p.exact_dt = [pi](const Vec2& x, double t) {
    return -std::exp(-t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  p.exact_grad = [pi](const Vec2& x, double t) {
    const double e = std::exp(-t);
    return Vec2(pi * e * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                pi * e * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  // lap p = -2 pi^2 p and int_0^t exp(-s) ds = 1 - exp(-t), so
  // f = p_t - lap p - int lap p = (2 pi^2 - exp(-t)) sin(pi x) sin(pi y).
  p.forcing = [pi](const Vec2& x, double t) {
    return (2.0 * pi * pi - std::exp(-t)) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  p.initial = [pi](const Vec2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  return p;
}

ManufacturedProblem zero_problem() {
  ManufacturedProblem p;
  p.name = "zero";
  p.exact = [](const Vec2&, double) { return 0.0; };
  p.exact_dt = [](const Vec2&, double) { return 0.0; };
  p.exact_grad = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  p.forcing = [](const Vec2&, double) { return 0.0; };
  p.initial = [](const Vec2&) { return 0.0; };
  return p;
}

double l2_error(const Mesh& mesh, const DofMap& dofs, const HybridVector& P,
                const TimeField& exact, double t, int quad_degree) {
  const int qd = quad_degree < 0 ? 2 * dofs.k + 4 : quad_degree;
  double sq = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBasis basis = make_cell_basis(mesh, c, dofs.k);
    const QuadratureRule rule = cell_rule(mesh, c, qd);
    const Eigen::VectorXd ph =
        basis.eval(rule.points) * P.segment(dofs.cell_offset(c), dofs.n_cell);
    for (int q = 0; q < rule.size(); ++q) {
      const double d = exact(rule.point(q), t) - ph[q];
      sq += rule.weights[q] * d * d;
    }
  }
  return std::sqrt(sq);
}

EnergyError energy_error(const Mesh& mesh, const GlobalSystem& sys, const HybridVector& P,
                         const ManufacturedProblem& problem, double t) {
  EnergyError err;
  const auto p_t = [&](const Vec2& x) { return problem.exact(x, t); };
  err.discrete = sys.energy_norm(interpolate(p_t, mesh, sys.dofs) - P);

  const int k = sys.dofs.k;
  double sq = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Eigen::VectorXd rec = sys.local[c].R * sys.gather(c, P);
    const CellBasis high = make_cell_basis(mesh, c, k + 1);
    const QuadratureRule rule = cell_rule(mesh, c, 2 * k + 4);
    const auto [gx, gy] = high.eval_grad(rule.points);
    const Eigen::VectorXd rx = gx * rec;
    const Eigen::VectorXd ry = gy * rec;
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 g = problem.exact_grad(rule.point(q), t);
      const Vec2 d(g.x() - rx[q], g.y() - ry[q]);
      sq += rule.weights[q] * d.squaredNorm();
    }
  }
  err.reconstruction = std::sqrt(sq);
  return err;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2)
    throw std::invalid_argument("eoc: need equally many errors and mesh sizes (at least 2)");
  std::vector<double> orders;
  orders.reserve(errors.size() - 1);
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] <= 0.0 || errors[i + 1] <= 0.0 || hs[i] <= 0.0 || hs[i + 1] <= 0.0)
      throw std::invalid_argument("eoc: errors and mesh sizes must be positive");
    orders.push_back(std::log(errors[i + 1] / errors[i]) / std::log(hs[i + 1] / hs[i]));
  }
  return orders;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("log_slope: need at least two points");
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TauRule parse_tau_rule(const std::string& name) {
  if (name == "sqrt_h") return TauRule::sqrt_h;
  if (name == "coupled") return TauRule::coupled;
  if (name == "superconv") return TauRule::superconv;
  if (name == "fixed") return TauRule::fixed;
  throw std::invalid_argument("unknown tau rule '" + name +
                              "' (expected sqrt_h, coupled, superconv or fixed)");
}

std::string tau_rule_name(TauRule rule) {
  switch (rule) {
    case TauRule::sqrt_h: return "sqrt_h";
    case TauRule::coupled: return "coupled";
    case TauRule::superconv: return "superconv";
    case TauRule::fixed: return "fixed";
  }
  return "?";
}

int pick_steps(TauRule rule, double tau_constant, double tau_fixed, int k, double h, double T) {
  double tau = 0.0;
  switch (rule) {
    case TauRule::sqrt_h: tau = std::sqrt(h); break;
    case TauRule::coupled: tau = tau_constant * std::pow(h, 0.5 * (k + 1)); break;
    case TauRule::superconv: tau = tau_constant * std::pow(h, 0.5 * (k + 2)); break;
    case TauRule::fixed: tau = tau_fixed; break;
  }
  if (tau <= 0.0) throw std::invalid_argument("pick_steps: nonpositive tau");
  return std::max(1, static_cast<int>(std::ceil(T / tau - 1e-12)));
}

ConvergenceReport convergence_study(const StudyConfig& cfg, const ManufacturedProblem& problem) {
  if (cfg.refinements.empty())
    throw std::invalid_argument("convergence_study: refinement list is empty");
  ConvergenceReport report;
  report.config = cfg;

  for (int n : cfg.refinements) {
    const Mesh mesh = generate(cfg.family, n, cfg.distortion);
    const double h = mesh.size();
    const int steps = pick_steps(cfg.rule, cfg.tau_constant, cfg.tau_fixed, cfg.k, h, cfg.T);
    const TimeGrid grid{cfg.T, steps};

    const GlobalSystem sys = assemble_global(mesh, cfg.k, cfg.threads);
    const CondensedSolver solver(sys, grid.tau());
    const TimeLoop loop(mesh, sys, solver, grid, problem.initial, problem.forcing, true,
                        cfg.threads);

    std::vector<StabilityRow> log;
    const TimeState state = loop.run(cfg.log_stability ? &log : nullptr);
    if (cfg.log_stability) report.stability.push_back(std::move(log));

    ReportRow row;
    row.h = h;
    row.tau = grid.tau();
    row.ndofs = sys.n();
    row.l2_error = l2_error(mesh, sys.dofs, state.P, problem.exact, cfg.T);
    const EnergyError ee = energy_error(mesh, sys, state.P, problem, cfg.T);
    row.energy_error = ee.discrete;
    row.recon_error = ee.reconstruction;
    row.l2_order = std::numeric_limits<double>::quiet_NaN();
    row.energy_order = std::numeric_limits<double>::quiet_NaN();
    if (!report.rows.empty()) {
      const ReportRow& prev = report.rows.back();
      const double dh = std::log(row.h / prev.h);
      if (prev.l2_error > 0 && row.l2_error > 0)
        row.l2_order = std::log(row.l2_error / prev.l2_error) / dh;
      if (prev.energy_error > 0 && row.energy_error > 0)
        row.energy_order = std::log(row.energy_error / prev.energy_error) / dh;
    }
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::string fmt_order(double v) {
  if (std::isnan(v)) return "---";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

}  // namespace

void write_csv(const ConvergenceReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF endings on every platform
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "h,tau,ndofs,l2_error,l2_order,energy_error,energy_order\n";
  out << std::scientific << std::setprecision(12);
  for (const ReportRow& r : report.rows) {
    out << r.h << "," << r.tau << "," << r.ndofs << "," << r.l2_error << ",";
    if (!std::isnan(r.l2_order)) out << r.l2_order;
    out << "," << r.energy_error << ",";
    if (!std::isnan(r.energy_order)) out << r.energy_order;
    out << "\n";
  }
}

void write_json(const ConvergenceReport& report, const std::string& path) {
  nlohmann::json j;
  j["family"] = family_name(report.config.family);
  j["distortion"] = report.config.distortion;
  j["k"] = report.config.k;
  j["T"] = report.config.T;
  j["tau_rule"] = tau_rule_name(report.config.rule);
  j["tau_constant"] = report.config.tau_constant;
  j["refinements"] = report.config.refinements;
  j["rows"] = nlohmann::json::array();
  for (const ReportRow& r : report.rows) {
    nlohmann::json row;
    row["h"] = r.h;
    row["tau"] = r.tau;
    row["ndofs"] = r.ndofs;
    row["l2_error"] = r.l2_error;
    row["energy_error"] = r.energy_error;
    row["recon_error"] = r.recon_error;
    if (!std::isnan(r.l2_order)) row["l2_order"] = r.l2_order;
    if (!std::isnan(r.energy_order)) row["energy_order"] = r.energy_order;
    j["rows"].push_back(row);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

void print_table(const ConvergenceReport& report, std::ostream& out) {
  out << "# family=" << family_name(report.config.family) << " k=" << report.config.k
      << " T=" << report.config.T << " tau_rule=" << tau_rule_name(report.config.rule) << "\n";
  out << std::setw(12) << "h" << std::setw(12) << "tau" << std::setw(10) << "ndofs"
      << std::setw(14) << "l2_error" << std::setw(8) << "order" << std::setw(14)
      << "energy_error" << std::setw(8) << "order" << std::setw(14) << "recon_error" << "\n";
  for (const ReportRow& r : report.rows) {
    out << std::setw(12) << std::scientific << std::setprecision(3) << r.h << std::setw(12)
        << r.tau << std::setw(10) << r.ndofs << std::setw(14) << r.l2_error << std::setw(8)
        << fmt_order(r.l2_order) << std::setw(14) << r.energy_error << std::setw(8)
        << fmt_order(r.energy_order) << std::setw(14) << r.recon_error << "\n";
  }
}

TemporalStudy temporal_study(MeshFamily family, double distortion, int n, int k, double T,
                             const std::vector<double>& taus,
                             const ManufacturedProblem& problem, int threads) {
  if (taus.empty()) throw std::invalid_argument("temporal_study: tau list is empty");
  TemporalStudy study;
  study.n = n;
  study.k = k;

  const Mesh mesh = generate(family, n, distortion);
  study.h = mesh.size();
  const GlobalSystem sys = assemble_global(mesh, k, threads);

  for (double tau : taus) {
    const int steps = std::max(1, static_cast<int>(std::ceil(T / tau - 1e-12)));
    const TimeGrid grid{T, steps};
    const CondensedSolver solver(sys, grid.tau());
    const TimeLoop loop(mesh, sys, solver, grid, problem.initial, problem.forcing, true,
                        threads);
    const TimeState state = loop.run();
    study.rows.push_back({grid.tau(), l2_error(mesh, sys.dofs, state.P, problem.exact, T)});
  }

  std::vector<double> xs, ys;
  for (const TemporalRow& r : study.rows) {
    if (r.l2_error > 0.0) {
      xs.push_back(r.tau);
      ys.push_back(r.l2_error);
    }
  }
  if (xs.size() >= 2) study.slope = log_slope(xs, ys);
  return study;
}

void write_temporal_csv(const TemporalStudy& study, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "tau,l2_error,log10_tau,log10_l2_error\n";
  out << std::scientific << std::setprecision(12);
  for (const TemporalRow& r : study.rows) {
    out << r.tau << "," << r.l2_error << "," << std::log10(r.tau) << ",";
    if (r.l2_error > 0.0)
      out << std::log10(r.l2_error);
    out << "\n";
  }
}

}  // namespace hho
