// Error measurement against exact solutions, empirical orders of convergence
// and the convergence-study drivers that produce the rate tables.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hho/assembly.hpp"
#include "hho/timeloop.hpp"

namespace hho {

/// Space-time exact solution with everything needed to run and to measure.
struct ManufacturedProblem {
  std::string name;
  TimeField exact;                                      // p(x, t)
  TimeField exact_dt;                                   // p_t
  std::function<Vec2(const Vec2&, double)> exact_grad;  // grad p
  TimeField forcing;                                    // f = p_t - lap p - int_0^t lap p
  ScalarField initial;                                  // g = p(., 0)
};

/// p = exp(-t) sin(pi x) sin(pi y) on the unit square, which gives
/// f = (2 pi^2 - exp(-t)) sin(pi x) sin(pi y).
ManufacturedProblem default_problem();

/// Identically zero solution (all-zero data).
ManufacturedProblem zero_problem();

/// sqrt(sum_K ||p(., t) - P_K||_K^2) with elevated quadrature (2k+4 by
/// default); uses the cell component only.
double l2_error(const Mesh& mesh, const DofMap& dofs, const HybridVector& P,
                const TimeField& exact, double t, int quad_degree = -1);

struct EnergyError {
  double discrete = 0.0;        // || I_h p(., t) - P ||_{1,h}
  double reconstruction = 0.0;  // sqrt(sum_K ||grad p - grad R_K P||_K^2)
};
EnergyError energy_error(const Mesh& mesh, const GlobalSystem& sys, const HybridVector& P,
                         const ManufacturedProblem& problem, double t);

/// Pairwise orders log(E_i/E_{i+1}) / log(h_i/h_{i+1}); element i corresponds
/// to the refinement pair (i, i+1).
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// Least-squares slope of log(y) against log(x).
double log_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class TauRule { sqrt_h, coupled, superconv, fixed };
TauRule parse_tau_rule(const std::string& name);
std::string tau_rule_name(TauRule rule);

struct StudyConfig {
  MeshFamily family = MeshFamily::triangular;
  double distortion = 0.3;
  int k = 1;
  std::vector<int> refinements;  // subdivision counts, one run each
  TauRule rule = TauRule::coupled;
  double tau_constant = 10.0;  // c in tau = c h^p
  double tau_fixed = 0.1;      // for TauRule::fixed
  double T = 1.0;
  int threads = 1;
  bool log_stability = false;
};

/// tau from the rule, then shrunk to the nearest divisor of T so the final
/// node lands exactly on T. Returns the step count M.
int pick_steps(TauRule rule, double tau_constant, double tau_fixed, int k, double h, double T);

struct ReportRow {
  double h = 0.0;
  double tau = 0.0;
  Eigen::Index ndofs = 0;
  double l2_error = 0.0;
  double l2_order = 0.0;  // NaN on the first row
  double energy_error = 0.0;
  double energy_order = 0.0;
  double recon_error = 0.0;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<ReportRow> rows;
  std::vector<std::vector<StabilityRow>> stability;  // per refinement when logged
};

ConvergenceReport convergence_study(const StudyConfig& cfg,
                                    const ManufacturedProblem& problem = default_problem());

/// CSV with header h,tau,ndofs,l2_error,l2_order,energy_error,energy_order.
void write_csv(const ConvergenceReport& report, const std::string& path);
/// JSON with a metadata block and the rows (includes the reconstruction error).
void write_json(const ConvergenceReport& report, const std::string& path);
/// Aligned table on the given stream.
void print_table(const ConvergenceReport& report, std::ostream& out);

struct TemporalRow {
  double tau = 0.0;
  double l2_error = 0.0;
};
struct TemporalStudy {
  int n = 0;
  int k = 0;
  double h = 0.0;
  std::vector<TemporalRow> rows;
  std::optional<double> slope;  // absent with fewer than 2 usable rows
};

/// Fixed mesh, tau sweep; errors at the final time T.
TemporalStudy temporal_study(MeshFamily family, double distortion, int n, int k, double T,
                             const std::vector<double>& taus,
                             const ManufacturedProblem& problem = default_problem(),
                             int threads = 1);
void write_temporal_csv(const TemporalStudy& study, const std::string& path);

}  // namespace hho
