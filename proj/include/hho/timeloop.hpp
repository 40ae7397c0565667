// Crank-Nicolson time stepping for the parabolic problem with a Volterra
// memory term. Each step solves
//
//   (M + (tau/2 + tau^2/4) A) P^{n+1}
//     = (tau/2)(F^{n+1} + F^n) + (M - (tau/2 + tau^2/4) A) P^n
//       - (tau^2/2) A sum_{j<n} (P^{j+1} + P^j),
//
// where the composite-trapezoidal memory sum is carried by an O(1)-per-step
// running accumulator. The system matrix is constant across steps, so the
// condensed solver is factored once per run.

#pragma once

#include <functional>
#include <vector>

#include "hho/assembly.hpp"
#include "hho/solver.hpp"

namespace hho {

using TimeField = std::function<double(const Vec2&, double)>;

struct TimeGrid {
  double T = 1.0;
  int steps = 1;  // M

  double tau() const { return T / steps; }
  /// t_n = n tau, with the final node pinned to T.
  double node(int n) const { return n == steps ? T : n * tau(); }
};

struct TimeState {
  int n = 0;
  HybridVector P;
  HybridVector memory_sum;  // sum_{j=0}^{n-1} (P^{j+1} + P^j)
  HybridVector F_prev;      // load at t_n
};

/// One stability-log row per time node.
struct StabilityRow {
  int step = 0;
  double t = 0.0;
  double l2_cell = 0.0;      // ||P^n||
  double energy_half = 0.0;  // ||(P^n + P^{n-1})/2||_{1,h}, 0 at n = 0
};

class TimeLoop {
 public:
  TimeLoop(const Mesh& mesh, const GlobalSystem& sys, const CondensedSolver& solver,
           const TimeGrid& grid, ScalarField initial, TimeField forcing,
           bool memory_term = true, int threads = 1);

  /// P^0 = hybrid interpolant of the initial datum; empty history.
  TimeState init() const;

  /// Advances the state from t_n to t_{n+1}.
  void step(TimeState& state) const;

  /// Runs all steps from init(). Optionally records the stability log and,
  /// when a trajectory sink is given, every iterate P^0..P^M (off by
  /// default: the accumulator removes any need for history).
  TimeState run(std::vector<StabilityRow>* log = nullptr,
                std::vector<HybridVector>* trajectory = nullptr) const;

  const TimeGrid& grid() const { return grid_; }

 private:
  HybridVector load_at(double t) const;

  const Mesh& mesh_;
  const GlobalSystem& sys_;
  const CondensedSolver& solver_;
  TimeGrid grid_;
  ScalarField initial_;
  TimeField forcing_;
  bool memory_term_;
  int threads_;
};

/// Crank-Nicolson mean of two consecutive states.
inline HybridVector half_step(const HybridVector& next, const HybridVector& prev) {
  return 0.5 * (next + prev);
}

/// Difference quotient (next - prev)/tau.
inline HybridVector difference_quotient(const HybridVector& next, const HybridVector& prev,
                                        double tau) {
  return (next - prev) / tau;
}

/// sqrt(F^T M^{-1} F): the L2 norm of the cell-projected load.
double projected_load_norm(const GlobalSystem& sys, const HybridVector& load);

}  // namespace hho
