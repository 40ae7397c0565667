#include "hho/timeloop.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hho {

TimeLoop::TimeLoop(const Mesh& mesh, const GlobalSystem& sys, const CondensedSolver& solver,
                   const TimeGrid& grid, ScalarField initial, TimeField forcing,
                   bool memory_term, int threads)
    : mesh_(mesh),
      sys_(sys),
      solver_(solver),
      grid_(grid),
      initial_(std::move(initial)),
      forcing_(std::move(forcing)),
      memory_term_(memory_term),
      threads_(threads) {
  if (grid_.steps < 0) throw std::invalid_argument("TimeLoop: negative step count");
  if (grid_.steps == 0) return;  // init-only use; the solver is never invoked
  const double tau = grid_.tau();
  const double alpha = memory_term_ ? 0.5 * tau + 0.25 * tau * tau : 0.5 * tau;
  if (std::abs(solver_.alpha() - alpha) > 1e-14 * std::max(1.0, alpha))
    throw std::invalid_argument("TimeLoop: solver was factored for a different system");
}

HybridVector TimeLoop::load_at(double t) const {
  return assemble_load([this, t](const Vec2& x) { return forcing_(x, t); }, mesh_, sys_.dofs,
                       -1, threads_);
}

TimeState TimeLoop::init() const {
  TimeState s;
  s.n = 0;
  s.P = interpolate(initial_, mesh_, sys_.dofs);
  s.memory_sum = HybridVector::Zero(sys_.dofs.total());
  s.F_prev = load_at(0.0);
  return s;
}

void TimeLoop::step(TimeState& state) const {
  if (state.n >= grid_.steps) throw std::logic_error("step: already at the final time");
  const double tau = grid_.tau();

  const HybridVector F_next = load_at(grid_.node(state.n + 1));

  HybridVector rhs = 0.5 * tau * (F_next + state.F_prev) + sys_.apply_M(state.P);
  if (memory_term_) {
    const double alpha = 0.5 * tau + 0.25 * tau * tau;
    rhs -= sys_.apply_A(alpha * state.P + 0.5 * tau * tau * state.memory_sum);
  } else {
    // Pure heat-equation mode: plain Crank-Nicolson, no memory operator.
    rhs -= 0.5 * tau * sys_.apply_A(state.P);
  }

  HybridVector P_next;
  try {
    P_next = solver_.solve(rhs);
  } catch (const std::exception& e) {
    throw std::runtime_error("time step " + std::to_string(state.n + 1) +
                             " failed: " + e.what());
  }

  state.memory_sum += P_next + state.P;
  state.P = std::move(P_next);
  state.F_prev = F_next;
  ++state.n;
}

TimeState TimeLoop::run(std::vector<StabilityRow>* log,
                        std::vector<HybridVector>* trajectory) const {
  TimeState state = init();
  if (log) {
    log->clear();
    log->push_back({0, 0.0, sys_.l2_cell_norm(state.P), 0.0});
  }
  if (trajectory) {
    trajectory->clear();
    trajectory->push_back(state.P);
  }
  for (int n = 0; n < grid_.steps; ++n) {
    const HybridVector prev = log ? state.P : HybridVector();
    step(state);
    if (log)
      log->push_back({state.n, grid_.node(state.n), sys_.l2_cell_norm(state.P),
                      sys_.energy_norm(half_step(state.P, prev))});
    if (trajectory) trajectory->push_back(state.P);
  }
  return state;
}

double projected_load_norm(const GlobalSystem& sys, const HybridVector& load) {
  double sq = 0.0;
  for (int c = 0; c < sys.dofs.cells; ++c) {
    const auto f = load.segment(sys.dofs.cell_offset(c), sys.dofs.n_cell);
    sq += f.dot(sys.local[c].M_cell.ldlt().solve(f));
  }
  return std::sqrt(std::max(0.0, sq));
}

}  // namespace hho
