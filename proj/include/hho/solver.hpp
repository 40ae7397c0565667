// Static condensation for the time-stepping system S = M + (tau/2 + tau^2/4) A:
// per-cell Cholesky factors of the block-diagonal cell part, an explicit
// sparse Schur complement on the interior-face unknowns, and the two-phase
// solve that recovers cell unknowns by back-substitution.
//
// The time step is constant across a run, so the factorizations are built
// once and only right-hand sides change.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <utility>
#include <vector>

#include "hho/assembly.hpp"

namespace hho {

enum class SolverBackend { direct, cg };

class CondensedSolver {
 public:
  /// Factors S_KK cell blocks and the Schur complement
  /// S_FF - S_FK S_KK^{-1} S_KF. Throws if a cell block is not SPD.
  /// With memory_term = false the tau^2/4 memory weight is dropped and the
  /// system is the plain Crank-Nicolson heat operator M + (tau/2) A.
  CondensedSolver(const GlobalSystem& sys, double tau,
                  SolverBackend backend = SolverBackend::direct, bool memory_term = true);

  /// Solves the full block system for split right-hand sides.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve(const Eigen::VectorXd& rhs_cell,
                                                    const Eigen::VectorXd& rhs_face) const;

  /// Same, with the right-hand side and result as one hybrid vector.
  HybridVector solve(const HybridVector& rhs) const;

  double tau() const { return tau_; }
  double alpha() const { return alpha_; }
  const SpMat& schur() const { return schur_; }

  /// Cell-block solve z = S_KK^{-1} x (x over cell dofs only).
  Eigen::VectorXd cell_block_solve(const Eigen::VectorXd& x) const;

 private:
  const GlobalSystem& sys_;
  double tau_ = 0.0;
  double alpha_ = 0.0;  // tau/2 + tau^2/4
  SolverBackend backend_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> cell_factor_;
  SpMat schur_;
  std::unique_ptr<Eigen::SimplicialLLT<SpMat>> direct_;
  std::unique_ptr<Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper>> cg_;
};

}  // namespace hho
