#include "hho/solver.hpp"

#include <stdexcept>
#include <string>

namespace hho {

CondensedSolver::CondensedSolver(const GlobalSystem& sys, double tau, SolverBackend backend,
                                 bool memory_term)
    : sys_(sys),
      tau_(tau),
      alpha_(memory_term ? 0.5 * tau + 0.25 * tau * tau : 0.5 * tau),
      backend_(backend) {
  if (tau <= 0.0) throw std::invalid_argument("CondensedSolver: tau must be positive");
  const DofMap& dofs = sys.dofs;

  cell_factor_.resize(dofs.cells);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < dofs.cells; ++c) {
    const LocalOperators& ops = sys.local[c];
    const LocalDofLayout& layout = ops.layout;
    const int nc = layout.n_cell;

    const Eigen::MatrixXd s_cc = ops.M_cell + alpha_ * ops.B_local.topLeftCorner(nc, nc);
    cell_factor_[c].compute(s_cc);
    if (cell_factor_[c].info() != Eigen::Success)
      throw std::runtime_error("cell block " + std::to_string(c) + " is not SPD");

    // Live (non-eliminated) face dofs of this cell, with their local and
    // global positions.
    std::vector<int> loc;
    std::vector<Eigen::Index> glob;
    for (int i = 0; i < layout.n_faces(); ++i) {
      const int f = layout.faces[i];
      if (dofs.face_eliminated(f)) continue;
      for (int j = 0; j < layout.n_face; ++j) {
        loc.push_back(layout.face_offset(i) + j);
        glob.push_back(dofs.face_offset(f) - dofs.cell_dofs + j);
      }
    }
    if (loc.empty()) continue;
    const int nf = static_cast<int>(loc.size());

    Eigen::MatrixXd s_cf(nc, nf), s_ff(nf, nf);
    for (int a = 0; a < nf; ++a) {
      for (int i = 0; i < nc; ++i) s_cf(i, a) = alpha_ * ops.B_local(i, loc[a]);
      for (int b = 0; b < nf; ++b) s_ff(a, b) = alpha_ * ops.B_local(loc[a], loc[b]);
    }
    const Eigen::MatrixXd contrib = s_ff - s_cf.transpose() * cell_factor_[c].solve(s_cf);
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b) trip.emplace_back(glob[a], glob[b], contrib(a, b));
  }

  schur_.resize(dofs.face_dofs, dofs.face_dofs);
  schur_.setFromTriplets(trip.begin(), trip.end());
  schur_.makeCompressed();

  if (dofs.face_dofs == 0) return;
  if (backend_ == SolverBackend::direct) {
    direct_ = std::make_unique<Eigen::SimplicialLLT<SpMat>>();
    direct_->compute(schur_);
    if (direct_->info() != Eigen::Success)
      throw std::runtime_error("Schur complement factorization failed (matrix not SPD?)");
  } else {
    cg_ = std::make_unique<Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper>>();
    cg_->setTolerance(1e-12);
    cg_->setMaxIterations(10 * dofs.face_dofs);
    cg_->compute(schur_);
  }
}

Eigen::VectorXd CondensedSolver::cell_block_solve(const Eigen::VectorXd& x) const {
  const DofMap& dofs = sys_.dofs;
  Eigen::VectorXd z(dofs.cell_dofs);
  for (int c = 0; c < dofs.cells; ++c) {
    const auto off = dofs.cell_offset(c);
    z.segment(off, dofs.n_cell) = cell_factor_[c].solve(x.segment(off, dofs.n_cell));
  }
  return z;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> CondensedSolver::solve(
    const Eigen::VectorXd& rhs_cell, const Eigen::VectorXd& rhs_face) const {
  const DofMap& dofs = sys_.dofs;
  if (rhs_cell.size() != dofs.cell_dofs || rhs_face.size() != dofs.face_dofs)
    throw std::invalid_argument("condensed solve: right-hand side dimension mismatch");

  const Eigen::VectorXd z = cell_block_solve(rhs_cell);

  Eigen::VectorXd p_face(dofs.face_dofs);
  if (dofs.face_dofs > 0) {
    const Eigen::VectorXd rhs_schur = rhs_face - alpha_ * (sys_.A_KF.transpose() * z);
    if (backend_ == SolverBackend::direct) {
      p_face = direct_->solve(rhs_schur);
    } else {
      p_face = cg_->solve(rhs_schur);
      if (cg_->info() != Eigen::Success)
        throw std::runtime_error("conjugate gradient did not converge: residual " +
                                 std::to_string(cg_->error()) + " after " +
                                 std::to_string(cg_->iterations()) + " iterations");
    }
  } else {
    p_face.resize(0);
  }

  // Back-substitution: P_K = S_KK^{-1} (T_K - S_KF P_F).
  Eigen::VectorXd p_cell = rhs_cell;
  if (dofs.face_dofs > 0) p_cell -= alpha_ * (sys_.A_KF * p_face);
  p_cell = cell_block_solve(p_cell);
  return {p_cell, p_face};
}

HybridVector CondensedSolver::solve(const HybridVector& rhs) const {
  const DofMap& dofs = sys_.dofs;
  if (rhs.size() != dofs.total())
    throw std::invalid_argument("condensed solve: right-hand side dimension mismatch");
  auto [pc, pf] = solve(rhs.head(dofs.cell_dofs), rhs.tail(dofs.face_dofs));
  HybridVector out(dofs.total());
  out.head(dofs.cell_dofs) = pc;
  out.tail(dofs.face_dofs) = pf;
  return out;
}

}  // namespace hho
