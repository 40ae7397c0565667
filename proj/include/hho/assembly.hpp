// Global degree-of-freedom numbering for the hybrid space with homogeneous
// Dirichlet faces eliminated, assembly of the sparse global blocks, load
// vectors and global norms.
//
// Numbering is deterministic: all cell dofs first (cell-major), then the
// interior-face dofs (face-major, ascending face index). Boundary-face dofs
// are never assembled; local gathers read them as zero.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

#include "hho/local_ops.hpp"
#include "hho/mesh.hpp"

namespace hho {

using SpMat = Eigen::SparseMatrix<double>;

/// Coefficient vector over the hybrid space V_{h,0}^k: cell blocks followed
/// by interior-face blocks, as laid out by DofMap.
using HybridVector = Eigen::VectorXd;

struct DofMap {
  int k = 0;
  int n_cell = 0;  // dofs per cell
  int n_face = 0;  // dofs per face
  int cells = 0;
  Eigen::Index cell_dofs = 0;   // N_K
  Eigen::Index face_dofs = 0;   // N_F, interior faces only
  std::vector<int> interior_index;  // per face; -1 for boundary faces

  Eigen::Index cell_offset(int c) const { return static_cast<Eigen::Index>(c) * n_cell; }
  Eigen::Index face_offset(int f) const {
    return cell_dofs + static_cast<Eigen::Index>(interior_index[f]) * n_face;
  }
  bool face_eliminated(int f) const { return interior_index[f] < 0; }
  Eigen::Index total() const { return cell_dofs + face_dofs; }
};

DofMap build_dof_map(const Mesh& mesh, int k);

/// Assembled global operators. A is kept as the blocks of the hybrid
/// bilinear form; the transpose block is A_KF^T and never stored.
struct GlobalSystem {
  DofMap dofs;
  std::vector<LocalOperators> local;  // per cell, index order
  SpMat A_KK, A_KF, A_FF;

  Eigen::Index n() const { return dofs.total(); }

  /// y = A x over the full dof vector.
  HybridVector apply_A(const HybridVector& x) const;
  /// y = M x (cell mass; face block of y is zero).
  HybridVector apply_M(const HybridVector& x) const;

  double energy_norm(const HybridVector& v) const;   // sqrt(v^T A v)
  double l2_cell_norm(const HybridVector& v) const;  // sqrt(v_K^T M_KK v_K)

  /// Local hybrid dof vector of cell c drawn from a global vector;
  /// eliminated boundary faces read as zero.
  Eigen::VectorXd gather(int c, const HybridVector& v) const;

  /// Dense assembly of the full operator (test/debug scale only).
  Eigen::MatrixXd dense_A() const;
  Eigen::MatrixXd dense_M() const;
};

/// Builds every cell's LocalOperators (parallel across cells) and scatters
/// them into the global blocks in deterministic cell order.
GlobalSystem assemble_global(const Mesh& mesh, int k, int threads = 1);

/// Load vector: per-cell moments of f against the cell basis; the face block
/// is zero. Quadrature degree defaults to 2k+2.
HybridVector assemble_load(const ScalarField& f, const Mesh& mesh, const DofMap& dofs,
                           int quad_degree = -1, int threads = 1);

/// Global hybrid interpolant with boundary faces eliminated.
HybridVector interpolate(const ScalarField& v, const Mesh& mesh, const DofMap& dofs);

/// ||v||_HHO: gradient seminorm plus scaled face/cell gaps, summed over cells.
double hho_norm(const Mesh& mesh, const GlobalSystem& sys, const HybridVector& v);

/// Coordinate-format text dump ("row col value" per line) of a sparse block.
void dump_coordinate_format(const SpMat& m, const std::string& path);
/// The block-diagonal cell mass in the same format.
void dump_mass_coordinate_format(const GlobalSystem& sys, const std::string& path);

}  // namespace hho
