// Per-cell HHO operators for the equal-order method: L2 projectors, the
// hybrid interpolator, the degree-(k+1) potential reconstruction obtained
// from the local Neumann problem, the equal-order stabilization and the
// resulting local contribution to the discrete bilinear form.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "hho/basis.hpp"
#include "hho/mesh.hpp"

namespace hho {

using ScalarField = std::function<double(const Vec2&)>;

/// Local unknown layout: cell dofs first, then one block of k+1 dofs per
/// face, faces in ascending global index.
struct LocalDofLayout {
  int cell = -1;
  int k = 0;
  int n_cell = 0;
  int n_face = 0;
  std::vector<int> faces;

  int n_faces() const { return static_cast<int>(faces.size()); }
  int total() const { return n_cell + n_face * n_faces(); }
  int face_offset(int local_face) const { return n_cell + local_face * n_face; }
};

LocalDofLayout local_dof_layout(const Mesh& mesh, int cell, int k);

/// Matrices produced once per cell and reused throughout a run.
struct LocalOperators {
  LocalDofLayout layout;
  Eigen::MatrixXd R;       // local dofs -> P_{k+1}(K) coefficients
  Eigen::MatrixXd A_cons;  // R^T Stiff_{k+1} R
  Eigen::MatrixXd S_stab;  // equal-order stabilization
  Eigen::MatrixXd M_cell;  // cell mass matrix
  Eigen::MatrixXd B_local; // A_cons + S_stab
};

LocalOperators build_local_operators(const Mesh& mesh, int cell, int k);

/// L2(K)-orthogonal projection onto P_k(K). Quadrature degree defaults to
/// 2k+2 to absorb the smoothness of non-polynomial data.
Eigen::VectorXd l2_project_cell(const ScalarField& v, const Mesh& mesh, int cell, int k,
                                int quad_degree = -1);

/// L2(F)-orthogonal projection onto P_k(F).
Eigen::VectorXd l2_project_face(const ScalarField& v, const Mesh& mesh, int face, int k,
                                int quad_degree = -1);

/// Hybrid interpolant of v on one cell: cell projection followed by the face
/// projections in layout order.
Eigen::VectorXd interpolate_local(const ScalarField& v, const Mesh& mesh, int cell, int k);

/// Elliptic projection onto P_{k+1}(K), computed as the potential
/// reconstruction of the hybrid interpolant.
Eigen::VectorXd elliptic_project(const ScalarField& v, const Mesh& mesh, int cell, int k);
Eigen::VectorXd elliptic_project(const ScalarField& v, const LocalOperators& ops, const Mesh& mesh);

/// Matrix of the cell contribution to the ||.||_HHO norm: squared gradient
/// seminorm of the cell unknown plus h_F^{-1}-weighted face/cell trace gaps.
Eigen::MatrixXd local_hho_norm_matrix(const Mesh& mesh, int cell, int k);

}  // namespace hho
