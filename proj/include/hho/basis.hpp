// Scaled monomial bases on cells and faces.
//
// Cell basis functions are ((x - xc)/h_K)^a ((y - yc)/h_K)^b over all
// exponents a + b <= k in graded lexicographic order (degree first, then x
// power descending), centered at the cell centroid. Face basis functions are
// powers of the arclength coordinate mapped to [-1, 1]. The h_K scaling keeps
// Gram matrices well conditioned without orthonormalization.

#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

namespace hho {

inline int cell_space_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

struct CellBasis {
  int cell = -1;
  int degree = 0;
  Vec2 center = Vec2::Zero();
  double scale = 1.0;
  std::vector<std::pair<int, int>> exponents;  // graded-lex (a, b), a + b <= degree

  int size() const { return static_cast<int>(exponents.size()); }

  /// Values at the given points; rows = points, columns = basis functions.
  Eigen::MatrixXd eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const;
  /// Analytic gradients; returns (d/dx values, d/dy values).
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eval_grad(
      const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const;
};

struct FaceBasis {
  int face = -1;
  int degree = 0;
  Vec2 midpoint = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();  // unit, along the face
  double half_length = 0.0;

  int size() const { return degree + 1; }

  Eigen::MatrixXd eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const;
};

CellBasis make_cell_basis(const Mesh& mesh, int cell, int degree);
FaceBasis make_face_basis(const Mesh& mesh, int face, int degree);

/// phi^T diag(w) phi for a value matrix as produced by eval().
Eigen::MatrixXd gram_from_values(const Eigen::MatrixXd& values, const Eigen::VectorXd& weights);

/// Mass matrix of the basis under the rule. The rule must integrate products
/// of two basis functions exactly (degree >= 2 * basis degree, asserted).
Eigen::MatrixXd gram_matrix(const CellBasis& basis, const QuadratureRule& rule);
Eigen::MatrixXd gram_matrix(const FaceBasis& basis, const QuadratureRule& rule);

/// Stiffness matrix (grad phi_i, grad phi_j); symmetric PSD with the
/// constants as its nullspace.
Eigen::MatrixXd stiffness_matrix(const CellBasis& basis, const QuadratureRule& rule);

}  // namespace hho
