// Numerical integration on edges (Gauss-Legendre) and on simple polygons
// (centroid fan triangulation with collapsed tensor Gauss rules), exact to a
// requested total polynomial degree.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "hho/mesh.hpp"

namespace hho {

struct QuadratureRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  int degree = 0;  // total polynomial degree integrated exactly

  int size() const { return static_cast<int>(weights.size()); }
  Vec2 point(int q) const { return points.row(q).transpose(); }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int npts, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Rule on the segment [a, b] with ceil((degree+1)/2) points.
QuadratureRule edge_rule(const Vec2& a, const Vec2& b, int degree);
QuadratureRule edge_rule(const Mesh& mesh, int face, int degree);

/// Rule on a simple CCW polygon: fan triangulation from the vertex centroid,
/// each triangle integrated by a collapsed tensor Gauss rule. Weights are
/// positive and sum to the polygon area.
QuadratureRule cell_rule(const std::vector<Vec2>& polygon, int degree);
QuadratureRule cell_rule(const Mesh& mesh, int cell, int degree);

}  // namespace hho
