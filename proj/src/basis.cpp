#include "hho/basis.hpp"

#include <cassert>
#include <cmath>

namespace hho {

namespace {

std::vector<std::pair<int, int>> graded_lex_exponents(int degree) {
  std::vector<std::pair<int, int>> e;
  e.reserve(cell_space_dim(degree));
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) e.emplace_back(a, d - a);
  return e;
}

}  // namespace

CellBasis make_cell_basis(const Mesh& mesh, int cell, int degree) {
  CellBasis b;
  b.cell = cell;
  b.degree = degree;
  b.center = mesh.cells[cell].centroid;
  b.scale = mesh.cells[cell].diameter;
  b.exponents = graded_lex_exponents(degree);
  return b;
}

Eigen::MatrixXd CellBasis::eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const {
  const int np = static_cast<int>(pts.rows());
  const int nb = size();
  // Powers of the scaled coordinates up to the basis degree.
  Eigen::MatrixXd px(np, degree + 1), py(np, degree + 1);
  px.col(0).setOnes();
  py.col(0).setOnes();
  const Eigen::ArrayXd sx = (pts.col(0).array() - center.x()) / scale;
  const Eigen::ArrayXd sy = (pts.col(1).array() - center.y()) / scale;
  for (int d = 1; d <= degree; ++d) {
    px.col(d) = px.col(d - 1).array() * sx;
    py.col(d) = py.col(d - 1).array() * sy;
  }
  Eigen::MatrixXd values(np, nb);
  for (int i = 0; i < nb; ++i)
    values.col(i) = px.col(exponents[i].first).array() * py.col(exponents[i].second).array();
  return values;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> CellBasis::eval_grad(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const {
  const int np = static_cast<int>(pts.rows());
  const int nb = size();
  Eigen::MatrixXd px(np, degree + 1), py(np, degree + 1);
  px.col(0).setOnes();
  py.col(0).setOnes();
  const Eigen::ArrayXd sx = (pts.col(0).array() - center.x()) / scale;
  const Eigen::ArrayXd sy = (pts.col(1).array() - center.y()) / scale;
  for (int d = 1; d <= degree; ++d) {
    px.col(d) = px.col(d - 1).array() * sx;
    py.col(d) = py.col(d - 1).array() * sy;
  }
  Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(np, nb);
  Eigen::MatrixXd gy = Eigen::MatrixXd::Zero(np, nb);
  for (int i = 0; i < nb; ++i) {
    const auto [a, b] = exponents[i];
    if (a > 0)
      gx.col(i) = (a / scale) * (px.col(a - 1).array() * py.col(b).array()).matrix();
    if (b > 0)
      gy.col(i) = (b / scale) * (px.col(a).array() * py.col(b - 1).array()).matrix();
  }
  return {gx, gy};
}

FaceBasis make_face_basis(const Mesh& mesh, int face, int degree) {
  const Face& f = mesh.faces[face];
  FaceBasis b;
  b.face = face;
  b.degree = degree;
  b.midpoint = f.midpoint;
  b.half_length = 0.5 * f.length;
  b.tangent = (mesh.verts[f.v1] - mesh.verts[f.v0]) / f.length;
  return b;
}

Eigen::MatrixXd FaceBasis::eval(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) const {
  const int np = static_cast<int>(pts.rows());
  Eigen::ArrayXd s(np);
  for (int q = 0; q < np; ++q)
    s[q] = (pts.row(q).transpose() - midpoint).dot(tangent) / half_length;
  Eigen::MatrixXd values(np, degree + 1);
  values.col(0).setOnes();
  for (int d = 1; d <= degree; ++d) values.col(d) = values.col(d - 1).array() * s;
  return values;
}

Eigen::MatrixXd gram_from_values(const Eigen::MatrixXd& values, const Eigen::VectorXd& weights) {
  return values.transpose() * weights.asDiagonal() * values;
}

Eigen::MatrixXd gram_matrix(const CellBasis& basis, const QuadratureRule& rule) {
  assert(rule.degree >= 2 * basis.degree && "quadrature degree too low for Gram matrix");
  return gram_from_values(basis.eval(rule.points), rule.weights);
}

Eigen::MatrixXd gram_matrix(const FaceBasis& basis, const QuadratureRule& rule) {
  assert(rule.degree >= 2 * basis.degree && "quadrature degree too low for Gram matrix");
  return gram_from_values(basis.eval(rule.points), rule.weights);
}

Eigen::MatrixXd stiffness_matrix(const CellBasis& basis, const QuadratureRule& rule) {
  assert(rule.degree >= 2 * basis.degree && "quadrature degree too low for stiffness matrix");
  const auto [gx, gy] = basis.eval_grad(rule.points);
  return gram_from_values(gx, rule.weights) + gram_from_values(gy, rule.weights);
}

}  // namespace hho
