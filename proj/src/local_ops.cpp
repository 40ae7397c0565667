#include "hho/local_ops.hpp"

#include <algorithm>
#include <stdexcept>

#include "hho/quadrature.hpp"

namespace hho {

namespace {

Eigen::VectorXd field_at(const ScalarField& v, const QuadratureRule& rule) {
  Eigen::VectorXd vals(rule.size());
  for (int q = 0; q < rule.size(); ++q) vals[q] = v(rule.point(q));
  return vals;
}

}  // namespace

LocalDofLayout local_dof_layout(const Mesh& mesh, int cell, int k) {
  LocalDofLayout layout;
  layout.cell = cell;
  layout.k = k;
  layout.n_cell = cell_space_dim(k);
  layout.n_face = k + 1;
  layout.faces = mesh.cells[cell].faces;
  std::sort(layout.faces.begin(), layout.faces.end());
  return layout;
}

LocalOperators build_local_operators(const Mesh& mesh, int cell, int k) {
  LocalOperators ops;
  ops.layout = local_dof_layout(mesh, cell, k);
  const LocalDofLayout& layout = ops.layout;
  const int n_cell = layout.n_cell;
  const int n_loc = layout.total();
  const int qd = 2 * k + 2;

  // The degree-(k+1) basis; its first n_cell functions are the degree-k basis.
  const CellBasis high = make_cell_basis(mesh, cell, k + 1);
  const int n_high = high.size();

  const QuadratureRule cq = cell_rule(mesh, cell, qd);
  const Eigen::MatrixXd phi = high.eval(cq.points);
  const auto [gx, gy] = high.eval_grad(cq.points);
  const Eigen::MatrixXd stiff =
      gram_from_values(gx, cq.weights) + gram_from_values(gy, cq.weights);
  const Eigen::MatrixXd mass = gram_from_values(phi, cq.weights);
  ops.M_cell = mass.topLeftCorner(n_cell, n_cell);

  // Neumann problem right-hand side: (grad q_K, grad w)_K plus the face
  // jumps <q_F - q_K, n.grad w>_F, for every w in the high-order basis.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_high, n_loc);
  rhs.leftCols(n_cell) = stiff.leftCols(n_cell);

  struct FaceData {
    QuadratureRule rule;
    Eigen::MatrixXd phi_face;   // face basis at face points
    Eigen::MatrixXd phi_cell;   // high-order cell basis at face points
    double h = 0.0;
  };
  std::vector<FaceData> fd(layout.n_faces());

  for (int i = 0; i < layout.n_faces(); ++i) {
    const int f = layout.faces[i];
    FaceData& d = fd[i];
    d.rule = edge_rule(mesh, f, qd);
    d.phi_face = make_face_basis(mesh, f, k).eval(d.rule.points);
    d.phi_cell = high.eval(d.rule.points);
    d.h = mesh.faces[f].length;

    const auto [fgx, fgy] = high.eval_grad(d.rule.points);
    const Vec2 n = mesh.normal(cell, f);
    const Eigen::MatrixXd dn = n.x() * fgx + n.y() * fgy;
    const Eigen::MatrixXd dn_w = d.rule.weights.asDiagonal() * dn;
    rhs.leftCols(n_cell).noalias() -= dn_w.transpose() * d.phi_cell.leftCols(n_cell);
    rhs.middleCols(layout.face_offset(i), k + 1).noalias() += dn_w.transpose() * d.phi_face;
  }

  // The gradient determines R up to a constant: solve with the constant mode
  // pinned, then shift to enforce (R qhat, 1)_K = (q_K, 1)_K.
  ops.R.resize(n_high, n_loc);
  {
    Eigen::LLT<Eigen::MatrixXd> llt(stiff.bottomRightCorner(n_high - 1, n_high - 1));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("potential reconstruction: singular Neumann system on cell " +
                               std::to_string(cell));
    ops.R.bottomRows(n_high - 1) = llt.solve(rhs.bottomRows(n_high - 1));
  }
  {
    const Eigen::RowVectorXd moments = mass.row(0);  // (phi_i, 1)_K since phi_0 = 1
    Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(n_loc);
    target.head(n_cell) = moments.head(n_cell);
    ops.R.row(0) =
        (target - moments.tail(n_high - 1) * ops.R.bottomRows(n_high - 1)) / moments[0];
  }

  ops.A_cons = ops.R.transpose() * stiff * ops.R;
  ops.A_cons = 0.5 * (ops.A_cons + ops.A_cons.transpose()).eval();  // exact symmetry

  // Stabilization: delta_K = pi_K^k(R qhat - q_K), delta_KF = pi_F^k(R qhat - q_F);
  // accumulate h_F^{-1} || (delta_KF - delta_K)|_F ||_F^2 as a quadratic form.
  Eigen::MatrixXd delta_cell;  // coefficients of delta_K in the degree-k basis
  {
    const Eigen::MatrixXd proj = mass.topRows(n_cell) * ops.R;
    delta_cell = ops.M_cell.ldlt().solve(proj);
    delta_cell.leftCols(n_cell) -= Eigen::MatrixXd::Identity(n_cell, n_cell);
  }

  ops.S_stab = Eigen::MatrixXd::Zero(n_loc, n_loc);
  for (int i = 0; i < layout.n_faces(); ++i) {
    const FaceData& d = fd[i];
    const Eigen::MatrixXd phi_face_w = d.rule.weights.asDiagonal() * d.phi_face;
    const Eigen::MatrixXd m_ff = d.phi_face.transpose() * phi_face_w;

    Eigen::MatrixXd delta_face = m_ff.ldlt().solve(phi_face_w.transpose() * d.phi_cell * ops.R);
    delta_face.middleCols(layout.face_offset(i), k + 1) -=
        Eigen::MatrixXd::Identity(k + 1, k + 1);

    // Point values of (delta_KF - delta_K) along the face; the cell polynomial
    // trace is evaluated directly.
    const Eigen::MatrixXd jump =
        d.phi_face * delta_face - d.phi_cell.leftCols(n_cell) * delta_cell;
    ops.S_stab.noalias() +=
        (1.0 / d.h) * jump.transpose() * d.rule.weights.asDiagonal() * jump;
  }
  ops.S_stab = 0.5 * (ops.S_stab + ops.S_stab.transpose()).eval();
  ops.M_cell = 0.5 * (ops.M_cell + ops.M_cell.transpose()).eval();

  ops.B_local = ops.A_cons + ops.S_stab;
  return ops;
}

Eigen::VectorXd l2_project_cell(const ScalarField& v, const Mesh& mesh, int cell, int k,
                                int quad_degree) {
  // 2k for the Gram plus a 2k+2 smoothness allowance for the moments.
  const int qd = quad_degree < 0 ? 4 * k + 2 : quad_degree;
  const CellBasis basis = make_cell_basis(mesh, cell, k);
  const QuadratureRule rule = cell_rule(mesh, cell, qd);
  const Eigen::MatrixXd phi = basis.eval(rule.points);
  const Eigen::VectorXd moments =
      phi.transpose() * (rule.weights.array() * field_at(v, rule).array()).matrix();
  return gram_from_values(phi, rule.weights).ldlt().solve(moments);
}

Eigen::VectorXd l2_project_face(const ScalarField& v, const Mesh& mesh, int face, int k,
                                int quad_degree) {
  const int qd = quad_degree < 0 ? 4 * k + 2 : quad_degree;
  const FaceBasis basis = make_face_basis(mesh, face, k);
  const QuadratureRule rule = edge_rule(mesh, face, qd);
  const Eigen::MatrixXd phi = basis.eval(rule.points);
  const Eigen::VectorXd moments =
      phi.transpose() * (rule.weights.array() * field_at(v, rule).array()).matrix();
  return gram_from_values(phi, rule.weights).ldlt().solve(moments);
}

Eigen::VectorXd interpolate_local(const ScalarField& v, const Mesh& mesh, int cell, int k) {
  const LocalDofLayout layout = local_dof_layout(mesh, cell, k);
  Eigen::VectorXd dofs(layout.total());
  dofs.head(layout.n_cell) = l2_project_cell(v, mesh, cell, k);
  for (int i = 0; i < layout.n_faces(); ++i)
    dofs.segment(layout.face_offset(i), k + 1) = l2_project_face(v, mesh, layout.faces[i], k);
  return dofs;
}

Eigen::VectorXd elliptic_project(const ScalarField& v, const LocalOperators& ops,
                                 const Mesh& mesh) {
  return ops.R * interpolate_local(v, mesh, ops.layout.cell, ops.layout.k);
}

Eigen::VectorXd elliptic_project(const ScalarField& v, const Mesh& mesh, int cell, int k) {
  return elliptic_project(v, build_local_operators(mesh, cell, k), mesh);
}

Eigen::MatrixXd local_hho_norm_matrix(const Mesh& mesh, int cell, int k) {
  const LocalDofLayout layout = local_dof_layout(mesh, cell, k);
  const int n_cell = layout.n_cell;
  const int n_loc = layout.total();
  const int qd = 2 * k + 2;

  const CellBasis basis = make_cell_basis(mesh, cell, k);
  const QuadratureRule cq = cell_rule(mesh, cell, qd);
  const auto [gx, gy] = basis.eval_grad(cq.points);

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_loc, n_loc);
  H.topLeftCorner(n_cell, n_cell) =
      gram_from_values(gx, cq.weights) + gram_from_values(gy, cq.weights);

  for (int i = 0; i < layout.n_faces(); ++i) {
    const int f = layout.faces[i];
    const QuadratureRule fq = edge_rule(mesh, f, qd);
    Eigen::MatrixXd jump = Eigen::MatrixXd::Zero(fq.size(), n_loc);
    jump.middleCols(layout.face_offset(i), k + 1) = make_face_basis(mesh, f, k).eval(fq.points);
    jump.leftCols(n_cell) -= basis.eval(fq.points);
    H.noalias() +=
        (1.0 / mesh.faces[f].length) * jump.transpose() * fq.weights.asDiagonal() * jump;
  }
  return H;
}

}  // namespace hho
