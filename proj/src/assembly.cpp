#include "hho/assembly.hpp"

#include <fstream>
#include <stdexcept>

#include "hho/parallel.hpp"
#include "hho/quadrature.hpp"

namespace hho {

DofMap build_dof_map(const Mesh& mesh, int k) {
  DofMap dm;
  dm.k = k;
  dm.n_cell = cell_space_dim(k);
  dm.n_face = k + 1;
  dm.cells = mesh.n_cells();
  dm.cell_dofs = static_cast<Eigen::Index>(dm.cells) * dm.n_cell;
  dm.interior_index.resize(mesh.n_faces(), -1);
  int interior = 0;
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (!mesh.faces[f].on_boundary()) dm.interior_index[f] = interior++;
  dm.face_dofs = static_cast<Eigen::Index>(interior) * dm.n_face;
  return dm;
}

Eigen::VectorXd GlobalSystem::gather(int c, const HybridVector& v) const {
  const LocalDofLayout& layout = local[c].layout;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.total());
  x.head(layout.n_cell) = v.segment(dofs.cell_offset(c), layout.n_cell);
  for (int i = 0; i < layout.n_faces(); ++i) {
    const int f = layout.faces[i];
    if (!dofs.face_eliminated(f))
      x.segment(layout.face_offset(i), layout.n_face) = v.segment(dofs.face_offset(f), dofs.n_face);
  }
  return x;
}

HybridVector GlobalSystem::apply_A(const HybridVector& x) const {
  if (x.size() != n()) throw std::invalid_argument("apply_A: dimension mismatch");
  HybridVector y(n());
  const auto xK = x.head(dofs.cell_dofs);
  const auto xF = x.tail(dofs.face_dofs);
  y.head(dofs.cell_dofs) = A_KK * xK + A_KF * xF;
  y.tail(dofs.face_dofs) = A_KF.transpose() * xK + A_FF * xF;
  return y;
}

HybridVector GlobalSystem::apply_M(const HybridVector& x) const {
  if (x.size() != n()) throw std::invalid_argument("apply_M: dimension mismatch");
  HybridVector y = HybridVector::Zero(n());
  for (int c = 0; c < dofs.cells; ++c) {
    const auto off = dofs.cell_offset(c);
    y.segment(off, dofs.n_cell) = local[c].M_cell * x.segment(off, dofs.n_cell);
  }
  return y;
}

double GlobalSystem::energy_norm(const HybridVector& v) const {
  return std::sqrt(std::max(0.0, v.dot(apply_A(v))));
}

double GlobalSystem::l2_cell_norm(const HybridVector& v) const {
  if (v.size() != n()) throw std::invalid_argument("l2_cell_norm: dimension mismatch");
  double sq = 0.0;
  for (int c = 0; c < dofs.cells; ++c) {
    const auto x = v.segment(dofs.cell_offset(c), dofs.n_cell);
    sq += x.dot(local[c].M_cell * x);
  }
  return std::sqrt(std::max(0.0, sq));
}

Eigen::MatrixXd GlobalSystem::dense_A() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n(), n());
  A.topLeftCorner(dofs.cell_dofs, dofs.cell_dofs) = A_KK;
  A.topRightCorner(dofs.cell_dofs, dofs.face_dofs) = A_KF;
  A.bottomLeftCorner(dofs.face_dofs, dofs.cell_dofs) = Eigen::MatrixXd(SpMat(A_KF.transpose()));
  A.bottomRightCorner(dofs.face_dofs, dofs.face_dofs) = A_FF;
  return A;
}

Eigen::MatrixXd GlobalSystem::dense_M() const {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n(), n());
  for (int c = 0; c < dofs.cells; ++c) {
    const auto off = dofs.cell_offset(c);
    M.block(off, off, dofs.n_cell, dofs.n_cell) = local[c].M_cell;
  }
  return M;
}

GlobalSystem assemble_global(const Mesh& mesh, int k, int threads) {
  GlobalSystem sys;
  sys.dofs = build_dof_map(mesh, k);
  sys.local.resize(mesh.n_cells());
  parallel_for(mesh.n_cells(), threads,
               [&](int c) { sys.local[c] = build_local_operators(mesh, c, k); });

  std::vector<Eigen::Triplet<double>> tKK, tKF, tFF;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const LocalOperators& ops = sys.local[c];
    const LocalDofLayout& layout = ops.layout;
    const Eigen::Index cell_off = sys.dofs.cell_offset(c);

    // Global row/column of each local dof; -1 marks eliminated boundary dofs.
    std::vector<Eigen::Index> pos(layout.total(), -1);
    for (int i = 0; i < layout.n_cell; ++i) pos[i] = cell_off + i;
    for (int i = 0; i < layout.n_faces(); ++i) {
      const int f = layout.faces[i];
      if (sys.dofs.face_eliminated(f)) continue;
      const Eigen::Index off = sys.dofs.face_offset(f);
      for (int j = 0; j < layout.n_face; ++j) pos[layout.face_offset(i) + j] = off + j;
    }

    const Eigen::Index nK = sys.dofs.cell_dofs;
    for (int a = 0; a < layout.total(); ++a) {
      if (pos[a] < 0) continue;
      for (int b = 0; b < layout.total(); ++b) {
        if (pos[b] < 0) continue;
        const double v = ops.B_local(a, b);
        if (v == 0.0) continue;
        const bool a_cell = pos[a] < nK;
        const bool b_cell = pos[b] < nK;
        if (a_cell && b_cell)
          tKK.emplace_back(pos[a], pos[b], v);
        else if (a_cell && !b_cell)
          tKF.emplace_back(pos[a], pos[b] - nK, v);
        else if (!a_cell && !b_cell)
          tFF.emplace_back(pos[a] - nK, pos[b] - nK, v);
        // cell-column/face-row entries are recovered as A_KF^T
      }
    }
  }

  sys.A_KK.resize(sys.dofs.cell_dofs, sys.dofs.cell_dofs);
  sys.A_KF.resize(sys.dofs.cell_dofs, sys.dofs.face_dofs);
  sys.A_FF.resize(sys.dofs.face_dofs, sys.dofs.face_dofs);
  sys.A_KK.setFromTriplets(tKK.begin(), tKK.end());
  sys.A_KF.setFromTriplets(tKF.begin(), tKF.end());
  sys.A_FF.setFromTriplets(tFF.begin(), tFF.end());
  sys.A_KK.makeCompressed();
  sys.A_KF.makeCompressed();
  sys.A_FF.makeCompressed();
  return sys;
}

HybridVector assemble_load(const ScalarField& f, const Mesh& mesh, const DofMap& dofs,
                           int quad_degree, int threads) {
  const int qd = quad_degree < 0 ? 2 * dofs.k + 2 : quad_degree;
  HybridVector b = HybridVector::Zero(dofs.total());
  parallel_for(mesh.n_cells(), threads, [&](int c) {
    const CellBasis basis = make_cell_basis(mesh, c, dofs.k);
    const QuadratureRule rule = cell_rule(mesh, c, qd);
    Eigen::VectorXd fw(rule.size());
    for (int q = 0; q < rule.size(); ++q) fw[q] = rule.weights[q] * f(rule.point(q));
    b.segment(dofs.cell_offset(c), dofs.n_cell) = basis.eval(rule.points).transpose() * fw;
  });
  return b;
}

HybridVector interpolate(const ScalarField& v, const Mesh& mesh, const DofMap& dofs) {
  HybridVector x = HybridVector::Zero(dofs.total());
  for (int c = 0; c < dofs.cells; ++c)
    x.segment(dofs.cell_offset(c), dofs.n_cell) = l2_project_cell(v, mesh, c, dofs.k);
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (!dofs.face_eliminated(f))
      x.segment(dofs.face_offset(f), dofs.n_face) = l2_project_face(v, mesh, f, dofs.k);
  return x;
}

double hho_norm(const Mesh& mesh, const GlobalSystem& sys, const HybridVector& v) {
  double sq = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Eigen::VectorXd x = sys.gather(c, v);
    sq += x.dot(local_hho_norm_matrix(mesh, c, sys.dofs.k) * x);
  }
  return std::sqrt(std::max(0.0, sq));
}

void dump_coordinate_format(const SpMat& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.precision(17);
  for (int o = 0; o < m.outerSize(); ++o)
    for (SpMat::InnerIterator it(m, o); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

void dump_mass_coordinate_format(const GlobalSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.precision(17);
  for (int c = 0; c < sys.dofs.cells; ++c) {
    const auto off = sys.dofs.cell_offset(c);
    const Eigen::MatrixXd& M = sys.local[c].M_cell;
    for (int i = 0; i < M.rows(); ++i)
      for (int j = 0; j < M.cols(); ++j)
        if (M(i, j) != 0.0) out << off + i << " " << off + j << " " << M(i, j) << "\n";
  }
}

}  // namespace hho
