#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hho/assembly.hpp"
#include "hho/local_ops.hpp"
#include "hho/quadrature.hpp"
#include "oracles.hpp"

using namespace hho;

namespace {

Mesh single_cell_mesh(const std::vector<Vec2>& poly) {
  std::vector<int> loop(poly.size());
  for (size_t i = 0; i < poly.size(); ++i) loop[i] = static_cast<int>(i);
  return build_mesh(poly, {loop});
}

ScalarField from_cell_basis(const CellBasis& b, const Eigen::VectorXd& coeffs) {
  return [b, coeffs](const Vec2& x) {
    Eigen::Matrix<double, Eigen::Dynamic, 2> pt(1, 2);
    pt.row(0) = x.transpose();
    return (b.eval(pt) * coeffs)(0);
  };
}

// Global polynomial sum c_i x^{a_i} y^{b_i} over all a+b <= degree.
struct GlobalPoly {
  int degree;
  Eigen::VectorXd coeffs;

  double operator()(const Vec2& p) const {
    double v = 0.0;
    int i = 0;
    for (int d = 0; d <= degree; ++d)
      for (int a = d; a >= 0; --a, ++i)
        v += coeffs[i] * std::pow(p.x(), a) * std::pow(p.y(), d - a);
    return v;
  }
  Vec2 grad(const Vec2& p) const {
    Vec2 g = Vec2::Zero();
    int i = 0;
    for (int d = 0; d <= degree; ++d)
      for (int a = d; a >= 0; --a, ++i) {
        const int b = d - a;
        if (a > 0) g.x() += coeffs[i] * a * std::pow(p.x(), a - 1) * std::pow(p.y(), b);
        if (b > 0) g.y() += coeffs[i] * b * std::pow(p.x(), a) * std::pow(p.y(), b - 1);
      }
    return g;
  }
};

GlobalPoly random_global_poly(int degree, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GlobalPoly p{degree, Eigen::VectorXd(cell_space_dim(degree))};
  for (int i = 0; i < p.coeffs.size(); ++i) p.coeffs[i] = u(rng);
  return p;
}

// Energy of the full (no Dirichlet elimination) interpolant of v, summed
// from the local operators; also the stabilization part alone.
std::pair<double, double> full_interpolant_energy(const Mesh& mesh, int k,
                                                  const ScalarField& v) {
  double b_energy = 0.0, s_energy = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const LocalOperators ops = build_local_operators(mesh, c, k);
    const Eigen::VectorXd dofs = interpolate_local(v, mesh, c, k);
    b_energy += dofs.dot(ops.B_local * dofs);
    s_energy += dofs.dot(ops.S_stab * dofs);
  }
  return {b_energy, s_energy};
}

}  // namespace

TEST_CASE("cell projector") {
  const auto pentagon = oracle::random_star_polygon(5, 3);
  const Mesh m = single_cell_mesh(pentagon);

  SUBCASE("constants map to the constant mode") {
    for (int k : {0, 1, 2}) {
      const Eigen::VectorXd c = l2_project_cell([](const Vec2&) { return 1.0; }, m, 0, k);
      CHECK(std::abs(c[0] - 1.0) < 1e-13);
      if (k > 0) CHECK(c.tail(c.size() - 1).cwiseAbs().maxCoeff() < 1e-13);
    }
  }

  SUBCASE("idempotency on P_k") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k : {0, 1, 2, 3}) {
      const CellBasis b = make_cell_basis(m, 0, k);
      Eigen::VectorXd coeffs(b.size());
      for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = u(rng);
      const Eigen::VectorXd proj = l2_project_cell(from_cell_basis(b, coeffs), m, 0, k);
      CHECK((proj - coeffs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("sin sin on a fixed triangle matches a dense least-squares fit") {
    const Vec2 p0(0.30, 0.40), p1(0.42, 0.43), p2(0.34, 0.50);
    const Mesh tri = single_cell_mesh({p0, p1, p2});
    const int k = 2;
    const double pi = std::acos(-1.0);
    auto v = [pi](const Vec2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    const Eigen::VectorXd proj = l2_project_cell(v, tri, 0, k);

    // ~1e4 centroid samples on a uniform subdivision as the discrete measure.
    std::vector<Vec2> pts;
    std::vector<double> wts;
    oracle::triangle_centroid_samples(p0, p1, p2, 100, pts, wts);
    REQUIRE(pts.size() == 10000);
    const CellBasis basis = make_cell_basis(tri, 0, k);
    Eigen::Matrix<double, Eigen::Dynamic, 2> P(pts.size(), 2);
    Eigen::VectorXd vals(pts.size()), w(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      P.row(i) = pts[i].transpose();
      vals[i] = v(pts[i]);
      w[i] = wts[i];
    }
    const Eigen::VectorXd lsq = oracle::weighted_lsq(basis.eval(P), vals, w);
    CHECK((proj - lsq).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("face projector") {
  const Mesh m = single_cell_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const int bottom = 0;  // the edge from (0,0) to (1,0)

  SUBCASE("constants") {
    const Eigen::VectorXd c = l2_project_face([](const Vec2&) { return 3.5; }, m, bottom, 2);
    CHECK(std::abs(c[0] - 3.5) < 1e-13);
    CHECK(c.tail(2).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("linear reproduction") {
    auto v = [](const Vec2& x) { return 2.0 * x.x() - 0.7; };
    const Eigen::VectorXd c = l2_project_face(v, m, bottom, 1);
    const FaceBasis fb = make_face_basis(m, bottom, 1);
    const QuadratureRule r = edge_rule(m, bottom, 5);
    const Eigen::VectorXd recon = fb.eval(r.points) * c;
    for (int q = 0; q < r.size(); ++q)
      CHECK(recon[q] == doctest::Approx(v(r.point(q))).epsilon(1e-13));
  }

  SUBCASE("exp(s) on a unit edge matches a dense 1D least-squares fit") {
    auto v = [](const Vec2& x) { return std::exp(x.x()); };
    const int k = 2;
    const Eigen::VectorXd proj = l2_project_face(v, m, bottom, k);

    // Simpson-weighted samples: the discrete projection agrees to quadrature
    // accuracy.
    const int panels = 5000;
    const int npts = 2 * panels + 1;
    Eigen::Matrix<double, Eigen::Dynamic, 2> P(npts, 2);
    Eigen::VectorXd vals(npts), w(npts);
    for (int i = 0; i < npts; ++i) {
      const double s = double(i) / (npts - 1);
      P(i, 0) = s;
      P(i, 1) = 0.0;
      vals[i] = std::exp(s);
      w[i] = (i == 0 || i == npts - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    }
    w *= 1.0 / (3.0 * 2 * panels);
    const FaceBasis fb = make_face_basis(m, bottom, k);
    const Eigen::VectorXd lsq = oracle::weighted_lsq(fb.eval(P), vals, w);
    CHECK((proj - lsq).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("potential reconstruction") {
  const auto pentagon = oracle::random_star_polygon(5, 21);
  const Mesh m = single_cell_mesh(pentagon);

  SUBCASE("constant data reconstructs the constant") {
    for (int k : {0, 1, 2}) {
      const LocalOperators ops = build_local_operators(m, 0, k);
      const Eigen::VectorXd dofs =
          interpolate_local([](const Vec2&) { return 2.25; }, m, 0, k);
      const Eigen::VectorXd rec = ops.R * dofs;
      CHECK(std::abs(rec[0] - 2.25) < 1e-12);
      CHECK(rec.tail(rec.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("R composed with the interpolator reproduces P_{k+1}") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k : {0, 1, 2}) {
      const LocalOperators ops = build_local_operators(m, 0, k);
      const CellBasis high = make_cell_basis(m, 0, k + 1);
      Eigen::VectorXd coeffs(high.size());
      for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = u(rng);
      const Eigen::VectorXd dofs =
          interpolate_local(from_cell_basis(high, coeffs), m, 0, k);
      CHECK((ops.R * dofs - coeffs).cwiseAbs().maxCoeff() < 1e-11);
    }
  }

  SUBCASE("Neumann relation re-checked by independent quadrature") {
    const int k = 1;
    const LocalOperators ops = build_local_operators(m, 0, k);
    const LocalDofLayout& layout = ops.layout;
    std::mt19937 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    Eigen::VectorXd qhat(layout.total());
    for (int i = 0; i < qhat.size(); ++i) qhat[i] = u(rng);
    const Eigen::VectorXd rec = ops.R * qhat;

    const CellBasis high = make_cell_basis(m, 0, k + 1);
    const int qd = 2 * k + 8;  // elevated, distinct from the build degree
    const QuadratureRule cq = cell_rule(m, 0, qd);
    const auto [gx, gy] = high.eval_grad(cq.points);

    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd w(high.size());
      for (int i = 0; i < w.size(); ++i) w[i] = u(rng);

      double lhs = 0.0, rhs = 0.0;
      {
        const Eigen::VectorXd rx = gx * rec, ry = gy * rec;
        const Eigen::VectorXd wx = gx * w, wy = gy * w;
        // grad q_K in the same high basis (cell block padded with zeros).
        Eigen::VectorXd qK = Eigen::VectorXd::Zero(high.size());
        qK.head(layout.n_cell) = qhat.head(layout.n_cell);
        const Eigen::VectorXd qx = gx * qK, qy = gy * qK;
        for (int q = 0; q < cq.size(); ++q) {
          lhs += cq.weights[q] * (rx[q] * wx[q] + ry[q] * wy[q]);
          rhs += cq.weights[q] * (qx[q] * wx[q] + qy[q] * wy[q]);
        }
      }
      for (int i = 0; i < layout.n_faces(); ++i) {
        const int f = layout.faces[i];
        const QuadratureRule fq = edge_rule(m, f, qd);
        const auto [fgx, fgy] = high.eval_grad(fq.points);
        const Vec2 n = m.normal(0, f);
        const Eigen::VectorXd dn = (n.x() * fgx + n.y() * fgy) * w;
        const Eigen::VectorXd q_face =
            make_face_basis(m, f, k).eval(fq.points) *
            qhat.segment(layout.face_offset(i), k + 1);
        Eigen::VectorXd qK = Eigen::VectorXd::Zero(high.size());
        qK.head(layout.n_cell) = qhat.head(layout.n_cell);
        const Eigen::VectorXd q_cell = high.eval(fq.points) * qK;
        for (int q = 0; q < fq.size(); ++q)
          rhs += fq.weights[q] * (q_face[q] - q_cell[q]) * dn[q];
      }
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("elliptic projector") {
  const auto pentagon = oracle::random_star_polygon(5, 17);
  const Mesh m = single_cell_mesh(pentagon);

  SUBCASE("reproduces P_{k+1} and constants") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k : {0, 1}) {
      const CellBasis high = make_cell_basis(m, 0, k + 1);
      Eigen::VectorXd coeffs(high.size());
      for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = u(rng);
      const Eigen::VectorXd proj = elliptic_project(from_cell_basis(high, coeffs), m, 0, k);
      CHECK((proj - coeffs).cwiseAbs().maxCoeff() < 1e-11);

      const Eigen::VectorXd c = elliptic_project([](const Vec2&) { return -0.75; }, m, 0, k);
      CHECK(std::abs(c[0] + 0.75) < 1e-12);
      CHECK(c.tail(c.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("H1 error decays at order k+1 on shrinking triangles") {
    const double pi = std::acos(-1.0);
    auto v = [pi](const Vec2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
    const int k = 1;
    std::vector<double> hs, errs;
    for (double h : {0.4, 0.2, 0.1, 0.05}) {
      const Vec2 p0(0.3, 0.4);
      const Mesh tri = single_cell_mesh({p0, p0 + Vec2(h, 0), p0 + Vec2(0.3 * h, 0.8 * h)});
      const Eigen::VectorXd proj = elliptic_project(v, tri, 0, k);
      const CellBasis high = make_cell_basis(tri, 0, k + 1);
      const QuadratureRule rule = cell_rule(tri, 0, 12);
      const auto [gx, gy] = high.eval_grad(rule.points);
      const Eigen::VectorXd px = gx * proj, py = gy * proj;
      double sq = 0.0;
      for (int q = 0; q < rule.size(); ++q) {
        const Vec2 x = rule.point(q);
        const Vec2 g(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                     pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
        sq += rule.weights[q] * (Vec2(px[q], py[q]) - g).squaredNorm();
      }
      hs.push_back(h);
      errs.push_back(std::sqrt(sq));
    }
    const double slope = oracle::slope_fit(hs, errs);
    CHECK(slope > k + 1 - 0.35);  // O(h^{k+1}); faster decay is fine
    CHECK(slope < k + 1 + 0.8);
  }
}

TEST_CASE("stabilization") {
  const auto pentagon = oracle::random_star_polygon(5, 29);
  const Mesh m = single_cell_mesh(pentagon);

  SUBCASE("vanishes on interpolants of P_{k+1}") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k : {0, 1, 2}) {
      const LocalOperators ops = build_local_operators(m, 0, k);
      const CellBasis high = make_cell_basis(m, 0, k + 1);
      Eigen::VectorXd coeffs(high.size());
      for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = u(rng);
      const Eigen::VectorXd dofs =
          interpolate_local(from_cell_basis(high, coeffs), m, 0, k);
      const double s_norm = ops.S_stab.cwiseAbs().maxCoeff() * dofs.squaredNorm();
      CHECK(dofs.dot(ops.S_stab * dofs) <= 1e-11 * std::max(1.0, s_norm));
    }
  }

  SUBCASE("positive on a pure face jump") {
    const int k = 1;
    const LocalOperators ops = build_local_operators(m, 0, k);
    Eigen::VectorXd dofs = Eigen::VectorXd::Zero(ops.layout.total());
    dofs[ops.layout.face_offset(0)] = 1.0;
    CHECK(dofs.dot(ops.S_stab * dofs) > 0.0);
  }

  SUBCASE("matches the definition evaluated by independent quadrature") {
    const int k = 1;
    const LocalOperators ops = build_local_operators(m, 0, k);
    const LocalDofLayout& layout = ops.layout;
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd qhat(layout.total());
    for (int i = 0; i < qhat.size(); ++i) qhat[i] = u(rng);

    const Eigen::VectorXd rec = ops.R * qhat;
    const CellBasis high = make_cell_basis(m, 0, k + 1);
    const int qd = 2 * k + 8;

    // delta_K by an independent elevated-degree projection of R qhat.
    const Eigen::VectorXd delta_cell =
        l2_project_cell(from_cell_basis(high, rec), m, 0, k, qd) -
        qhat.head(layout.n_cell);

    double direct = 0.0;
    for (int i = 0; i < layout.n_faces(); ++i) {
      const int f = layout.faces[i];
      const Eigen::VectorXd delta_face =
          l2_project_face(from_cell_basis(high, rec), m, f, k, qd) -
          qhat.segment(layout.face_offset(i), k + 1);
      const QuadratureRule fq = edge_rule(m, f, qd);
      const Eigen::VectorXd df = make_face_basis(m, f, k).eval(fq.points) * delta_face;
      const CellBasis low = make_cell_basis(m, 0, k);
      const Eigen::VectorXd dc = low.eval(fq.points) * delta_cell;
      double acc = 0.0;
      for (int q = 0; q < fq.size(); ++q)
        acc += fq.weights[q] * (df[q] - dc[q]) * (df[q] - dc[q]);
      direct += acc / m.faces[f].length;
    }
    const double via_matrix = qhat.dot(ops.S_stab * qhat);
    CHECK(std::abs(via_matrix - direct) <= 1e-10 * std::max(1.0, direct));
  }
}

TEST_CASE("global polynomial consistency of the bilinear form") {
  // For a single global q in P_{k+1}: s_h vanishes on its interpolant and
  // b reproduces the Dirichlet energy of q (hand-computed integrals, each
  // re-verified against the divergence-theorem oracle).
  struct Case {
    int k;
    GlobalPoly q;
    double dirichlet_energy;
  };
  std::vector<Case> cases;
  {
    GlobalPoly q1{1, Eigen::VectorXd::Zero(3)};
    q1.coeffs << 0.0, 1.0, 2.0;  // x + 2y, |grad|^2 = 5
    cases.push_back({0, q1, 5.0});
    GlobalPoly q2{2, Eigen::VectorXd::Zero(6)};
    q2.coeffs << 1.0, 0.0, 1.0, 1.0, -1.0, 0.0;  // 1 + y + x^2 - xy
    cases.push_back({1, q2, 1.0});
    GlobalPoly q3{3, Eigen::VectorXd::Zero(10)};
    q3.coeffs << 0, 0, 0, 0, -3, 0, 1, 0, 0, 1;  // x^3 + y^3 - 3xy
    cases.push_back({2, q3, 18.0 / 5.0});
  }
  const std::vector<Vec2> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

  for (const Case& tc : cases) {
    // Cross-check the hand value with the oracle before using it.
    double oracle_energy = 0.0;
    {
      const int d = tc.q.degree;
      // |grad q|^2 expanded by sampling: integrate with the divergence
      // oracle monomial-by-monomial via a modest polynomial fit is overkill;
      // Simpson on the boundary is unavailable for area integrals, so use
      // the identity on a fine triangulation of the square instead.
      std::vector<Vec2> pts;
      std::vector<double> wts;
      oracle::triangle_centroid_samples({0, 0}, {1, 0}, {1, 1}, 400, pts, wts);
      oracle::triangle_centroid_samples({0, 0}, {1, 1}, {0, 1}, 400, pts, wts);
      for (size_t i = 0; i < pts.size(); ++i)
        oracle_energy += wts[i] * tc.q.grad(pts[i]).squaredNorm();
      (void)d;
    }
    CHECK(std::abs(oracle_energy - tc.dirichlet_energy) < 1e-5);

    for (MeshFamily family : {MeshFamily::triangular, MeshFamily::hexagonal}) {
      const Mesh m = generate(family, 3);
      auto field = [&tc](const Vec2& x) { return tc.q(x); };
      const auto [b_energy, s_energy] = full_interpolant_energy(m, tc.k, field);
      CAPTURE(family_name(family));
      CAPTURE(tc.k);
      CHECK(std::abs(s_energy) <= 1e-10 * std::max(1.0, tc.dirichlet_energy));
      CHECK(std::abs(b_energy - tc.dirichlet_energy) <= 1e-10 * tc.dirichlet_energy);
    }
  }
}

TEST_CASE("norm equivalence ratio is bounded across refinements") {
  const int k = 1;
  std::mt19937 rng(123);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double lo = 1e300, hi = 0.0;
  for (int n : {2, 4, 8}) {
    const Mesh m = generate(MeshFamily::triangular, n);
    const GlobalSystem sys = assemble_global(m, k);
    double level_lo = 1e300, level_hi = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      HybridVector v(sys.n());
      for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
      const double a = sys.energy_norm(v);
      const double b = hho_norm(m, sys, v);
      REQUIRE(b > 0.0);
      const double ratio = a / b;
      level_lo = std::min(level_lo, ratio);
      level_hi = std::max(level_hi, ratio);
    }
    MESSAGE("n=" << n << " ratio in [" << level_lo << ", " << level_hi << "]");
    CHECK(level_lo > 1e-2);
    CHECK(level_hi < 1e2);
    lo = std::min(lo, level_lo);
    hi = std::max(hi, level_hi);
  }
  CHECK(hi / lo < 50.0);
}

TEST_CASE("Cauchy-Schwarz boundedness of b") {
  const Mesh m = generate(MeshFamily::distorted_quad, 3, 0.3);
  const GlobalSystem sys = assemble_global(m, 1);
  std::mt19937 rng(55);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    HybridVector q(sys.n()), r(sys.n());
    for (int i = 0; i < q.size(); ++i) {
      q[i] = gauss(rng);
      r[i] = gauss(rng);
    }
    const double b_qr = q.dot(sys.apply_A(r));
    CHECK(b_qr <= sys.energy_norm(q) * sys.energy_norm(r) + 1e-12);
  }
}
