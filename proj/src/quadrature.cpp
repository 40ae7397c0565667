#include "hho/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hho {

void gauss_legendre(int npts, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (npts < 1) throw std::invalid_argument("gauss_legendre: need at least 1 point");
  nodes.resize(npts);
  weights.resize(npts);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < npts; ++i) {
    // Newton iteration from the Chebyshev estimate of the i-th root of P_n.
    double x = std::cos(pi * (i + 0.75) / (npts + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= npts; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = npts * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[npts - 1 - i] = x;
    weights[npts - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule edge_rule(const Vec2& a, const Vec2& b, int degree) {
  if (degree < 0) throw std::invalid_argument("edge_rule: degree must be >= 0");
  const double len = (b - a).norm();
  if (len < 1e-14) throw std::invalid_argument("edge_rule: degenerate segment");

  const int npts = (degree + 2) / 2;  // ceil((degree+1)/2)
  Eigen::VectorXd x, w;
  gauss_legendre(npts, x, w);

  QuadratureRule rule;
  rule.degree = degree;
  rule.points.resize(npts, 2);
  rule.weights.resize(npts);
  const Vec2 mid = 0.5 * (a + b);
  const Vec2 half = 0.5 * (b - a);
  for (int q = 0; q < npts; ++q) {
    rule.points.row(q) = (mid + x[q] * half).transpose();
    rule.weights[q] = 0.5 * len * w[q];
  }
  return rule;
}

QuadratureRule edge_rule(const Mesh& mesh, int face, int degree) {
  const Face& f = mesh.faces[face];
  return edge_rule(mesh.verts[f.v0], mesh.verts[f.v1], degree);
}

QuadratureRule cell_rule(const std::vector<Vec2>& polygon, int degree) {
  if (degree < 0) throw std::invalid_argument("cell_rule: degree must be >= 0");
  const size_t nv = polygon.size();
  if (nv < 3) throw std::invalid_argument("cell_rule: polygon needs at least 3 vertices");

  Vec2 center = Vec2::Zero();
  for (const Vec2& p : polygon) center += p;
  center /= double(nv);

  // Collapsed tensor rule on the reference triangle: the map
  // (u,v) -> (u(1-v), uv) carries monomials of total degree d to
  // u^{d+1}-type integrands, so d+1 in u and d in v must be exact.
  const int nu = (degree + 3) / 2;
  const int nv1 = (degree + 2) / 2;
  Eigen::VectorXd xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv1, xv, wv);

  const int per_tri = nu * nv1;
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.resize(per_tri * nv, 2);
  rule.weights.resize(per_tri * nv);

  int out = 0;
  for (size_t e = 0; e < nv; ++e) {
    const Vec2& p1 = polygon[e];
    const Vec2& p2 = polygon[(e + 1) % nv];
    const double area2 = (p1.x() - center.x()) * (p2.y() - center.y()) -
                         (p2.x() - center.x()) * (p1.y() - center.y());
    if (area2 <= 0.0)
      throw std::invalid_argument("cell_rule: polygon is not star-shaped about its vertex centroid");
    for (int iu = 0; iu < nu; ++iu) {
      const double u = 0.5 * (xu[iu] + 1.0);
      for (int iv = 0; iv < nv1; ++iv) {
        const double v = 0.5 * (xv[iv] + 1.0);
        const double xi = u * (1.0 - v);
        const double eta = u * v;
        rule.points.row(out) = (center + xi * (p1 - center) + eta * (p2 - center)).transpose();
        rule.weights[out] = 0.25 * wu[iu] * wv[iv] * u * area2;
        ++out;
      }
    }
  }
  return rule;
}

QuadratureRule cell_rule(const Mesh& mesh, int cell, int degree) {
  return cell_rule(mesh.polygon(cell), degree);
}

}  // namespace hho
