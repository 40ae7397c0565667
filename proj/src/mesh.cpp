#include "hho/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hho {

namespace {

double polygon_signed_area(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % p.size()];
    a += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * a;
}

Vec2 polygon_area_centroid(const std::vector<Vec2>& p, double area) {
  Vec2 c = Vec2::Zero();
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % p.size()];
    const double w = u.x() * v.y() - v.x() * u.y();
    c += w * (u + v);
  }
  return c / (6.0 * area);
}

double polygon_diameter(const std::vector<Vec2>& p) {
  double d2 = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      d2 = std::max(d2, (p[i] - p[j]).squaredNorm());
  return std::sqrt(d2);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool polygon_simple(const std::vector<Vec2>& p) {
  const size_t n = p.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (share a vertex).
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace

MeshFamily parse_family(const std::string& name) {
  if (name == "triangular") return MeshFamily::triangular;
  if (name == "distorted_quad") return MeshFamily::distorted_quad;
  if (name == "hexagonal") return MeshFamily::hexagonal;
  throw std::invalid_argument("unknown mesh family '" + name +
                              "' (expected triangular, distorted_quad or hexagonal)");
}

std::string family_name(MeshFamily family) {
  switch (family) {
    case MeshFamily::triangular: return "triangular";
    case MeshFamily::distorted_quad: return "distorted_quad";
    case MeshFamily::hexagonal: return "hexagonal";
  }
  return "?";
}

std::vector<Vec2> Mesh::polygon(int c) const {
  std::vector<Vec2> p;
  p.reserve(cells[c].vertices.size());
  for (int v : cells[c].vertices) p.push_back(verts[v]);
  return p;
}

double Mesh::size() const {
  double h = 0.0;
  for (const Cell& c : cells) h = std::max(h, c.diameter);
  return h;
}

Mesh build_mesh(std::vector<Vec2> verts, std::vector<std::vector<int>> loops) {
  Mesh m;
  m.verts = std::move(verts);
  m.cells.resize(loops.size());

  std::map<std::pair<int, int>, int> face_of_edge;
  for (size_t ci = 0; ci < loops.size(); ++ci) {
    Cell& cell = m.cells[ci];
    cell.vertices = std::move(loops[ci]);
    const size_t nv = cell.vertices.size();
    if (nv < 3) throw std::runtime_error("cell " + std::to_string(ci) + ": fewer than 3 vertices");
    cell.faces.resize(nv);
    for (size_t e = 0; e < nv; ++e) {
      const int a = cell.vertices[e];
      const int b = cell.vertices[(e + 1) % nv];
      if (a < 0 || b < 0 || a >= m.n_verts() || b >= m.n_verts())
        throw std::runtime_error("cell " + std::to_string(ci) + ": vertex index out of range");
      if (a == b) throw std::runtime_error("cell " + std::to_string(ci) + ": degenerate edge");
      const auto key = std::minmax(a, b);
      auto it = face_of_edge.find(key);
      if (it == face_of_edge.end()) {
        Face f;
        f.v0 = a;
        f.v1 = b;
        f.left = static_cast<int>(ci);
        face_of_edge.emplace(key, m.n_faces());
        cell.faces[e] = m.n_faces();
        m.faces.push_back(f);
      } else {
        Face& f = m.faces[it->second];
        if (f.right >= 0)
          throw std::runtime_error("cell " + std::to_string(ci) + ": non-manifold face " +
                                   std::to_string(it->second));
        if (f.v0 == a)
          throw std::runtime_error("cell " + std::to_string(ci) +
                                   ": inconsistent orientation on face " + std::to_string(it->second));
        f.right = static_cast<int>(ci);
        cell.faces[e] = it->second;
      }
    }
  }

  for (Face& f : m.faces) {
    const Vec2 a = m.verts[f.v0];
    const Vec2 b = m.verts[f.v1];
    const Vec2 d = b - a;
    f.length = d.norm();
    if (f.length < 1e-14)
      throw std::runtime_error("face between vertices " + std::to_string(f.v0) + " and " +
                               std::to_string(f.v1) + " is degenerate");
    f.midpoint = 0.5 * (a + b);
    f.normal = Vec2(d.y(), -d.x()) / f.length;
  }

  for (size_t ci = 0; ci < m.cells.size(); ++ci) {
    Cell& cell = m.cells[ci];
    const auto p = m.polygon(static_cast<int>(ci));
    cell.area = polygon_signed_area(p);
    if (cell.area <= 0.0)
      throw std::runtime_error("cell " + std::to_string(ci) +
                               ": not counter-clockwise or degenerate (area <= 0)");
    cell.centroid = polygon_area_centroid(p, cell.area);
    cell.diameter = polygon_diameter(p);
  }

  validate(m);
  return m;
}

void validate(const Mesh& m) {
  double cell_area_sum = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const Cell& cell = m.cells[c];
    const auto p = m.polygon(c);
    if (cell.area <= 0.0)
      throw std::runtime_error("cell " + std::to_string(c) + ": area <= 0");
    if (!polygon_simple(p))
      throw std::runtime_error("cell " + std::to_string(c) + ": polygon is not simple");
    cell_area_sum += cell.area;

    // Outward normals and the closed-polygon identity sum_F h_F n_KF = 0.
    Vec2 flux = Vec2::Zero();
    for (int f : cell.faces) {
      const Face& face = m.faces[f];
      const Vec2 n = m.normal(c, f);
      if (std::abs(n.norm() - 1.0) > 1e-12)
        throw std::runtime_error("face " + std::to_string(f) + ": normal not unit length");
      if (n.dot(face.midpoint - cell.centroid) <= 0.0)
        throw std::runtime_error("face " + std::to_string(f) + " of cell " + std::to_string(c) +
                                 ": normal does not point outward");
      flux += face.length * n;
    }
    if (flux.norm() > 1e-12 * std::max(1.0, cell.diameter * cell.vertices.size()))
      throw std::runtime_error("cell " + std::to_string(c) + ": face normals do not close up");
  }

  // Boundary faces, traversed with their stored (left-cell CCW) orientation,
  // must enclose the same area the cells tile.
  double boundary_area2 = 0.0;
  std::vector<int> boundary_degree(m.n_verts(), 0);
  for (const Face& f : m.faces) {
    if (!f.on_boundary()) continue;
    const Vec2 a = m.verts[f.v0];
    const Vec2 b = m.verts[f.v1];
    boundary_area2 += a.x() * b.y() - b.x() * a.y();
    ++boundary_degree[f.v0];
    ++boundary_degree[f.v1];
  }
  for (int v = 0; v < m.n_verts(); ++v)
    if (boundary_degree[v] != 0 && boundary_degree[v] != 2)
      throw std::runtime_error("vertex " + std::to_string(v) +
                               ": boundary faces do not form closed loops");
  const double domain_area = 0.5 * boundary_area2;
  if (std::abs(cell_area_sum - domain_area) > 1e-12 * std::max(1.0, domain_area))
    throw std::runtime_error("cell areas do not tile the domain: sum " +
                             std::to_string(cell_area_sum) + " vs boundary " +
                             std::to_string(domain_area));
}

namespace {

Mesh generate_triangular(int n) {
  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(double(i) / n, double(j) / n);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<std::vector<int>> loops;
  loops.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      loops.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      loops.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return build_mesh(std::move(verts), std::move(loops));
}

// Banded Kershaw-style amplitude: piecewise-linear triangle wave, two full
// periods across the strip, zero at the lateral boundaries. Continuity keeps
// neighbouring columns moving coherently so cell diameters stay O(1/n).
double kershaw_amplitude(double x) {
  const double pi = std::acos(-1.0);
  return (2.0 / pi) * std::asin(std::sin(4.0 * pi * x));
}

Mesh generate_distorted_quad(int n, double distortion) {
  if (distortion < 0.0 || distortion >= 1.0)
    throw std::invalid_argument("distortion must lie in [0,1)");
  const double pi = std::acos(-1.0);
  // The vertical map y -> y + c sin(2 pi y) stays monotone for |c| < 1/(2 pi),
  // which keeps every quad simple for any distortion < 1.
  const double gain = 0.95 / (2.0 * pi);

  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      double x = double(i) / n;
      double y = double(j) / n;
      if (i > 0 && i < n)
        y += distortion * gain * kershaw_amplitude(x) * std::sin(2.0 * pi * y);
      verts.emplace_back(x, y);
    }
  }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<std::vector<int>> loops;
  loops.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      loops.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
  return build_mesh(std::move(verts), std::move(loops));
}

std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, int axis, double bound, int sign) {
  // Keeps the region sign*(p[axis] - bound) <= 0.
  std::vector<Vec2> out;
  const size_t n = poly.size();
  auto inside = [&](const Vec2& p) { return sign * (p[axis] - bound) <= 1e-14; };
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double t = (bound - a[axis]) / (b[axis] - a[axis]);
      Vec2 q = a + t * (b - a);
      q[axis] = bound;
      out.push_back(q);
    }
  }
  return out;
}

std::vector<Vec2> clip_to_unit_square(std::vector<Vec2> poly) {
  poly = clip_halfplane(poly, 0, 0.0, -1);
  poly = clip_halfplane(poly, 0, 1.0, +1);
  poly = clip_halfplane(poly, 1, 0.0, -1);
  poly = clip_halfplane(poly, 1, 1.0, +1);
  // Drop near-duplicate consecutive points introduced by clipping.
  std::vector<Vec2> clean;
  for (const Vec2& p : poly) {
    if (clean.empty() || (p - clean.back()).norm() > 1e-12) clean.push_back(p);
  }
  while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12) clean.pop_back();
  return clean;
}

Mesh generate_hexagonal(int n) {
  // Pointy-top hexagons, row pitch 1.5 r chosen so rows end exactly on
  // y = 0 and y = 1, columns stretched so the staggered rows end flush on
  // x = 0 and x = 1. Boundary cells are then exact half cells, never slivers.
  const double r = 2.0 / (3.0 * n);
  const int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(3.0) * n / 2.0)));
  const double w = 1.0 / cols;

  std::vector<std::vector<Vec2>> polys;
  for (int j = 0; j <= n; ++j) {
    const double cy = 1.5 * r * j;
    const bool offset = (j % 2 == 1);
    const int ilo = 0;
    const int ihi = offset ? cols - 1 : cols;
    for (int i = ilo; i <= ihi; ++i) {
      const double cx = (i + (offset ? 0.5 : 0.0)) * w;
      std::vector<Vec2> hex = {
          {cx + 0.5 * w, cy - 0.5 * r}, {cx + 0.5 * w, cy + 0.5 * r}, {cx, cy + r},
          {cx - 0.5 * w, cy + 0.5 * r}, {cx - 0.5 * w, cy - 0.5 * r}, {cx, cy - r}};
      auto clipped = clip_to_unit_square(std::move(hex));
      if (clipped.size() >= 3 && polygon_signed_area(clipped) > 1e-14) polys.push_back(std::move(clipped));
    }
  }

  // Deduplicate vertices across cells (clipping recomputes shared corners).
  std::vector<Vec2> verts;
  std::unordered_map<std::int64_t, int> vid;
  auto key_of = [](const Vec2& p) {
    const std::int64_t kx = std::llround(p.x() * 1e9);
    const std::int64_t ky = std::llround(p.y() * 1e9);
    return (kx << 32) ^ (ky & 0xffffffff);
  };
  std::vector<std::vector<int>> loops;
  loops.reserve(polys.size());
  for (const auto& poly : polys) {
    std::vector<int> loop;
    for (const Vec2& p : poly) {
      auto [it, inserted] = vid.try_emplace(key_of(p), static_cast<int>(verts.size()));
      if (inserted) verts.push_back(p);
      loop.push_back(it->second);
    }
    loops.push_back(std::move(loop));
  }
  return build_mesh(std::move(verts), std::move(loops));
}

}  // namespace

Mesh generate(MeshFamily family, int n, double distortion) {
  if (n < 1) throw std::invalid_argument("subdivision count must be >= 1");
  switch (family) {
    case MeshFamily::triangular: return generate_triangular(n);
    case MeshFamily::distorted_quad: return generate_distorted_quad(n, distortion);
    case MeshFamily::hexagonal: return generate_hexagonal(n);
  }
  throw std::invalid_argument("invalid mesh family");
}

Mesh load_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++lineno;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos) continue;
      if (line[pos] == '#') continue;
      return line;
    }
    throw std::runtime_error("mesh parse error (line " + std::to_string(lineno) +
                             "): unexpected end of file");
  };
  auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error("mesh parse error (line " + std::to_string(lineno) + "): " + what);
  };

  {
    std::istringstream h(next_line());
    std::string magic;
    int version = 0;
    if (!(h >> magic >> version) || magic != "poly2d" || version != 1)
      throw fail("expected header 'poly2d 1'");
  }

  std::vector<Vec2> verts;
  {
    std::istringstream h(next_line());
    std::string tag;
    int nv = -1;
    if (!(h >> tag >> nv) || tag != "V" || nv < 0) throw fail("expected 'V <count>'");
    verts.reserve(nv);
    for (int i = 0; i < nv; ++i) {
      std::istringstream vl(next_line());
      double x, y;
      if (!(vl >> x >> y)) throw fail("expected 'x y' vertex coordinates");
      verts.emplace_back(x, y);
    }
  }

  std::vector<std::vector<int>> loops;
  {
    std::istringstream h(next_line());
    std::string tag;
    int nc = -1;
    if (!(h >> tag >> nc) || tag != "C" || nc < 0) throw fail("expected 'C <count>'");
    loops.reserve(nc);
    for (int i = 0; i < nc; ++i) {
      std::istringstream cl(next_line());
      int k = 0;
      if (!(cl >> k) || k < 3) throw fail("expected 'k i1 ... ik' with k >= 3");
      std::vector<int> loop(k);
      for (int j = 0; j < k; ++j) {
        if (!(cl >> loop[j])) throw fail("cell has fewer vertex indices than announced");
        if (loop[j] < 0 || loop[j] >= static_cast<int>(verts.size()))
          throw fail("vertex index " + std::to_string(loop[j]) + " out of range");
      }
      loops.push_back(std::move(loop));
    }
  }

  return build_mesh(std::move(verts), std::move(loops));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_mesh(ss.str());
}

std::string save_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  out << "poly2d 1\n";
  out << "V " << mesh.n_verts() << "\n";
  for (const Vec2& v : mesh.verts) out << v.x() << " " << v.y() << "\n";
  out << "C " << mesh.n_cells() << "\n";
  for (const Cell& c : mesh.cells) {
    out << c.vertices.size();
    for (int v : c.vertices) out << " " << v;
    out << "\n";
  }
  return out.str();
}

}  // namespace hho
