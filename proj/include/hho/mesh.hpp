// Polygonal mesh container, built-in generators (triangular, distorted
// quadrilateral, hexagon-dominant) and a line-oriented text format.
//
// Meshes are immutable after construction: all topology (faces, normals,
// diameters) is derived from the cell loops once and never mutated, so
// concurrent read access is safe.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hho {

using Vec2 = Eigen::Vector2d;

/// Oriented mesh face (an edge in 2D). The stored normal points out of
/// `left`; the right cell sees its negative.
struct Face {
  int v0 = -1;
  int v1 = -1;
  int left = -1;
  int right = -1;  // -1 on the boundary
  double length = 0.0;
  Vec2 midpoint = Vec2::Zero();
  Vec2 normal = Vec2::Zero();

  bool on_boundary() const { return right < 0; }
};

/// Polygonal cell: counter-clockwise vertex loop plus derived geometry.
struct Cell {
  std::vector<int> vertices;
  std::vector<int> faces;  // loop order: faces[i] joins vertices[i], vertices[i+1]
  double area = 0.0;
  double diameter = 0.0;
  Vec2 centroid = Vec2::Zero();
};

enum class MeshFamily { triangular, distorted_quad, hexagonal };

MeshFamily parse_family(const std::string& name);
std::string family_name(MeshFamily family);

struct Mesh {
  std::vector<Vec2> verts;
  std::vector<Cell> cells;
  std::vector<Face> faces;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_verts() const { return static_cast<int>(verts.size()); }

  /// Outward unit normal of face `f` as seen from cell `c`.
  Vec2 normal(int c, int f) const {
    const Face& fc = faces[f];
    return fc.left == c ? fc.normal : Vec2(-fc.normal);
  }

  /// Vertex coordinates of cell `c`, CCW.
  std::vector<Vec2> polygon(int c) const;

  /// Largest cell diameter.
  double size() const;
};

/// Builds faces, normals and cell geometry from raw vertex loops and checks
/// the mesh invariants. Throws std::runtime_error naming the offending cell
/// or face on topology errors.
Mesh build_mesh(std::vector<Vec2> verts, std::vector<std::vector<int>> loops);

/// Generate one of the built-in unit-square tilings. `n >= 1` is the
/// subdivision count; `distortion` in [0,1) is used by distorted_quad only.
Mesh generate(MeshFamily family, int n, double distortion = 0.0);

/// Parse the poly2d text format. Topology is derived, never read.
Mesh load_mesh(const std::string& text);
Mesh load_mesh_file(const std::string& path);

/// Serialize vertices and cell loops (faces are reconstructed on load).
std::string save_mesh(const Mesh& mesh);

/// Re-checks every mesh invariant; throws with a diagnostic on violation.
/// build_mesh runs this automatically.
void validate(const Mesh& mesh);

}  // namespace hho
