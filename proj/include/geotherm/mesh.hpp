#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "geotherm/common.hpp"

namespace geotherm {

enum class PressureTag { Interior, DirichletP, NeumannP };
enum class FlowTag { None, Inflow, Outflow };

/// Local faces of a rectangular cell in reference coordinates.
enum class Face : int { Left = 0, Right = 1, Bottom = 2, Top = 3 };

struct Edge {
  int v0 = -1, v1 = -1;       // vertex ids
  double length = 0.0;        // h_gamma
  Vec2 normal{0, 0};          // unit normal, owner -> neighbor (or outward on boundary)
  int owner = -1;             // adjacent cell with lower index
  int neighbor = -1;          // -1 on boundary edges
  Face owner_face = Face::Left;
  Face neighbor_face = Face::Left;
  PressureTag tag = PressureTag::Interior;
  FlowTag flow = FlowTag::None;

  bool is_boundary() const { return neighbor < 0; }
};

struct Connectivity {
  std::vector<std::vector<int>> cells_of_vertex;  // E_i
  std::vector<std::vector<int>> vertex_stencil;   // N_i (sorted, contains i)
};

/// Uniform axis-aligned rectangular partition of [x_min,x_max] x [y_min,y_max].
struct StructuredMesh {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;
  double h = 0;  // max cell diameter

  std::vector<Vec2> vertices;               // N_h = (nx+1)(ny+1)
  std::vector<std::array<int, 4>> cells;    // E_h quadruples, counter-clockwise
  std::vector<Edge> edges;
  Connectivity conn;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  int vertex_id(int i, int j) const { return j * (nx + 1) + i; }
  int cell_id(int i, int j) const { return j * nx + i; }
  int cell_i(int e) const { return e % nx; }
  int cell_j(int e) const { return e / nx; }

  double cell_area(int) const { return hx * hy; }
  Vec2 cell_origin(int e) const {
    return {x_min + cell_i(e) * hx, y_min + cell_j(e) * hy};
  }
  Vec2 cell_centroid(int e) const {
    Vec2 o = cell_origin(e);
    return {o.x() + 0.5 * hx, o.y() + 0.5 * hy};
  }
  /// Map reference coordinates in [0,1]^2 to physical coordinates.
  Vec2 map_to_physical(int e, double xi, double eta) const {
    Vec2 o = cell_origin(e);
    return {o.x() + xi * hx, o.y() + eta * hy};
  }
  /// Vertices of cell e in basis layout (0,0), (1,0), (0,1), (1,1).
  std::array<int, 4> basis_vertices(int e) const {
    const auto& c = cells[e];  // ccw: v00 v10 v11 v01
    return {c[0], c[1], c[3], c[2]};
  }
  /// Face-neighbor cells of e (up to 4), -1 where the face is on the boundary.
  std::array<int, 4> face_neighbors(int e) const {
    int i = cell_i(e), j = cell_j(e);
    return {i > 0 ? cell_id(i - 1, j) : -1, i + 1 < nx ? cell_id(i + 1, j) : -1,
            j > 0 ? cell_id(i, j - 1) : -1, j + 1 < ny ? cell_id(i, j + 1) : -1};
  }

  /// Reference coordinates (xi,eta) of the point at arclength fraction s on a face.
  static std::pair<double, double> face_ref_point(Face f, double s) {
    switch (f) {
      case Face::Left: return {0.0, s};
      case Face::Right: return {1.0, s};
      case Face::Bottom: return {s, 0.0};
      case Face::Top: return {s, 1.0};
    }
    return {0, 0};
  }

  Vec2 edge_point(const Edge& g, double s) const {
    const Vec2& a = vertices[g.v0];
    const Vec2& b = vertices[g.v1];
    return a + s * (b - a);
  }
};

struct Extents {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
};

StructuredMesh build_mesh(const Extents& ext, int nx, int ny);

/// Geometry predicate assigning a pressure tag to every boundary edge.
/// Gets the edge midpoint and outward normal; returns nullopt on no match.
using PressureBCGeometry =
    std::function<std::optional<PressureTag>(const Vec2& mid, const Vec2& normal)>;

PressureBCGeometry all_neumann_geometry();
PressureBCGeometry all_dirichlet_geometry();
/// Dirichlet on x=x_min and x=x_max, Neumann on y=y_min and y=y_max.
PressureBCGeometry dirichlet_left_right_geometry(const Extents& ext);

/// Assign pressure tags (from geometry) and, when edge normal fluxes are
/// available, inflow/outflow tags: edge-mean flux < 0 tags Inflow, >= 0 Outflow.
void classify_edges(StructuredMesh& mesh, const PressureBCGeometry& geometry);
void classify_flow_edges(StructuredMesh& mesh, const std::vector<double>& edge_mean_flux);

/// All cells whose centroid lies within half_width of the segment [p0,p1].
std::vector<int> cells_near_segment(const StructuredMesh& mesh, const Vec2& p0,
                                    const Vec2& p1, double half_width);

}  // namespace geotherm
