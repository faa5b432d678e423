#include "geotherm/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace geotherm {

StructuredMesh build_mesh(const Extents& ext, int nx, int ny) {
  require(nx >= 1 && ny >= 1, "build_mesh: cell counts must be positive");
  require(ext.x_max > ext.x_min && ext.y_max > ext.y_min,
          "build_mesh: inverted domain extents");

  StructuredMesh m;
  m.x_min = ext.x_min;
  m.x_max = ext.x_max;
  m.y_min = ext.y_min;
  m.y_max = ext.y_max;
  m.nx = nx;
  m.ny = ny;
  m.hx = (ext.x_max - ext.x_min) / nx;
  m.hy = (ext.y_max - ext.y_min) / ny;
  m.h = std::hypot(m.hx, m.hy);

  m.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back({ext.x_min + i * m.hx, ext.y_min + j * m.hy});

  m.cells.reserve(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = m.vertex_id(i, j);
      int v10 = m.vertex_id(i + 1, j);
      int v11 = m.vertex_id(i + 1, j + 1);
      int v01 = m.vertex_id(i, j + 1);
      m.cells.push_back({v00, v10, v11, v01});
    }

  // Vertical edges (normal +-x), then horizontal edges (normal +-y). The
  // interior normal points from the lower-indexed cell into the higher one.
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Edge g;
      g.v0 = m.vertex_id(i, j);
      g.v1 = m.vertex_id(i, j + 1);
      g.length = m.hy;
      if (i == 0) {
        g.owner = m.cell_id(0, j);
        g.owner_face = Face::Left;
        g.normal = {-1, 0};
      } else if (i == nx) {
        g.owner = m.cell_id(nx - 1, j);
        g.owner_face = Face::Right;
        g.normal = {1, 0};
      } else {
        g.owner = m.cell_id(i - 1, j);
        g.neighbor = m.cell_id(i, j);
        g.owner_face = Face::Right;
        g.neighbor_face = Face::Left;
        g.normal = {1, 0};
      }
      m.edges.push_back(g);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Edge g;
      g.v0 = m.vertex_id(i, j);
      g.v1 = m.vertex_id(i + 1, j);
      g.length = m.hx;
      if (j == 0) {
        g.owner = m.cell_id(i, 0);
        g.owner_face = Face::Bottom;
        g.normal = {0, -1};
      } else if (j == ny) {
        g.owner = m.cell_id(i, ny - 1);
        g.owner_face = Face::Top;
        g.normal = {0, 1};
      } else {
        g.owner = m.cell_id(i, j - 1);
        g.neighbor = m.cell_id(i, j);
        g.owner_face = Face::Top;
        g.neighbor_face = Face::Bottom;
        g.normal = {0, 1};
      }
      m.edges.push_back(g);
    }

  m.conn.cells_of_vertex.assign(m.n_vertices(), {});
  for (int e = 0; e < m.n_cells(); ++e)
    for (int v : m.cells[e]) m.conn.cells_of_vertex[v].push_back(e);

  m.conn.vertex_stencil.assign(m.n_vertices(), {});
  for (int v = 0; v < m.n_vertices(); ++v) {
    auto& st = m.conn.vertex_stencil[v];
    for (int e : m.conn.cells_of_vertex[v])
      for (int w : m.cells[e]) st.push_back(w);
    std::sort(st.begin(), st.end());
    st.erase(std::unique(st.begin(), st.end()), st.end());
  }
  return m;
}

PressureBCGeometry all_neumann_geometry() {
  return [](const Vec2&, const Vec2&) { return PressureTag::NeumannP; };
}

PressureBCGeometry all_dirichlet_geometry() {
  return [](const Vec2&, const Vec2&) { return PressureTag::DirichletP; };
}

PressureBCGeometry dirichlet_left_right_geometry(const Extents&) {
  return [](const Vec2&, const Vec2& n) {
    if (std::abs(n.x()) > 0.5) return PressureTag::DirichletP;
    return PressureTag::NeumannP;
  };
}

void classify_edges(StructuredMesh& mesh, const PressureBCGeometry& geometry) {
  for (auto& g : mesh.edges) {
    if (!g.is_boundary()) {
      g.tag = PressureTag::Interior;
      continue;
    }
    Vec2 mid = 0.5 * (mesh.vertices[g.v0] + mesh.vertices[g.v1]);
    auto tag = geometry(mid, g.normal);
    if (!tag || *tag == PressureTag::Interior)
      fail("classify_edges: boundary edge at (" + std::to_string(mid.x()) + "," +
           std::to_string(mid.y()) + ") matches no pressure-BC predicate");
    g.tag = *tag;
  }
}

void classify_flow_edges(StructuredMesh& mesh, const std::vector<double>& edge_mean_flux) {
  require(edge_mean_flux.size() == mesh.edges.size(),
          "classify_flow_edges: flux vector size mismatch");
  for (int k = 0; k < mesh.n_edges(); ++k) {
    Edge& g = mesh.edges[k];
    if (!g.is_boundary()) {
      g.flow = FlowTag::None;
      continue;
    }
    g.flow = edge_mean_flux[k] < 0.0 ? FlowTag::Inflow : FlowTag::Outflow;
  }
}

std::vector<int> cells_near_segment(const StructuredMesh& mesh, const Vec2& p0,
                                    const Vec2& p1, double half_width) {
  require(half_width >= 0.0, "cells_near_segment: negative half_width");
  const Vec2 d = p1 - p0;
  const double len2 = d.squaredNorm();
  std::vector<int> out;
  for (int e = 0; e < mesh.n_cells(); ++e) {
    Vec2 c = mesh.cell_centroid(e);
    double t = len2 > 0.0 ? std::clamp((c - p0).dot(d) / len2, 0.0, 1.0) : 0.0;
    if ((c - (p0 + t * d)).norm() <= half_width) out.push_back(e);
  }
  return out;
}

}  // namespace geotherm
