#include "geotherm/velocity.hpp"

namespace geotherm {

VelocityField velocity_from_function(const StructuredMesh& m, const VectorField& u) {
  const auto& q = quadrature();
  VelocityField v;
  v.resize(m);
  for (int e = 0; e < m.n_cells(); ++e) {
    for (int k = 0; k < QuadratureRule::n_cell; ++k) {
      Vec2 val = u(m.map_to_physical(e, q.cell_x[k], q.cell_y[k]));
      v.cell_ux(e, k) = val.x();
      v.cell_uy(e, k) = val.y();
    }
    Vec2 mid = u(m.cell_centroid(e));
    v.rep_ux[e] = mid.x();
    v.rep_uy[e] = mid.y();
  }
  for (int k = 0; k < m.n_edges(); ++k) {
    const Edge& g = m.edges[k];
    double mean = 0.0;
    for (int s = 0; s < QuadratureRule::n_edge; ++s) {
      double un = u(m.edge_point(g, q.edge_x[s])).dot(g.normal);
      v.edge_un(k, s) = un;
      v.edge_un_own(k, s) = un;
      v.edge_un_nb(k, s) = un;
      mean += q.edge_w[s] * un;
    }
    v.edge_mean_un[k] = mean;
  }
  return v;
}

}  // namespace geotherm
