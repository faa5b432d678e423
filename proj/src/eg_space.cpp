#include "geotherm/eg_space.hpp"

#include <cmath>

namespace geotherm {

double evaluate(const StructuredMesh& m, const EGFunction& f, int cell, double xi,
                double eta) {
  require(cell >= 0 && cell < m.n_cells(), "evaluate: cell id out of range");
  auto vs = m.basis_vertices(cell);
  auto phi = q1_values(xi, eta);
  double v = f.dg.size() ? f.dg[cell] : 0.0;
  for (int l = 0; l < 4; ++l) v += f.cg[vs[l]] * phi[l];
  return v;
}

Vec2 gradient(const StructuredMesh& m, const EGFunction& f, int cell, double xi,
              double eta) {
  require(cell >= 0 && cell < m.n_cells(), "gradient: cell id out of range");
  auto vs = m.basis_vertices(cell);
  auto dphi = q1_ref_gradients(xi, eta);
  Vec2 g{0, 0};
  for (int l = 0; l < 4; ++l) g += f.cg[vs[l]] * dphi[l];
  return {g.x() / m.hx, g.y() / m.hy};
}

double cell_average(const StructuredMesh& m, const EGFunction& f, int cell) {
  return cg_cell_average(m, f, cell) + (f.dg.size() ? f.dg[cell] : 0.0);
}

double cg_cell_average(const StructuredMesh& m, const EGFunction& f, int cell) {
  auto vs = m.basis_vertices(cell);
  return 0.25 * (f.cg[vs[0]] + f.cg[vs[1]] + f.cg[vs[2]] + f.cg[vs[3]]);
}

double trace_from(const StructuredMesh& m, const EGFunction& f, const Edge&,
                  int cell, Face face, double s) {
  auto [xi, eta] = StructuredMesh::face_ref_point(face, s);
  return evaluate(m, f, cell, xi, eta);
}

TraceValues jump_average(const StructuredMesh& m, const EGFunction& f, int edge) {
  require(edge >= 0 && edge < m.n_edges(), "jump_average: edge id out of range");
  const Edge& g = m.edges[edge];
  const auto& q = quadrature();
  TraceValues tv;
  for (int s = 0; s < QuadratureRule::n_edge; ++s) {
    double own = trace_from(m, f, g, g.owner, g.owner_face, q.edge_x[s]);
    if (g.is_boundary()) {
      tv.jump[s] = own;
      tv.average[s] = own;
    } else {
      double nb = trace_from(m, f, g, g.neighbor, g.neighbor_face, q.edge_x[s]);
      tv.jump[s] = own - nb;
      tv.average[s] = 0.5 * (own + nb);
    }
  }
  return tv;
}

Eigen::VectorXd lumped_cg_mass(const StructuredMesh& m) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(m.n_vertices());
  const double quarter = 0.25 * m.hx * m.hy;  // int_K phi_i on a rectangle
  for (int e = 0; e < m.n_cells(); ++e)
    for (int v : m.cells[e]) mass[v] += quarter;
  return mass;
}

EGFunction interpolate_cg(const StructuredMesh& m, const ScalarField& g) {
  EGFunction f = EGFunction::zero(m);
  for (int v = 0; v < m.n_vertices(); ++v) f.cg[v] = g(m.vertices[v]);
  return f;
}

EGFunction interpolate_eg(const StructuredMesh& m, const ScalarField& g) {
  EGFunction f = interpolate_cg(m, g);
  const auto& q = quadrature();
  for (int e = 0; e < m.n_cells(); ++e) {
    double avg = 0.0;
    for (int k = 0; k < QuadratureRule::n_cell; ++k)
      avg += q.cell_w[k] * g(m.map_to_physical(e, q.cell_x[k], q.cell_y[k]));
    f.dg[e] = avg - cg_cell_average(m, f, e);
  }
  return f;
}

double l2_error(const StructuredMesh& m, const EGFunction& f, const ScalarField& exact) {
  const auto& q = quadrature();
  const double area = m.hx * m.hy;
  double acc = 0.0;
  for (int e = 0; e < m.n_cells(); ++e) {
    auto vs = m.basis_vertices(e);
    for (int k = 0; k < QuadratureRule::n_cell; ++k) {
      auto phi = q1_values(q.cell_x[k], q.cell_y[k]);
      double v = f.dg.size() ? f.dg[e] : 0.0;
      for (int l = 0; l < 4; ++l) v += f.cg[vs[l]] * phi[l];
      double d = v - exact(m.map_to_physical(e, q.cell_x[k], q.cell_y[k]));
      acc += q.cell_w[k] * area * d * d;
    }
  }
  return std::sqrt(acc);
}

double h1_error(const StructuredMesh& m, const EGFunction& f,
                const std::function<Vec2(const Vec2&)>& exact_grad) {
  const auto& q = quadrature();
  const double area = m.hx * m.hy;
  double acc = 0.0;
  for (int e = 0; e < m.n_cells(); ++e) {
    for (int k = 0; k < QuadratureRule::n_cell; ++k) {
      Vec2 gh = gradient(m, f, e, q.cell_x[k], q.cell_y[k]);
      Vec2 d = gh - exact_grad(m.map_to_physical(e, q.cell_x[k], q.cell_y[k]));
      acc += q.cell_w[k] * area * d.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

double integrate(const StructuredMesh& m, const EGFunction& f) {
  double acc = 0.0;
  for (int e = 0; e < m.n_cells(); ++e) acc += m.cell_area(e) * cell_average(m, f, e);
  return acc;
}

}  // namespace geotherm
