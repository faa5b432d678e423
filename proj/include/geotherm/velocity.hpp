#pragma once

#include <Eigen/Dense>
#include <functional>

#include "geotherm/mesh.hpp"
#include "geotherm/quadrature.hpp"

namespace geotherm {

/// Discrete Darcy velocity: values at cell quadrature points plus a
/// single-valued normal flux per edge (at the edge quadrature points),
/// oriented along the stored edge normal.
struct VelocityField {
  Eigen::MatrixXd cell_ux, cell_uy;   // n_cells x n_cell_qp
  Eigen::MatrixXd edge_un;            // n_edges x n_edge_qp (single-valued flux)
  Eigen::MatrixXd edge_un_own;        // cell-side velocity trace, owner side
  Eigen::MatrixXd edge_un_nb;         // cell-side velocity trace, neighbor side
  Eigen::VectorXd edge_mean_un;       // mean of edge_un per edge
  Eigen::VectorXd rep_ux, rep_uy;     // representative per-cell vector (export)

  void resize(const StructuredMesh& m) {
    cell_ux.setZero(m.n_cells(), QuadratureRule::n_cell);
    cell_uy.setZero(m.n_cells(), QuadratureRule::n_cell);
    edge_un.setZero(m.n_edges(), QuadratureRule::n_edge);
    edge_un_own.setZero(m.n_edges(), QuadratureRule::n_edge);
    edge_un_nb.setZero(m.n_edges(), QuadratureRule::n_edge);
    edge_mean_un.setZero(m.n_edges());
    rep_ux.setZero(m.n_cells());
    rep_uy.setZero(m.n_cells());
  }

  /// Signed flux integral over the edge, oriented along the edge normal.
  double edge_flux(const StructuredMesh& m, int k) const {
    return edge_mean_un[k] * m.edges[k].length;
  }

  std::vector<double> mean_flux_vector() const {
    return {edge_mean_un.data(), edge_mean_un.data() + edge_mean_un.size()};
  }
};

using VectorField = std::function<Vec2(const Vec2&)>;

/// Sample an analytic velocity at all quadrature points.
VelocityField velocity_from_function(const StructuredMesh& m, const VectorField& u);

inline VelocityField zero_velocity(const StructuredMesh& m) {
  VelocityField v;
  v.resize(m);
  return v;
}

}  // namespace geotherm
