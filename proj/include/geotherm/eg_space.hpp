#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>

#include "geotherm/mesh.hpp"
#include "geotherm/quadrature.hpp"

namespace geotherm {

/// Bilinear basis on the reference cell, basis layout (0,0),(1,0),(0,1),(1,1).
inline std::array<double, 4> q1_values(double xi, double eta) {
  return {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
}
inline std::array<Vec2, 4> q1_ref_gradients(double xi, double eta) {
  return {Vec2{-(1 - eta), -(1 - xi)}, Vec2{1 - eta, -xi}, Vec2{-eta, 1 - xi},
          Vec2{eta, xi}};
}

/// Element of V_h = CG-Q1 (+) DG-Q0: nodal coefficients plus cell constants.
struct EGFunction {
  Eigen::VectorXd cg;  // z^c_j, length N_h
  Eigen::VectorXd dg;  // delta z_e, length E_h

  static EGFunction zero(const StructuredMesh& m) {
    return {Eigen::VectorXd::Zero(m.n_vertices()), Eigen::VectorXd::Zero(m.n_cells())};
  }
};

double evaluate(const StructuredMesh& m, const EGFunction& f, int cell, double xi,
                double eta);
/// Physical gradient inside the cell; the DG part contributes nothing.
Vec2 gradient(const StructuredMesh& m, const EGFunction& f, int cell, double xi,
              double eta);

/// Mean of the four CG corner values plus the cell constant (exact on rectangles).
double cell_average(const StructuredMesh& m, const EGFunction& f, int cell);
/// Cell average of the CG part alone.
double cg_cell_average(const StructuredMesh& m, const EGFunction& f, int cell);

struct TraceValues {
  std::array<double, QuadratureRule::n_edge> jump{};
  std::array<double, QuadratureRule::n_edge> average{};
};

/// Jump [[f]] = f|owner - f|neighbor and average {f} at the edge quadrature
/// points; on boundary edges both equal the one-sided trace.
TraceValues jump_average(const StructuredMesh& m, const EGFunction& f, int edge);

/// One-sided trace at arclength fraction s of the edge, from the given cell.
double trace_from(const StructuredMesh& m, const EGFunction& f, const Edge& g,
                  int cell, Face face, double s);

/// m_i = sum_e int_{K_e} phi_i; positive, sums to |Omega|.
Eigen::VectorXd lumped_cg_mass(const StructuredMesh& m);

using ScalarField = std::function<double(const Vec2&)>;

/// Nodal interpolant, DG part zero.
EGFunction interpolate_cg(const StructuredMesh& m, const ScalarField& g);
/// Nodal CG values plus cell constants matching the quadrature cell averages.
EGFunction interpolate_eg(const StructuredMesh& m, const ScalarField& g);

double l2_error(const StructuredMesh& m, const EGFunction& f, const ScalarField& exact);
/// Broken H1 seminorm error; needs the exact gradient.
double h1_error(const StructuredMesh& m, const EGFunction& f,
                const std::function<Vec2(const Vec2&)>& exact_grad);
double integrate(const StructuredMesh& m, const EGFunction& f);

/// EG dof count: N_h CG coefficients followed by E_h cell constants.
inline int eg_dof_count(const StructuredMesh& m) { return m.n_vertices() + m.n_cells(); }

}  // namespace geotherm
