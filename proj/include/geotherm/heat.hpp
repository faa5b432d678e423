#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geotherm/eg_space.hpp"
#include "geotherm/sparse.hpp"
#include "geotherm/transport.hpp"
#include "geotherm/velocity.hpp"

namespace geotherm {

enum class ModelKind { LTE, TwoTemp, ThreeWay };
enum class TimeScheme { BE, BDF2 };

/// Physical parameters of the heat models and the coefficient functions
/// derived from them. C_i, C_r and the fluid conductivity split degenerate as
/// z -> 0 or 1, so each is floored one-sidedly: the injected coefficients at
/// z = 1 and the resident ones at z = 0 stay exact, which makes the z == 1
/// reduction to the two-temperature model literal.
struct ThermalParameters {
  double phi = 0.5;
  double rho_f = 1.0, c_f = 1.0, lambda_f = 1.0;
  double rho_s = 1.0, c_s = 1.0, lambda_s = 1.0;
  double h_fs_a_fs = 0.0;  // fluid-solid exchange product
  double h_ir_a_ir = 0.0;  // injected-resident exchange product
  double z_floor = 1e-3;

  double C_f() const { return phi * rho_f * c_f; }
  double C_s() const { return (1.0 - phi) * rho_s * c_s; }
  double rho_c_eff() const { return C_f() + C_s(); }
  double lambda_f_eff() const { return phi * lambda_f; }
  double lambda_s_eff() const { return (1.0 - phi) * lambda_s; }
  double lambda_eff() const { return lambda_f_eff() + lambda_s_eff(); }
  /// Interphase relaxation rate h_fs a_fs (1/C_f + 1/C_s).
  double gamma() const { return h_fs_a_fs * (1.0 / C_f() + 1.0 / C_s()); }

  double C_i(double z) const { return phi * std::max(z, z_floor) * rho_f * c_f; }
  double C_r(double z) const { return phi * std::max(1.0 - z, z_floor) * rho_f * c_f; }
  double lambda_i_eff(double z) const { return phi * std::max(z, z_floor) * lambda_f; }
  double lambda_r_eff(double z) const {
    return phi * std::max(1.0 - z, z_floor) * lambda_f;
  }
  double Lambda_is(double z) const { return std::clamp(z, 0.0, 1.0) * h_fs_a_fs; }
  double Lambda_rs(double z) const { return (1.0 - std::clamp(z, 0.0, 1.0)) * h_fs_a_fs; }
  double Lambda_ir(double z) const {
    const double w = std::clamp(z, 0.0, 1.0);
    return phi * w * (1.0 - w) * h_ir_a_ir;
  }
};

inline int n_fields(ModelKind k) {
  return k == ModelKind::LTE ? 1 : k == ModelKind::TwoTemp ? 2 : 3;
}

/// Field order: LTE [T]; TwoTemp [T_f, T_s]; ThreeWay [T_i, T_r, T_s].
struct TemperatureState {
  ModelKind kind = ModelKind::LTE;
  std::vector<EGFunction> fields;
  std::vector<EGFunction> prev, prev2;
  int history_depth = 0;  // 0 initially, 1 after the first step, then 2
  double time = 0.0;

  static TemperatureState initial(const StructuredMesh& m, ModelKind kind,
                                  const std::vector<ScalarField>& ics);
};

using TimeField = std::function<double(const Vec2&, double)>;
using RegionPredicate = std::function<bool(const Vec2&, const Vec2&)>;  // (mid, normal)

/// Boundary data of one temperature field. Dirichlet membership is geometric;
/// the remaining boundary is Neumann with data g = -lambda grad(T).n. The
/// advective inflow value is applied on Inflow-tagged edges.
struct HeatFieldBC {
  RegionPredicate dirichlet_region;  // null -> no Dirichlet edges
  TimeField dirichlet_value;
  TimeField neumann_value;  // null -> zero flux
  TimeField inflow_value;   // null -> dirichlet_value, else zero
};

/// Per-quadrature-point coefficient tables for one field, plus its IP data.
struct FieldCoefficients {
  Eigen::ArrayXXd capacity;        // (n_cells, n_cell_qp)
  Eigen::ArrayXXd adv_weight;      // empty -> field is not advected
  Eigen::ArrayXXd lambda;          // (n_cells, n_cell_qp)
  Eigen::ArrayXXd lambda_edge_own; // (n_edges, n_edge_qp)
  Eigen::ArrayXXd lambda_edge_nb;
  Eigen::ArrayXXd advw_edge_own;   // advection weight traces
  Eigen::ArrayXXd advw_edge_nb;
  Eigen::ArrayXXd advw_edge_in;    // weight paired with inflow data
  double alpha = 10.0;             // IP penalty
  double theta = 0.0;              // IP family parameter (IIPG default)
  HeatFieldBC bc;
  TimeField source;                // q(x,t), null -> zero
};

struct ExchangePair {
  int a = 0, b = 0;
  Eigen::ArrayXXd coeff;  // Lambda at (n_cells, n_cell_qp)
};

struct HeatProblem {
  std::vector<FieldCoefficients> fields;
  std::vector<ExchangePair> exchanges;
  const VelocityField* vel = nullptr;  // null -> no advection at all
};

/// Builds and holds the block sparse system for an n-field EG discretization.
class HeatSystem {
 public:
  HeatSystem(const StructuredMesh& mesh, int n_fields);

  void assemble(const HeatProblem& prob, const TemperatureState& state, double dt,
                TimeScheme scheme, double t_next);

  const SpMat& matrix() const { return A_.matrix(); }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  int field_offset(int f) const { return f * block_; }
  int block_size() const { return block_; }

  Eigen::VectorXd pack(const std::vector<EGFunction>& fields) const;
  std::vector<EGFunction> unpack(const Eigen::VectorXd& x) const;

 private:
  const StructuredMesh& mesh_;
  int nf_;
  int block_;
  SparseAssembler A_;
  Eigen::VectorXd rhs_;
};

/// Coefficient binders for the model families. For ThreeWay the z field is
/// evaluated at the quadrature points of cells and edge sides.
HeatProblem bind_lte(const StructuredMesh&, const ThermalParameters&, const VelocityField*,
                     HeatFieldBC bc, TimeField source, double alpha, double theta = 0.0);
HeatProblem bind_two_temp(const StructuredMesh&, const ThermalParameters&,
                          const VelocityField*, HeatFieldBC bc_f, HeatFieldBC bc_s,
                          TimeField source_f, TimeField source_s, double alpha,
                          double theta = 0.0);
HeatProblem bind_three_way(const StructuredMesh&, const ThermalParameters&,
                           const VelocityField*, const EGFunction& z,
                           std::array<HeatFieldBC, 3> bcs,
                           std::array<TimeField, 3> sources, double alpha,
                           double theta = 0.0, TimeField z_inflow = nullptr,
                           double t_next = 0.0);
/// Constant-coefficient three-field system (the convergence study setting):
/// unit capacities and advection weights for both fluids, no solid advection.
HeatProblem bind_three_constant(const StructuredMesh&, const VelocityField*,
                                double lambda_eff, double exchange,
                                std::array<HeatFieldBC, 3> bcs,
                                std::array<TimeField, 3> sources, double alpha,
                                double theta = 0.0);

/// Implicit stepper: backward Euler on the first step, BDF2 afterwards.
/// When the problem coefficients are static the assembled matrix (and its
/// factorization) is reused across steps per scheme.
class HeatStepper {
 public:
  using ProblemBuilder = std::function<HeatProblem(double t_next)>;

  HeatStepper(const StructuredMesh& mesh, int n_fields, SolverConfig solver,
              bool coefficients_static = false);

  TemperatureState step(const TemperatureState& state, const ProblemBuilder& build,
                        double dt);

  bool force_backward_euler = false;
  const SolveReport& last_report() const { return last_report_; }
  long long total_iterations() const { return total_iterations_; }

 private:
  const StructuredMesh& mesh_;
  HeatSystem system_;
  LinearSolver solver_be_, solver_bdf2_;
  bool static_coeffs_;
  bool be_ready_ = false, bdf2_ready_ = false;
  SolveReport last_report_;
  long long total_iterations_ = 0;
};

/// Capacity-weighted fluid-solid mixture temperature of a two-temperature
/// state (exact EG linear combination).
EGFunction mixture_temperature(const TemperatureState&, const ThermalParameters&);
/// theta = T_f - T_s (or T_s - T_f when solid_minus_fluid).
EGFunction temperature_gap(const TemperatureState&, bool solid_minus_fluid = false);
/// T_f^mix = z T_i + (1-z) T_r evaluated nodewise (vertex values) for export.
EGFunction mixed_fluid_temperature_nodal(const StructuredMesh&, const TemperatureState&,
                                         const EGFunction& z);
double mixed_fluid_temperature_at(const StructuredMesh&, const TemperatureState&,
                                  const EGFunction& z, int cell, double xi, double eta);
/// Quadrature integral of C_i T_i + C_r T_r + C_s T_s (the clamped capacities
/// used in assembly, so conservation audits close).
double total_enthalpy(const StructuredMesh&, const TemperatureState&,
                      const ThermalParameters&, const EGFunction& z);

/// Vertex point values of an EG function: CG value plus the mean of the
/// adjacent cell constants.
Eigen::VectorXd vertex_values(const StructuredMesh&, const EGFunction&);

}  // namespace geotherm
