#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>

#include "geotherm/eg_space.hpp"
#include "geotherm/velocity.hpp"

namespace geotherm {

/// Injected-fluid concentration carried as the FCT variable pair: EG cell
/// averages zbar and CG nodal values zc. The DG coefficient is derivable,
/// delta z_e = zbar_e - (cell average of the CG part).
struct ConcentrationState {
  Eigen::VectorXd zbar;  // length E_h
  Eigen::VectorXd zc;    // length N_h
  double time = 0.0;
  long version = 0;  // bumped once per accepted step

  EGFunction as_eg(const StructuredMesh& m) const;
  double min_dof() const { return std::min(zbar.minCoeff(), zc.minCoeff()); }
  double max_dof() const { return std::max(zbar.maxCoeff(), zc.maxCoeff()); }

  static ConcentrationState from_eg(const StructuredMesh& m, const EGFunction& f);
};

struct TransportParams {
  double rho_f = 1.0;
  Eigen::VectorXd phi;  // per-cell porosity
  std::function<double(const Vec2&, double)> inflow_value;  // z_in(x, t)
  std::function<double(const Vec2&, double)> source;        // q_z(x, t), optional
  bool limiting_enabled = true;
  // Jacobi passes recovering the consistent-mass rates inside the lumping
  // correction; one pass leaves an O(h) residue at boundary nodes.
  int mass_fix_passes = 12;
};

/// Aggregate limiter activity over a run; the median test only needs counts
/// around the 0.99 mark plus a fixed-resolution histogram.
struct LimiterStats {
  long long total = 0;
  long long below_099 = 0;
  double min_alpha = 1.0;
  std::array<long long, 1000> histogram{};  // alpha in [0,1], 1e-3 bins

  void record(double alpha) {
    ++total;
    if (alpha < 0.99) ++below_099;
    min_alpha = std::min(min_alpha, alpha);
    int bin = std::min(999, static_cast<int>(alpha * 1000.0));
    ++histogram[bin >= 0 ? bin : 0];
  }
  double median() const;
  void reset() { *this = LimiterStats{}; }
};

struct TransportRhs {
  Eigen::VectorXd abar;   // FV subsystem, length E_h
  Eigen::VectorXd a;      // CG subsystem, length N_h
  Eigen::VectorXd adot;   // mass-lumping correction, length N_h
};

struct TransportLowRhs {
  Eigen::VectorXd abar;
  Eigen::VectorXd a;
};

/// Explicit EG-FCT operator for the advection equation
///   d(phi rho_f z)/dt + div(rho_f z u) = q_z.
class TransportOperator {
 public:
  TransportOperator(const StructuredMesh& mesh, const VelocityField& vel,
                    TransportParams params);

  TransportRhs high_order_rhs(const ConcentrationState& s, double t) const;
  TransportLowRhs low_order_rhs(const ConcentrationState& s, double t) const;

  /// One bound-preserving forward Euler stage (low-order predictor plus
  /// limited antidiffusion). Rejects dt above the CFL bound.
  ConcentrationState fct_limited_step(const ConcentrationState& s, double dt) const;
  ConcentrationState ssp_rk2_step(const ConcentrationState& s, double dt) const;

  /// Positivity bound of the low-order finite volume update; +inf sentinel
  /// when no cell has outgoing flux.
  double cfl_timestep(double safety) const;

  const Eigen::VectorXd& cell_mass() const { return mbar_; }     // phi rho |K_e|
  const Eigen::VectorXd& lumped_mass() const { return ml_; }     // phi rho m_i
  /// Element artificial-diffusion matrices d^e_ij (basis layout, row-major 4x4).
  const Eigen::MatrixXd& artificial_diffusion(int e) const { return d_[e]; }
  const Eigen::MatrixXd& advection_matrix(int e) const { return k_[e]; }

  LimiterStats& stats() const { return stats_; }
  const TransportParams& params() const { return params_; }

 private:
  void source_vectors(double t, Eigen::VectorXd& sbar, Eigen::VectorXd& sc) const;

  const StructuredMesh& mesh_;
  const VelocityField& vel_;
  TransportParams params_;
  Eigen::VectorXd mbar_, ml_;
  std::vector<Eigen::MatrixXd> k_;  // k^e_ij = -int_K rho phi_i u.grad(phi_j)
  std::vector<Eigen::MatrixXd> d_;  // LED artificial diffusion
  mutable LimiterStats stats_;
};

/// Dof arithmetic for the Heun combination; time and version follow the left
/// operand and are fixed up by the caller.
ConcentrationState operator+(const ConcentrationState& a, const ConcentrationState& b);
ConcentrationState operator*(double c, const ConcentrationState& a);

/// SSP-RK2 (Heun) combination of two forward Euler stages of a generic
/// (possibly limited) stage map: 0.5 * (s + FE(FE(s))).
template <class State, class Stage>
State heun_update(const State& s, const Stage& forward_euler_stage, double dt) {
  State s1 = forward_euler_stage(s, dt);
  State s2 = forward_euler_stage(s1, dt);
  return 0.5 * (s + s2);
}

}  // namespace geotherm
