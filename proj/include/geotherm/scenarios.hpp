#pragma once

#include <array>
#include <vector>

#include "geotherm/impes.hpp"

namespace geotherm {

/// Closed-form fields of the convergence study and their exact derivatives;
/// sources make the constant-coefficient three-field system plus the
/// advection equation hold identically.
struct ManufacturedSolution {
  struct Field {
    std::function<double(double t, const Vec2&)> value;
    std::function<double(double t, const Vec2&)> time_derivative;
    std::function<Vec2(double t, const Vec2&)> grad;
    std::function<double(double t, const Vec2&)> laplacian;
  };

  Field z, Ti, Tr, Ts;
  VectorField velocity;
  double lambda_eff = 0.5;
  double exchange = 0.1;

  double q_z(double t, const Vec2& x) const;
  double q_i(double t, const Vec2& x) const;
  double q_r(double t, const Vec2& x) const;
  double q_s(double t, const Vec2& x) const;

  /// Neumann data g = -lambda grad(T).n with the outward normal inferred
  /// from the position on the rectangle boundary.
  TimeField neumann_data(const Field& f, const Extents& ext) const;
};

ManufacturedSolution ex1_manufactured();

struct ConvergenceRow {
  int level = 0;
  double l2 = 0, l2_rate = 0, h1 = 0, h1_rate = 0;
};

struct ConvergenceTable {
  // variable order: T_i, T_r, T_s, z
  std::array<std::string, 4> names{"T_i", "T_r", "T_s", "z"};
  std::array<std::vector<ConvergenceRow>, 4> rows;
  double median_limiter = 1.0;  // pooled over all levels
};

/// Runs the manufactured-solution study on h = 2^-3 ... halving the time step
/// with each refinement; errors are max over time steps of L2 / broken H1.
ConvergenceTable convergence_study(int levels, bool limiting = true,
                                   int base_cells = 8, double base_dt = 1e-3,
                                   double t_final = 0.1);

void print_convergence_table(const ConvergenceTable& table);

/// The 34 fracture channel segments of the heterogeneous example.
const std::vector<std::pair<Vec2, Vec2>>& fracture_segments();

/// Permeability 1 within half-width 0.1/2 of any channel, 0.01 elsewhere.
PermeabilityField fracture_permeability(const StructuredMesh& mesh,
                                        double k_fracture = 1.0,
                                        double k_background = 0.01,
                                        double half_width = 0.05, double mu_f = 1.0);

/// Named presets: "ex1", "ex2-fast", "ex2-slow", "ex2.1", "ex3".
SimulationConfig scenario_preset(const std::string& name);
bool is_known_scenario(const std::string& name);

/// The LTE comparison runs of the two-temperature study: Dirichlet value 20
/// (fast exchange) or 60 (slow exchange).
SimulationConfig ex2_lte_comparator(bool fast_exchange, bool with_advection);
/// Two-temperature run with a given exchange coefficient (the theta sweep).
SimulationConfig ex2_two_temp(double h_fs, bool with_advection);

}  // namespace geotherm
