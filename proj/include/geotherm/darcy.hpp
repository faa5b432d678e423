#pragma once

#include "geotherm/eg_space.hpp"
#include "geotherm/sparse.hpp"
#include "geotherm/velocity.hpp"

namespace geotherm {

struct PermeabilityField {
  Eigen::VectorXd K;   // per-cell scalar permeability, strictly positive
  double mu_f = 1.0;   // fluid viscosity

  double mobility(int e) const { return K[e] / mu_f; }
  double max_mobility() const { return K.maxCoeff() / mu_f; }

  static PermeabilityField uniform(const StructuredMesh& m, double k, double mu = 1.0) {
    return {Eigen::VectorXd::Constant(m.n_cells(), k), mu};
  }
  void validate() const {
    require(K.size() > 0 && K.minCoeff() > 0.0 && mu_f > 0.0,
            "permeability: K and mu_f must be strictly positive");
  }
};

using SpaceTimeField = std::function<double(const Vec2&)>;

struct PressureProblem {
  SpaceTimeField dirichlet;       // p_D on DirichletP edges
  SpaceTimeField neumann;         // g_N = u.n on NeumannP edges
  SpaceTimeField source;          // q_p (null means zero)
  double alpha_p = 0.0;           // 0 -> default 10 * max mobility
  double theta_ip = 0.0;          // 0 IIPG, -1 SIPG, +1 NIPG
};

double effective_pressure_penalty(const PermeabilityField& perm,
                                  const PressureProblem& prob);

/// Assembles the interior-penalty bilinear form and load vector into a fresh
/// assembler (pattern built internally).
void assemble_pressure(const StructuredMesh& m, const PermeabilityField& perm,
                       const PressureProblem& prob, SparseAssembler& A,
                       Eigen::VectorXd& rhs);

EGFunction solve_pressure(const StructuredMesh& m, const PermeabilityField& perm,
                          const PressureProblem& prob, const SolverConfig& solver,
                          SolveReport* report = nullptr);

/// Cellwise velocity -kappa grad(p_h) plus the conservative edge fluxes.
VelocityField reconstruct_velocity(const StructuredMesh& m, const PermeabilityField& perm,
                                   const EGFunction& p_h, const PressureProblem& prob);

/// Max over cells of |sum_edges flux - int q_p| / max(1, |q_p|_inf |K_e|).
double check_local_conservation(const StructuredMesh& m, const VelocityField& vel,
                                const SpaceTimeField& q_p,
                                Eigen::VectorXd* per_cell = nullptr);

/// Signed sum of all boundary fluxes minus the total source.
double global_flux_balance(const StructuredMesh& m, const VelocityField& vel,
                           const SpaceTimeField& q_p);

}  // namespace geotherm
