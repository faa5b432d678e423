#pragma once

#include <optional>
#include <string>

#include "geotherm/darcy.hpp"
#include "geotherm/heat.hpp"
#include "geotherm/transport.hpp"

namespace geotherm {

enum class VelocityMode { None, Prescribed, Darcy };

struct OutputSpec {
  std::string dir;        // empty -> no file output
  int vtk_every = 0;      // 0 -> no VTK snapshots
  int log_every = 1;      // run-log cadence
  int midline_samples = 0;
};

struct SimulationConfig {
  Extents extents;
  int nx = 1, ny = 1;

  ModelKind kind = ModelKind::LTE;
  ThermalParameters thermal;

  VelocityMode velocity_mode = VelocityMode::None;
  VectorField prescribed_velocity;  // Prescribed mode
  std::function<PermeabilityField(const StructuredMesh&)> permeability_builder;
  PressureBCGeometry pressure_geometry;
  PressureProblem pressure;
  bool resolve_pressure_each_step = false;

  // transport (three-way model only)
  ScalarField z_initial;
  TimeField z_inflow;
  TimeField z_source;
  bool limiting = true;

  // heat
  std::vector<ScalarField> initial_temps;  // per field
  std::vector<HeatFieldBC> temp_bcs;
  std::vector<TimeField> temp_sources;
  bool constant_coefficient_heat = false;  // convergence-study coefficients
  double cc_lambda = 0.5, cc_exchange = 0.1;
  bool force_backward_euler = false;

  double dt = 0.0, t_final = 0.0;

  SolverConfig solver;
  double alpha_p = 0.0;   // 0 -> 10 * max mobility
  double alpha_T = 0.0;   // 0 -> 10 * max effective conductivity
  double theta_ip = 0.0;
  double cfl_safety = 1.0;

  OutputSpec output;

  int n_steps() const;
  void validate() const;
};

struct StepRecord {
  int step = 0;
  double time = 0;
  double z_min = 0, z_max = 0, total_mass = 0;
  bool has_z = false;
};

struct RunReport {
  int steps = 0;
  double t_final = 0;
  double conservation_residual = 0;  // Darcy runs
  double global_flux_balance = 0;
  double z_min_all = 0, z_max_all = 0;
  double cfl_bound = 0;
  int pressure_solves = 0;
  long long heat_iterations = 0;
  double median_limiter = 1.0;
  double wall_seconds = 0;
};

struct TimeLoopState {
  int step = 0;
  double time = 0;
  EGFunction pressure;
  VelocityField velocity;
  std::optional<ConcentrationState> z;
  TemperatureState temps;
  std::vector<StepRecord> log;
  long heat_saw_z_version = -1;  // ordering instrumentation
};

/// Sequential IMPES-type driver: pressure solved implicitly (once, unless
/// re-solving is requested), then per step one explicit SSP-RK2 FCT transport
/// update followed by one implicit heat update.
class Simulation {
 public:
  explicit Simulation(SimulationConfig cfg);

  void advance_one_step();
  using StepObserver = std::function<void(const Simulation&)>;
  RunReport run(const StepObserver& observer = {});

  const SimulationConfig& config() const { return cfg_; }
  const StructuredMesh& mesh() const { return mesh_; }
  const TimeLoopState& state() const { return state_; }
  const VelocityField& velocity() const { return vel_; }
  const PermeabilityField& permeability() const { return perm_; }
  const TransportOperator* transport() const {
    return transport_ ? &*transport_ : nullptr;
  }
  double cfl_bound() const;
  int pressure_solves() const { return pressure_solves_; }
  long long heat_iterations() const {
    return heat_ ? heat_->total_iterations() : 0;
  }
  double limiter_median() const {
    return transport_ ? transport_->stats().median() : 1.0;
  }

 private:
  void solve_flow();
  HeatProblem build_heat_problem(double t_next) const;

  SimulationConfig cfg_;
  StructuredMesh mesh_;
  PermeabilityField perm_;
  VelocityField vel_;
  std::optional<TransportOperator> transport_;
  std::optional<HeatStepper> heat_;
  TimeLoopState state_;
  int pressure_solves_ = 0;
};

RunReport run_simulation(const SimulationConfig& cfg,
                         const Simulation::StepObserver& observer = {});

}  // namespace geotherm
