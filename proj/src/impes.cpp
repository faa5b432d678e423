#include "geotherm/impes.hpp"

#include <chrono>
#include <cmath>

namespace geotherm {

int SimulationConfig::n_steps() const {
  const double ratio = t_final / dt;
  return static_cast<int>(std::llround(ratio));
}

void SimulationConfig::validate() const {
  require(dt > 0.0, "config: time.dt must be positive");
  require(t_final > 0.0, "config: time.t_final must be positive");
  const double ratio = t_final / dt;
  const double n = std::round(ratio);
  require(std::abs(ratio - n) <= 4.0 * n * std::numeric_limits<double>::epsilon(),
          "config: t_final must be an integer multiple of dt");
  require(nx >= 1 && ny >= 1, "config: mesh cell counts must be positive");
  require(static_cast<int>(initial_temps.size()) == n_fields(kind),
          "config: one initial field per temperature unknown required");
  require(temp_bcs.size() == initial_temps.size(), "config: one BC set per field");
  require(cfl_safety > 0.0 && cfl_safety <= 1.0, "config: cfl safety must be in (0,1]");
  solver.validate();
  if (kind == ModelKind::ThreeWay)
    require(static_cast<bool>(z_initial), "config: three-way model needs z initial data");
}

Simulation::Simulation(SimulationConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  mesh_ = build_mesh(cfg_.extents, cfg_.nx, cfg_.ny);
  classify_edges(mesh_, cfg_.pressure_geometry ? cfg_.pressure_geometry
                                               : all_neumann_geometry());
  solve_flow();

  if (cfg_.kind == ModelKind::ThreeWay) {
    TransportParams tp;
    tp.rho_f = cfg_.thermal.rho_f;
    tp.phi = Eigen::VectorXd::Constant(mesh_.n_cells(), cfg_.thermal.phi);
    tp.inflow_value = cfg_.z_inflow;
    tp.source = cfg_.z_source;
    tp.limiting_enabled = cfg_.limiting;
    if (cfg_.constant_coefficient_heat)
      tp.phi = Eigen::VectorXd::Ones(mesh_.n_cells());
    transport_.emplace(mesh_, vel_, tp);

    ConcentrationState z0 = ConcentrationState::from_eg(
        mesh_, interpolate_eg(mesh_, cfg_.z_initial));
    state_.z = std::move(z0);

    const double bound = transport_->cfl_timestep(cfg_.cfl_safety);
    if (!(cfg_.dt <= bound))
      fail("config: dt " + std::to_string(cfg_.dt) +
           " violates the transport CFL bound " + std::to_string(bound));
  }

  state_.temps = TemperatureState::initial(mesh_, cfg_.kind, cfg_.initial_temps);
  const bool static_coeffs =
      cfg_.kind != ModelKind::ThreeWay || cfg_.constant_coefficient_heat;
  heat_.emplace(mesh_, n_fields(cfg_.kind), cfg_.solver, static_coeffs);
  heat_->force_backward_euler = cfg_.force_backward_euler;
}

void Simulation::solve_flow() {
  switch (cfg_.velocity_mode) {
    case VelocityMode::None:
      vel_ = zero_velocity(mesh_);
      break;
    case VelocityMode::Prescribed:
      require(static_cast<bool>(cfg_.prescribed_velocity),
              "config: prescribed velocity mode without a velocity");
      vel_ = velocity_from_function(mesh_, cfg_.prescribed_velocity);
      break;
    case VelocityMode::Darcy: {
      require(static_cast<bool>(cfg_.permeability_builder),
              "config: Darcy mode without a permeability field");
      perm_ = cfg_.permeability_builder(mesh_);
      PressureProblem prob = cfg_.pressure;
      prob.alpha_p = cfg_.alpha_p;
      prob.theta_ip = cfg_.theta_ip;
      state_.pressure = solve_pressure(mesh_, perm_, prob, cfg_.solver);
      vel_ = reconstruct_velocity(mesh_, perm_, state_.pressure, prob);
      ++pressure_solves_;
      break;
    }
  }
  classify_flow_edges(mesh_, vel_.mean_flux_vector());
}

double Simulation::cfl_bound() const {
  return transport_ ? transport_->cfl_timestep(1.0)
                    : std::numeric_limits<double>::infinity();
}

HeatProblem Simulation::build_heat_problem(double t_next) const {
  const VelocityField* vel =
      cfg_.velocity_mode == VelocityMode::None ? nullptr : &vel_;
  const double alpha =
      cfg_.alpha_T > 0.0
          ? cfg_.alpha_T
          : 10.0 * std::max({cfg_.thermal.lambda_f_eff(), cfg_.thermal.lambda_s_eff(),
                             cfg_.constant_coefficient_heat ? cfg_.cc_lambda : 0.0});
  switch (cfg_.kind) {
    case ModelKind::LTE:
      return bind_lte(mesh_, cfg_.thermal, vel, cfg_.temp_bcs[0],
                      cfg_.temp_sources.empty() ? TimeField{} : cfg_.temp_sources[0],
                      alpha, cfg_.theta_ip);
    case ModelKind::TwoTemp:
      return bind_two_temp(mesh_, cfg_.thermal, vel, cfg_.temp_bcs[0], cfg_.temp_bcs[1],
                           cfg_.temp_sources.empty() ? TimeField{} : cfg_.temp_sources[0],
                           cfg_.temp_sources.empty() ? TimeField{} : cfg_.temp_sources[1],
                           alpha, cfg_.theta_ip);
    case ModelKind::ThreeWay: {
      std::array<HeatFieldBC, 3> bcs{cfg_.temp_bcs[0], cfg_.temp_bcs[1], cfg_.temp_bcs[2]};
      std::array<TimeField, 3> src{};
      for (int f = 0; f < 3 && f < static_cast<int>(cfg_.temp_sources.size()); ++f)
        src[f] = cfg_.temp_sources[f];
      if (cfg_.constant_coefficient_heat)
        return bind_three_constant(mesh_, vel, cfg_.cc_lambda, cfg_.cc_exchange, bcs, src,
                                   alpha, cfg_.theta_ip);
      return bind_three_way(mesh_, cfg_.thermal, vel, state_.z->as_eg(mesh_), bcs, src,
                            alpha, cfg_.theta_ip, cfg_.z_inflow, t_next);
    }
  }
  fail("unreachable model kind");
}

void Simulation::advance_one_step() {
  if (cfg_.resolve_pressure_each_step && cfg_.velocity_mode == VelocityMode::Darcy)
    solve_flow();

  // transport first, so the heat stage consumes the freshest concentration
  if (transport_) {
    try {
      state_.z = transport_->ssp_rk2_step(*state_.z, cfg_.dt);
    } catch (const std::exception& e) {
      fail("step " + std::to_string(state_.step) + " transport: " + e.what());
    }
  }
  try {
    if (transport_) state_.heat_saw_z_version = state_.z->version;
    state_.temps =
        heat_->step(state_.temps, [this](double t) { return build_heat_problem(t); },
                    cfg_.dt);
  } catch (const std::exception& e) {
    fail("step " + std::to_string(state_.step) + " heat: " + e.what());
  }
  ++state_.step;
  state_.time = state_.step * cfg_.dt;

  StepRecord rec;
  rec.step = state_.step;
  rec.time = state_.time;
  if (state_.z) {
    rec.has_z = true;
    rec.z_min = state_.z->min_dof();
    rec.z_max = state_.z->max_dof();
    rec.total_mass = (mesh_.hx * mesh_.hy) * state_.z->zbar.sum();
  }
  state_.log.push_back(rec);
}

RunReport Simulation::run(const StepObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = cfg_.n_steps();
  for (int s = 0; s < n; ++s) {
    advance_one_step();
    if (observer) observer(*this);
  }
  RunReport rep;
  rep.steps = n;
  rep.t_final = state_.time;
  rep.pressure_solves = pressure_solves_;
  rep.heat_iterations = heat_iterations();
  rep.median_limiter = limiter_median();
  rep.cfl_bound = cfl_bound();
  if (cfg_.velocity_mode == VelocityMode::Darcy) {
    rep.conservation_residual = check_local_conservation(mesh_, vel_, cfg_.pressure.source);
    rep.global_flux_balance = global_flux_balance(mesh_, vel_, cfg_.pressure.source);
  }
  if (!state_.log.empty() && state_.log.front().has_z) {
    rep.z_min_all = state_.log.front().z_min;
    rep.z_max_all = state_.log.front().z_max;
    for (const auto& r : state_.log) {
      rep.z_min_all = std::min(rep.z_min_all, r.z_min);
      rep.z_max_all = std::max(rep.z_max_all, r.z_max);
    }
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

RunReport run_simulation(const SimulationConfig& cfg,
                         const Simulation::StepObserver& observer) {
  Simulation sim(cfg);
  return sim.run(observer);
}

}  // namespace geotherm
