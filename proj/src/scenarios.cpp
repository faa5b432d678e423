#include "geotherm/scenarios.hpp"

#include <cmath>
#include <cstdio>

namespace geotherm {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Separable product field A(t) B(s) C(r) with s = x + y, r = 2x - y.
// Chain rule: ds = (1,1), dr = (2,-1), so
//   f_x  = A (B'C + 2BC'),  f_y = A (B'C - BC'),
//   lap  = A (2B''C + 2B'C' + 5BC'').
struct Separable {
  std::function<double(double)> A, dA;
  std::function<double(double)> B, dB, d2B;
  std::function<double(double)> C, dC, d2C;

  ManufacturedSolution::Field field() const {
    auto a = A, da = dA, b = B, db = dB, d2b = d2B, c = C, dc = dC, d2c = d2C;
    ManufacturedSolution::Field f;
    f.value = [=](double t, const Vec2& p) {
      return a(t) * b(p.x() + p.y()) * c(2 * p.x() - p.y());
    };
    f.time_derivative = [=](double t, const Vec2& p) {
      return da(t) * b(p.x() + p.y()) * c(2 * p.x() - p.y());
    };
    f.grad = [=](double t, const Vec2& p) {
      const double s = p.x() + p.y(), r = 2 * p.x() - p.y();
      const double bc1 = db(s) * c(r), bc2 = b(s) * dc(r);
      return Vec2{a(t) * (bc1 + 2 * bc2), a(t) * (bc1 - bc2)};
    };
    f.laplacian = [=](double t, const Vec2& p) {
      const double s = p.x() + p.y(), r = 2 * p.x() - p.y();
      return a(t) * (2 * d2b(s) * c(r) + 2 * db(s) * dc(r) + 5 * b(s) * d2c(r));
    };
    return f;
  }
};

double advect(const ManufacturedSolution& ms, const ManufacturedSolution::Field& f,
              double t, const Vec2& x) {
  return ms.velocity(x).dot(f.grad(t, x));
}

}  // namespace

ManufacturedSolution ex1_manufactured() {
  ManufacturedSolution ms;

  Separable z;
  z.A = [](double t) { return std::sin(t); };
  z.dA = [](double t) { return std::cos(t); };
  z.B = [](double s) { return std::sin(kPi * s); };
  z.dB = [](double s) { return kPi * std::cos(kPi * s); };
  z.d2B = [](double s) { return -kPi * kPi * std::sin(kPi * s); };
  z.C = [](double r) { return std::cos(kPi * r); };
  z.dC = [](double r) { return -kPi * std::sin(kPi * r); };
  z.d2C = [](double r) { return -kPi * kPi * std::cos(kPi * r); };
  ms.z = z.field();

  Separable ti;
  ti.A = [](double t) { return std::cos(t); };
  ti.dA = [](double t) { return -std::sin(t); };
  ti.B = [](double s) { return std::cos(2 * kPi * s); };
  ti.dB = [](double s) { return -2 * kPi * std::sin(2 * kPi * s); };
  ti.d2B = [](double s) { return -4 * kPi * kPi * std::cos(2 * kPi * s); };
  ti.C = [](double r) { return std::sin(kPi * r); };
  ti.dC = [](double r) { return kPi * std::cos(kPi * r); };
  ti.d2C = [](double r) { return -kPi * kPi * std::sin(kPi * r); };
  ms.Ti = ti.field();

  Separable tr = z;
  tr.B = [](double s) { return std::sin(2 * kPi * s); };
  tr.dB = [](double s) { return 2 * kPi * std::cos(2 * kPi * s); };
  tr.d2B = [](double s) { return -4 * kPi * kPi * std::sin(2 * kPi * s); };
  ms.Tr = tr.field();

  ms.Ts.value = [](double t, const Vec2& p) { return t * std::sin(p.x() + p.y()); };
  ms.Ts.time_derivative = [](double, const Vec2& p) { return std::sin(p.x() + p.y()); };
  ms.Ts.grad = [](double t, const Vec2& p) {
    const double c = t * std::cos(p.x() + p.y());
    return Vec2{c, c};
  };
  ms.Ts.laplacian = [](double t, const Vec2& p) {
    return -2.0 * t * std::sin(p.x() + p.y());
  };

  ms.velocity = [](const Vec2& p) {
    return Vec2{std::sin(kPi * p.x()) * std::cosh(kPi * (p.y() - 0.5)),
                -std::cos(kPi * p.x()) * std::sinh(kPi * (p.y() - 0.5))};
  };
  return ms;
}

double ManufacturedSolution::q_z(double t, const Vec2& x) const {
  return z.time_derivative(t, x) + advect(*this, z, t, x);
}

double ManufacturedSolution::q_i(double t, const Vec2& x) const {
  return Ti.time_derivative(t, x) + advect(*this, Ti, t, x) -
         lambda_eff * Ti.laplacian(t, x) -
         exchange * (Ts.value(t, x) - Ti.value(t, x)) -
         exchange * (Tr.value(t, x) - Ti.value(t, x));
}

double ManufacturedSolution::q_r(double t, const Vec2& x) const {
  return Tr.time_derivative(t, x) + advect(*this, Tr, t, x) -
         lambda_eff * Tr.laplacian(t, x) -
         exchange * (Ts.value(t, x) - Tr.value(t, x)) -
         exchange * (Ti.value(t, x) - Tr.value(t, x));
}

double ManufacturedSolution::q_s(double t, const Vec2& x) const {
  return Ts.time_derivative(t, x) - lambda_eff * Ts.laplacian(t, x) -
         exchange * (Ti.value(t, x) - Ts.value(t, x)) -
         exchange * (Tr.value(t, x) - Ts.value(t, x));
}

namespace {
Vec2 outward_normal(const Extents& ext, const Vec2& x) {
  const double tolx = 1e-10 * (ext.x_max - ext.x_min);
  const double toly = 1e-10 * (ext.y_max - ext.y_min);
  if (std::abs(x.x() - ext.x_min) < tolx) return {-1, 0};
  if (std::abs(x.x() - ext.x_max) < tolx) return {1, 0};
  if (std::abs(x.y() - ext.y_min) < toly) return {0, -1};
  if (std::abs(x.y() - ext.y_max) < toly) return {0, 1};
  fail("neumann data requested away from the boundary");
}
}  // namespace

TimeField ManufacturedSolution::neumann_data(const Field& f, const Extents& ext) const {
  const double lam = lambda_eff;
  auto grad = f.grad;
  return [lam, grad, ext](const Vec2& x, double t) {
    return -lam * grad(t, x).dot(outward_normal(ext, x));
  };
}

// ---------------------------------------------------------------------------

const std::vector<std::pair<Vec2, Vec2>>& fracture_segments() {
  static const std::vector<std::pair<Vec2, Vec2>> segs = {
      {{1.5, 0.2}, {2.5, 0.8}},   {{2.25, 0.8}, {2.7, 0.4}},  {{2.5, 0.5}, {2.6, 0.8}},
      {{0.0, 0.8}, {0.7, 0.7}},   {{0.0, 0.4}, {1.0, 0.8}},   {{0.75, 0.8}, {1.8, 0.2}},
      {{0.85, 0.6}, {1.5, 0.8}},  {{1.75, 0.9}, {2.9, 0.06}}, {{2.7, 0.1}, {3.5, 0.75}},
      {{2.9, 0.9}, {4.0, 0.3}},   {{2.7, 0.8}, {3.75, 0.6}},  {{3.25, 0.4}, {4.0, 0.45}},
      {{2.8, 0.2}, {4.0, 0.8}},   {{0.0, 0.5}, {1.2, 0.9}},   {{0.5, 0.2}, {2.0, 0.2}},
      {{1.5, 0.4}, {2.8, 0.4}},   {{1.25, 0.5}, {3.0, 0.8}},  {{1.0, 0.6}, {2.5, 0.8}},
      {{0.0, 0.6}, {0.5, 0.8}},   {{0.0, 0.4}, {0.5, 0.9}},   {{0.3, 0.9}, {1.2, 0.5}},
      {{3.0, 0.6}, {3.5, 0.0}},   {{1.7, 0.6}, {2.5, 0.0}},   {{2.0, 0.0}, {4.0, 0.6}},
      {{2.7, 0.6}, {3.5, 0.2}},   {{2.9, 0.15}, {4.0, 0.2}},  {{1.75, 0.1}, {3.0, 0.6}},
      {{0.0, 0.55}, {1.1, 0.8}},  {{0.9, 0.81}, {2.1, 0.8}},  {{2.5, 0.7}, {4.0, 0.15}},
      {{1.1, 0.1}, {1.9, 0.4}},   {{0.0, 0.5}, {0.7, 0.9}},   {{0.0, 0.7}, {1.0, 0.8}},
      {{0.8, 0.8}, {1.7, 0.35}},
  };
  return segs;
}

PermeabilityField fracture_permeability(const StructuredMesh& mesh, double k_fracture,
                                        double k_background, double half_width,
                                        double mu_f) {
  PermeabilityField perm;
  perm.mu_f = mu_f;
  perm.K = Eigen::VectorXd::Constant(mesh.n_cells(), k_background);
  for (const auto& [a, b] : fracture_segments())
    for (int e : cells_near_segment(mesh, a, b, half_width)) perm.K[e] = k_fracture;
  return perm;
}

// ---------------------------------------------------------------------------

namespace {

RegionPredicate left_boundary() {
  return [](const Vec2&, const Vec2& n) { return n.x() < -0.5; };
}

TimeField constant_field(double v) {
  return [v](const Vec2&, double) { return v; };
}

SimulationConfig ex1_config() {
  SimulationConfig cfg;
  cfg.extents = {0, 1, 0, 1};
  cfg.nx = cfg.ny = 8;
  cfg.kind = ModelKind::ThreeWay;
  cfg.constant_coefficient_heat = true;
  cfg.cc_lambda = 0.5;
  cfg.cc_exchange = 0.1;
  cfg.thermal.phi = 1.0;
  cfg.thermal.rho_f = cfg.thermal.c_f = 1.0;

  auto ms = std::make_shared<ManufacturedSolution>(ex1_manufactured());
  cfg.velocity_mode = VelocityMode::Prescribed;
  cfg.prescribed_velocity = ms->velocity;
  cfg.pressure_geometry = all_neumann_geometry();

  cfg.z_initial = [ms](const Vec2& x) { return ms->z.value(0.0, x); };
  cfg.z_inflow = [ms](const Vec2& x, double t) { return ms->z.value(t, x); };
  cfg.z_source = [ms](const Vec2& x, double t) { return ms->q_z(t, x); };

  const std::array<const ManufacturedSolution::Field*, 3> fields = {&ms->Ti, &ms->Tr,
                                                                    &ms->Ts};
  for (int f = 0; f < 3; ++f) {
    const auto* fld = fields[f];
    cfg.initial_temps.push_back([ms, fld](const Vec2& x) { return fld->value(0.0, x); });
    HeatFieldBC bc;
    bc.neumann_value = ms->neumann_data(*fld, cfg.extents);
    if (f < 2)
      bc.inflow_value = [ms, fld](const Vec2& x, double t) { return fld->value(t, x); };
    cfg.temp_bcs.push_back(std::move(bc));
  }
  cfg.temp_sources.push_back([ms](const Vec2& x, double t) { return ms->q_i(t, x); });
  cfg.temp_sources.push_back([ms](const Vec2& x, double t) { return ms->q_r(t, x); });
  cfg.temp_sources.push_back([ms](const Vec2& x, double t) { return ms->q_s(t, x); });

  cfg.dt = 1e-3;
  cfg.t_final = 0.1;
  cfg.solver.method = SolverConfig::Method::DirectLU;
  cfg.solver.rel_tol = 1e-12;
  return cfg;
}

void ex2_shared(SimulationConfig& cfg, bool with_advection) {
  cfg.extents = {0, 4, 0, 1};
  cfg.nx = 128;
  cfg.ny = 32;
  cfg.thermal.phi = 0.5;
  cfg.thermal.rho_f = cfg.thermal.c_f = cfg.thermal.lambda_f = 1.0;
  cfg.thermal.rho_s = cfg.thermal.c_s = cfg.thermal.lambda_s = 1.0;
  cfg.dt = 0.005;
  cfg.t_final = 1.0;
  if (with_advection) {
    cfg.velocity_mode = VelocityMode::Prescribed;
    cfg.prescribed_velocity = [](const Vec2&) { return Vec2{0.5, 0.0}; };
  }
}

SimulationConfig ex2_config(bool fast) {
  SimulationConfig cfg;
  ex2_shared(cfg, false);
  cfg.kind = ModelKind::TwoTemp;
  cfg.thermal.h_fs_a_fs = fast ? 10.0 : 0.001;
  cfg.initial_temps = {[](const Vec2&) { return 100.0; },
                       [](const Vec2&) { return 100.0; }};
  HeatFieldBC bc_f;
  bc_f.dirichlet_region = left_boundary();
  bc_f.dirichlet_value = constant_field(20.0);
  HeatFieldBC bc_s;  // pure Neumann, zero flux
  cfg.temp_bcs = {bc_f, bc_s};
  return cfg;
}

SimulationConfig ex21_config() {
  SimulationConfig cfg;
  ex2_shared(cfg, true);
  cfg.prescribed_velocity = [](const Vec2&) { return Vec2{0.25, 0.0}; };
  cfg.t_final = 8.0;
  cfg.kind = ModelKind::ThreeWay;
  cfg.thermal.h_fs_a_fs = 0.001;
  cfg.thermal.h_ir_a_ir = 1.0;
  cfg.z_initial = [](const Vec2&) { return 0.01; };
  cfg.z_inflow = constant_field(0.99);
  cfg.initial_temps = {[](const Vec2&) { return 20.0; },
                       [](const Vec2&) { return 100.0; },
                       [](const Vec2&) { return 100.0; }};
  HeatFieldBC bc_i;
  bc_i.dirichlet_region = left_boundary();
  bc_i.dirichlet_value = constant_field(20.0);
  bc_i.inflow_value = constant_field(20.0);
  HeatFieldBC bc_r = bc_i;
  HeatFieldBC bc_s;
  cfg.temp_bcs = {bc_i, bc_r, bc_s};
  return cfg;
}

SimulationConfig ex3_config() {
  SimulationConfig cfg;
  cfg.extents = {0, 4, 0, 1};
  cfg.nx = 256;
  cfg.ny = 64;
  cfg.kind = ModelKind::ThreeWay;
  cfg.thermal.phi = 0.5;
  cfg.thermal.rho_f = cfg.thermal.c_f = cfg.thermal.lambda_f = 1.0;
  cfg.thermal.rho_s = cfg.thermal.c_s = cfg.thermal.lambda_s = 2.0;
  cfg.thermal.h_fs_a_fs = 1.0;
  cfg.thermal.h_ir_a_ir = 7.0;
  cfg.dt = 0.005;
  cfg.t_final = 16.0;

  cfg.velocity_mode = VelocityMode::Darcy;
  cfg.permeability_builder = [](const StructuredMesh& m) {
    return fracture_permeability(m, 1.0, 0.01, 0.05, 1.0);
  };
  cfg.pressure_geometry = dirichlet_left_right_geometry(cfg.extents);
  cfg.pressure.dirichlet = [](const Vec2& x) { return x.x() < 2.0 ? 1.0 : 0.0; };
  cfg.pressure.neumann = [](const Vec2&) { return 0.0; };

  cfg.z_initial = [](const Vec2&) { return 0.01; };
  cfg.z_inflow = constant_field(0.99);

  cfg.initial_temps = {[](const Vec2&) { return 20.0; },
                       [](const Vec2&) { return 100.0; },
                       [](const Vec2&) { return 100.0; }};
  HeatFieldBC bc_i;
  bc_i.dirichlet_region = left_boundary();
  bc_i.dirichlet_value = constant_field(20.0);
  bc_i.inflow_value = constant_field(20.0);
  HeatFieldBC bc_r = bc_i;
  HeatFieldBC bc_s;
  cfg.temp_bcs = {bc_i, bc_r, bc_s};
  cfg.temp_sources = {TimeField{}, TimeField{}, constant_field(1.0)};

  cfg.output.vtk_every = 400;  // dt 0.005 -> snapshots at t = 2, 4, ...
  return cfg;
}

}  // namespace

bool is_known_scenario(const std::string& name) {
  return name == "ex1" || name == "ex2-fast" || name == "ex2-slow" || name == "ex2.1" ||
         name == "ex3";
}

SimulationConfig scenario_preset(const std::string& name) {
  if (name == "ex1") return ex1_config();
  if (name == "ex2-fast") return ex2_config(true);
  if (name == "ex2-slow") return ex2_config(false);
  if (name == "ex2.1") return ex21_config();
  if (name == "ex3") return ex3_config();
  fail("unknown scenario preset: " + name);
}

SimulationConfig ex2_lte_comparator(bool fast_exchange, bool with_advection) {
  SimulationConfig cfg;
  ex2_shared(cfg, with_advection);
  cfg.kind = ModelKind::LTE;
  cfg.initial_temps = {[](const Vec2&) { return 100.0; }};
  HeatFieldBC bc;
  bc.dirichlet_region = left_boundary();
  bc.dirichlet_value = constant_field(fast_exchange ? 20.0 : 60.0);
  cfg.temp_bcs = {bc};
  return cfg;
}

SimulationConfig ex2_two_temp(double h_fs, bool with_advection) {
  SimulationConfig cfg = ex2_config(true);
  cfg.thermal.h_fs_a_fs = h_fs;
  if (with_advection) {
    cfg.velocity_mode = VelocityMode::Prescribed;
    cfg.prescribed_velocity = [](const Vec2&) { return Vec2{0.5, 0.0}; };
  }
  return cfg;
}

// ---------------------------------------------------------------------------

ConvergenceTable convergence_study(int levels, bool limiting, int base_cells,
                                   double base_dt, double t_final) {
  require(levels >= 1, "convergence_study: need at least one level");
  ConvergenceTable table;
  auto ms = ex1_manufactured();
  LimiterStats pooled;

  for (int lvl = 1; lvl <= levels; ++lvl) {
    SimulationConfig cfg = ex1_config();
    cfg.nx = cfg.ny = base_cells << (lvl - 1);
    cfg.dt = base_dt / (1 << (lvl - 1));
    cfg.t_final = t_final;
    cfg.limiting = limiting;

    Simulation sim(cfg);
    const StructuredMesh& mesh = sim.mesh();

    std::array<double, 4> l2{}, h1{};  // T_i, T_r, T_s, z
    auto record = [&](double t) {
      const auto& st = sim.state();
      const std::array<const EGFunction*, 4> fh = {
          &st.temps.fields[0], &st.temps.fields[1], &st.temps.fields[2], nullptr};
      const std::array<const ManufacturedSolution::Field*, 4> fx = {&ms.Ti, &ms.Tr,
                                                                    &ms.Ts, &ms.z};
      EGFunction z_eg;
      if (st.z) z_eg = st.z->as_eg(mesh);
      for (int v = 0; v < 4; ++v) {
        const EGFunction& f = v < 3 ? *fh[v] : z_eg;
        const auto* ex = fx[v];
        l2[v] = std::max(l2[v], l2_error(mesh, f, [&](const Vec2& x) {
                           return ex->value(t, x);
                         }));
        h1[v] = std::max(h1[v], h1_error(mesh, f, [&](const Vec2& x) {
                           return ex->grad(t, x);
                         }));
      }
    };
    record(0.0);
    sim.run([&](const Simulation& s) { record(s.state().time); });

    if (sim.transport()) {
      const LimiterStats& st = sim.transport()->stats();
      pooled.total += st.total;
      pooled.below_099 += st.below_099;
      for (int b = 0; b < 1000; ++b) pooled.histogram[b] += st.histogram[b];
    }

    for (int v = 0; v < 4; ++v) {
      ConvergenceRow row;
      row.level = lvl;
      row.l2 = l2[v];
      row.h1 = h1[v];
      if (lvl > 1) {
        const auto& prev = table.rows[v].back();
        row.l2_rate = std::log2(prev.l2 / row.l2);
        row.h1_rate = std::log2(prev.h1 / row.h1);
      }
      table.rows[v].push_back(row);
    }
  }
  table.median_limiter = pooled.median();
  return table;
}

void print_convergence_table(const ConvergenceTable& table) {
  std::printf("%-6s %-6s %14s %8s %14s %8s\n", "Var", "Level", "L2 error", "rate",
              "H1 error", "rate");
  for (int v = 0; v < 4; ++v) {
    for (const auto& r : table.rows[v]) {
      if (r.level == 1)
        std::printf("%-6s %-6d %14.4e %8s %14.4e %8s\n", table.names[v].c_str(), r.level,
                    r.l2, "--", r.h1, "--");
      else
        std::printf("%-6s %-6d %14.4e %8.2f %14.4e %8.2f\n", table.names[v].c_str(),
                    r.level, r.l2, r.l2_rate, r.h1, r.h1_rate);
    }
  }
  std::printf("median limiter coefficient: %.4f\n", table.median_limiter);
}

}  // namespace geotherm
