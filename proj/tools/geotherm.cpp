#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>

#include "geotherm/io.hpp"
#include "geotherm/scenarios.hpp"

using namespace geotherm;

namespace {

int run_simulate(const std::string& config_path, const std::string& out_override,
                 int vtk_override) {
  BuiltConfig built = parse_config(config_path);
  SimulationConfig& cfg = built.sim;
  if (!out_override.empty()) cfg.output.dir = out_override;
  if (cfg.output.dir.empty()) cfg.output.dir = [] {
    const char* env = std::getenv("GEOTHERM_OUT");
    return std::string(env ? env : "out");
  }();
  if (vtk_override >= 0) cfg.output.vtk_every = vtk_override;
  ensure_directory(cfg.output.dir);

  std::printf("scenario: %s\n", built.scenario.empty() ? "(custom)" : built.scenario.c_str());
  std::printf("mesh: %d x %d, dt = %g, t_final = %g, steps = %d\n", cfg.nx, cfg.ny,
              cfg.dt, cfg.t_final, cfg.n_steps());

  Simulation sim(cfg);
  if (cfg.output.vtk_every > 0) write_fields(sim, 0.0, cfg.output.dir);
  RunReport rep = sim.run([&](const Simulation& s) {
    const auto& st = s.state();
    if (cfg.output.vtk_every > 0 && st.step % cfg.output.vtk_every == 0)
      write_fields(s, st.time, cfg.output.dir);
  });

  write_run_log(sim.state().log, cfg.output.dir + "/run_log.csv");
  write_report(rep, cfg.output.dir + "/report.txt");
  if (cfg.output.midline_samples > 0) {
    ProbeSpec probe;
    probe.samples = cfg.output.midline_samples;
    probe.y = 0.5 * (cfg.extents.y_min + cfg.extents.y_max);
    if (sim.state().temps.kind == ModelKind::ThreeWay)
      probe.fields = {"z", "T_i", "T_r", "T_s", "T_f_mix"};
    else if (sim.state().temps.kind == ModelKind::TwoTemp)
      probe.fields = {"T_f", "T_s", "T_mix"};
    else
      probe.fields = {"T"};
    write_probe(sim, probe, cfg.output.dir + "/midline.csv");
  }

  std::printf("done: steps = %d, wall = %.2fs\n", rep.steps, rep.wall_seconds);
  if (sim.state().z)
    std::printf("z bounds over run: [%.12g, %.12g]\n", rep.z_min_all, rep.z_max_all);
  if (cfg.velocity_mode == VelocityMode::Darcy)
    std::printf("local conservation residual: %.3e\n", rep.conservation_residual);
  std::printf("report: %s/report.txt\n", cfg.output.dir.c_str());
  return 0;
}

int run_report(const std::string& dir) {
  RunReport rep = read_report(dir + "/report.txt");
  std::printf("run summary (%s)\n", dir.c_str());
  std::printf("  steps            : %d (t_final %.6g)\n", rep.steps, rep.t_final);
  std::printf("  z bounds         : [%.12g, %.12g]\n", rep.z_min_all, rep.z_max_all);
  std::printf("  conservation     : local %.3e, global flux %.3e\n",
              rep.conservation_residual, rep.global_flux_balance);
  std::printf("  pressure solves  : %d\n", rep.pressure_solves);
  std::printf("  heat iterations  : %lld\n", rep.heat_iterations);
  std::printf("  median limiter   : %.4f\n", rep.median_limiter);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EG-FCT simulator for coupled Darcy flow, concentration transport, "
               "and multi-temperature porous-medium heat transfer"};
  app.require_subcommand(1);

  auto* sim_cmd = app.add_subcommand("simulate", "run a scenario from a config file");
  std::string config_path, out_dir;
  int vtk_every = -1;
  sim_cmd->add_option("config", config_path, "JSON config file")->required();
  sim_cmd->add_option("--out", out_dir, "output directory (default $GEOTHERM_OUT or ./out)");
  sim_cmd->add_option("--vtk-every", vtk_every, "write VTK snapshots every N steps");

  auto* conv_cmd =
      app.add_subcommand("convergence", "run the manufactured-solution study");
  int levels = 4;
  conv_cmd->add_option("--levels", levels, "number of refinement levels")
      ->check(CLI::Range(1, 6));

  auto* rep_cmd = app.add_subcommand("report", "summarize a finished run directory");
  std::string run_dir;
  rep_cmd->add_option("rundir", run_dir, "run output directory")->required();

  std::string seed_unused;
  app.add_option("--seed", seed_unused, "reserved; the solver uses no randomness");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) return run_simulate(config_path, out_dir, vtk_every);
    if (*conv_cmd) {
      ConvergenceTable table = convergence_study(levels);
      print_convergence_table(table);
      return 0;
    }
    if (*rep_cmd) return run_report(run_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
