#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "geotherm/impes.hpp"

namespace geotherm {

/// Serialized run description. Presets are expanded to their full JSON, user
/// keys are merged on top (unknown keys are hard errors), and the result is
/// bound to a SimulationConfig.
struct BuiltConfig {
  std::string scenario;    // empty when no preset was referenced
  nlohmann::json merged;   // full document after preset expansion
  SimulationConfig sim;
};

/// Parses and validates a config document; collects every validation error
/// before failing.
BuiltConfig parse_config_text(const std::string& text);
BuiltConfig parse_config(const std::string& path);

/// Canonical JSON document of a preset (fixed point of parse -> serialize).
nlohmann::json serialize_scenario(const std::string& name);

/// Legacy-VTK structured-points snapshot with the solution fields as point
/// data and permeability / velocity / delta z as cell data.
void write_fields(const Simulation& sim, double time, const std::string& dir);

struct ProbeSpec {
  double y = 0.5;        // axis-aligned midline
  int samples = 201;
  std::vector<std::string> fields;  // subset of {z,T_i,T_r,T_s,T,T_f,T_s2,T_f_mix,p}
};

/// CSV with an x column and one column per field, 12 significant digits.
void write_probe(const Simulation& sim, const ProbeSpec& probe, const std::string& path);

/// Evaluates a field along the midline (clamped into the cell below on mesh
/// lines); used by the probe writer and the physics checks.
std::vector<double> sample_midline(const StructuredMesh& mesh, const EGFunction& f,
                                   double y, int samples);

void write_run_log(const std::vector<StepRecord>& log, const std::string& path);
void write_report(const RunReport& report, const std::string& path);
RunReport read_report(const std::string& path);

void ensure_directory(const std::string& dir);

}  // namespace geotherm
