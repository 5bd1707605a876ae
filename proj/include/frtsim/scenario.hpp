#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "frtsim/controller.hpp"
#include "frtsim/plant.hpp"
#include "frtsim/simulation.hpp"

namespace frtsim {

enum class ScenarioMode { Dsdu, Proposed, Both };

struct Scenario {
  std::string name;
  FaultProgram fault;
  double duration = 0.2;
  ScenarioMode mode = ScenarioMode::Both;
  std::map<std::string, std::string> overrides;  // "section.key" -> value

  void validate() const;
};

/// Everything a run needs besides the fault program.
struct Configuration {
  PlantParams<double> plant;
  ControllerConfig controller;
  SimulationConfig sim;
  PerUnitBase<double> base;
};

/// 220 V / 15 A rated inverter with peak-valued per-unit bases.
Configuration default_configuration();

/// Applies one "section.key=value" override. Sections are plant, controller
/// and sim. Throws std::invalid_argument for unknown keys or bad values.
void apply_parameter(Configuration& config, const std::string& key, const std::string& value);

/// Parses "section.key=value".
std::pair<std::string, std::string> split_assignment(const std::string& assignment);

std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

/// Reads an INI scenario file with a [scenario] section, one [fault.N]
/// section per event and optional [plant], [controller] and [sim] override
/// sections.
Scenario load_scenario_file(const std::string& path);

ControlMode parse_mode(const std::string& text);
ScenarioMode parse_scenario_mode(const std::string& text);
std::string mode_name(ControlMode mode);

struct ModeComparison {
  double peak_reduction_pu = 0.0;
  double peak_reduction_percent = 0.0;
  std::optional<double> dsdu_latency;
  std::optional<double> proposed_latency;
  int dsdu_rst_count = 0;
  int proposed_rst_count = 0;
};

ModeComparison compare_modes(const Metrics& dsdu, const Metrics& proposed);

struct ScenarioResult {
  std::string name;
  Configuration config;
  std::vector<RunResult> runs;  // in the order Dsdu, Proposed when both run
  std::optional<ModeComparison> comparison;

  const RunResult* find(ControlMode mode) const;
};

/// Single mode over the scenario, including the pre-roll.
RunResult run_mode(const Scenario& scenario, const Configuration& config, ControlMode mode);

/// Runs each requested mode as an independent job. Overrides stored in the
/// scenario are applied on top of config first.
ScenarioResult run_scenario(const Scenario& scenario, const Configuration& config, bool parallel = true);

}  // namespace frtsim
