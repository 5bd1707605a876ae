#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frtsim/scenario.hpp"
#include "frtsim/trace_io.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kNonFinite = 2;

frtsim::Scenario resolve_scenario(const std::string& name_or_file) {
  if (auto builtin = frtsim::find_builtin(name_or_file)) {
    return *builtin;
  }
  if (std::filesystem::is_regular_file(name_or_file)) {
    return frtsim::load_scenario_file(name_or_file);
  }
  throw std::invalid_argument("no built-in scenario or file named '" + name_or_file + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carrier-resolution fault ride-through simulator"};
  app.require_subcommand(1);

  std::string scenario_arg;
  std::string mode_arg = "both";
  std::string out_dir = ".";
  std::optional<double> fault_align;
  std::vector<std::string> params;
  bool list = false;
  bool telemetry = false;
  bool serial = false;

  CLI::App* run = app.add_subcommand("run", "Simulate a scenario and write traces and a summary");
  run->add_option("--scenario", scenario_arg, "Built-in scenario name or INI scenario file");
  run->add_option("--mode", mode_arg, "dsdu, proposed or both")->check(CLI::IsMember({"dsdu", "proposed", "both"}));
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--fault-align", fault_align, "Fault position within the base period, fraction of T_cpu")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--param", params, "Parameter override section.key=value");
  run->add_flag("--list-scenarios", list, "Print the built-in scenarios and exit");
  run->add_flag("--telemetry", telemetry, "Also write per-execution controller telemetry");
  run->add_flag("--serial", serial, "Run the modes one after another");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  if (list) {
    for (const frtsim::Scenario& s : frtsim::builtin_scenarios()) {
      std::cout << s.name << "\n";
    }
    return 0;
  }
  if (scenario_arg.empty()) {
    std::cerr << "error: --scenario is required\n";
    return kUsageError;
  }

  frtsim::Scenario scenario;
  frtsim::Configuration config = frtsim::default_configuration();
  try {
    scenario = resolve_scenario(scenario_arg);
    if (mode_arg != "both" || scenario.mode == frtsim::ScenarioMode::Both) {
      scenario.mode = frtsim::parse_scenario_mode(mode_arg);
    }
    for (const std::string& p : params) {
      const auto [key, value] = frtsim::split_assignment(p);
      scenario.overrides[key] = value;
    }
    if (fault_align) {
      scenario.overrides["sim.fault_align"] = std::to_string(*fault_align);
    }
    config.sim.record_telemetry = telemetry;
    frtsim::Configuration probe = config;
    for (const auto& [key, value] : scenario.overrides) {
      frtsim::apply_parameter(probe, key, value);
    }
    scenario.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    std::filesystem::create_directories(out_dir);
    const frtsim::ScenarioResult result = frtsim::run_scenario(scenario, config, !serial);
    const std::filesystem::path dir(out_dir);
    for (const frtsim::RunResult& r : result.runs) {
      const std::string stem = scenario.name + "_" + frtsim::mode_name(r.mode);
      frtsim::write_traces(r.trace, dir / (stem + ".csv"));
      if (telemetry) {
        frtsim::write_telemetry(r.telemetry, dir / (stem + "_telemetry.csv"));
      }
      std::printf("%-9s peak %.4f p.u. at %.6f s, rst %d\n", frtsim::mode_name(r.mode).c_str(),
                  r.metrics.peak_current_pu, r.metrics.peak_time, r.metrics.rst_count);
    }
    frtsim::write_summary(result, dir / (scenario.name + "_summary.json"));
  } catch (const frtsim::NonFiniteState& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNonFinite;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return 0;
}
