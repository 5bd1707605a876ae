#include "frtsim/scenario.hpp"

#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace frtsim {

namespace {

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter " + key + ": not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw std::invalid_argument("parameter " + key + ": not a finite number: '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& key, const std::string& text) {
  const double value = parse_double(key, text);
  if (value != std::floor(value) || std::abs(value) > 2e9) {
    throw std::invalid_argument("parameter " + key + ": not an integer: '" + text + "'");
  }
  return static_cast<int>(value);
}

using Setter = std::function<void(Configuration&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"plant.l_f", [](Configuration& c, const std::string& k, const std::string& v) { c.plant.l_f = parse_double(k, v); }},
      {"plant.r_f", [](Configuration& c, const std::string& k, const std::string& v) { c.plant.r_f = parse_double(k, v); }},
      {"plant.c_f", [](Configuration& c, const std::string& k, const std::string& v) { c.plant.c_f = parse_double(k, v); }},
      {"plant.l_g", [](Configuration& c, const std::string& k, const std::string& v) { c.plant.l_g = parse_double(k, v); }},
      {"plant.r_g", [](Configuration& c, const std::string& k, const std::string& v) { c.plant.r_g = parse_double(k, v); }},
      {"plant.v_dc",
       [](Configuration& c, const std::string& k, const std::string& v) {
         c.plant.v_dc = parse_double(k, v);
         c.controller.v_dc = c.plant.v_dc;
       }},
      {"plant.v_m", [](Configuration& c, const std::string& k, const std::string& v) { c.plant.v_m = parse_double(k, v); }},
      {"plant.omega_g",
       [](Configuration& c, const std::string& k, const std::string& v) { c.plant.omega_g = parse_double(k, v); }},
      {"controller.k_ovs",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.k_ovs = parse_int(k, v); }},
      {"controller.t_cpu",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.t_cpu = parse_double(k, v); }},
      {"controller.l_s",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.l_s = parse_double(k, v); }},
      {"controller.r_s",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.r_s = parse_double(k, v); }},
      {"controller.delta_i_mag",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.delta_i_mag = parse_double(k, v); }},
      {"controller.i_ref_d",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.i_ref_dq(0) = parse_double(k, v); }},
      {"controller.i_ref_q",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.i_ref_dq(1) = parse_double(k, v); }},
      {"controller.kp", [](Configuration& c, const std::string& k, const std::string& v) { c.controller.pi.kp = parse_double(k, v); }},
      {"controller.ki", [](Configuration& c, const std::string& k, const std::string& v) { c.controller.pi.ki = parse_double(k, v); }},
      {"controller.kp_pll",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.pll.kp = parse_double(k, v); }},
      {"controller.ki_pll",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.pll.ki = parse_double(k, v); }},
      {"controller.dsdu_sampling",
       [](Configuration& c, const std::string& k, const std::string& v) {
         if (v == "last_ovs") {
           c.controller.dsdu_sampling = DsduSampling::LastOvs;
         } else if (v == "boundary") {
           c.controller.dsdu_sampling = DsduSampling::Boundary;
         } else {
           throw std::invalid_argument("parameter " + k + ": expected last_ovs or boundary");
         }
       }},
      {"controller.sogi_k",
       [](Configuration& c, const std::string& k, const std::string& v) { c.controller.sogi_k = parse_double(k, v); }},
      {"sim.n_pwm", [](Configuration& c, const std::string& k, const std::string& v) { c.sim.n_pwm = parse_int(k, v); }},
      {"sim.plant_step_ticks",
       [](Configuration& c, const std::string& k, const std::string& v) { c.sim.plant_step_ticks = parse_int(k, v); }},
      {"sim.pre_roll_cycles",
       [](Configuration& c, const std::string& k, const std::string& v) { c.sim.pre_roll_cycles = parse_double(k, v); }},
      {"sim.fault_align",
       [](Configuration& c, const std::string& k, const std::string& v) { c.sim.fault_align = parse_double(k, v); }},
      {"sim.trace_lead",
       [](Configuration& c, const std::string& k, const std::string& v) { c.sim.trace_lead = parse_double(k, v); }},
  };
  return table;
}

FaultEvent parse_fault_section(const std::string& section, const boost::property_tree::ptree& tree) {
  const std::string kind = tree.get<std::string>("kind", "");
  const double t_start = parse_double(section + ".t_start", tree.get<std::string>("t_start", "0"));
  const double t_end = parse_double(section + ".t_end", tree.get<std::string>("t_end", std::to_string(t_start)));
  if (kind == "symmetric_sag") {
    return FaultEvent{t_start, t_end, SymmetricSag{parse_double(section + ".depth", tree.get<std::string>("depth", ""))}};
  }
  if (kind == "ab_short") {
    return FaultEvent{t_start, t_end, PhaseABShort{}};
  }
  if (kind == "phase_jump") {
    const double deg = parse_double(section + ".delta_deg", tree.get<std::string>("delta_deg", ""));
    return FaultEvent{t_start, t_start, PhaseJump{deg * std::numbers::pi / 180.0}};
  }
  throw std::invalid_argument(section + ": unknown fault kind '" + kind + "'");
}

}  // namespace

void Scenario::validate() const {
  if (!(duration > 0.0)) {
    throw std::invalid_argument("scenario " + name + ": duration must be positive");
  }
  for (const FaultEvent& e : fault.events()) {
    if (e.t_start < 0.0 || e.t_end > duration) {
      throw std::invalid_argument("scenario " + name + ": fault event outside [0, duration]");
    }
  }
}

Configuration default_configuration() {
  Configuration c;
  c.plant = default_plant_params();
  c.base = rated_peak_base(220.0, 15.0);
  c.controller = default_controller_config(c.plant, c.base);
  c.sim = SimulationConfig{};
  return c;
}

void apply_parameter(Configuration& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) {
    throw std::invalid_argument("unknown parameter '" + key + "'");
  }
  it->second(config, key, value);
}

std::pair<std::string, std::string> split_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  }
  return {assignment.substr(0, eq), assignment.substr(eq + 1)};
}

std::vector<Scenario> builtin_scenarios() {
  const double duration = 0.2;
  std::vector<Scenario> list;
  list.push_back(Scenario{"sym_sag_90", FaultProgram({FaultEvent{0.0, 0.12, SymmetricSag{0.9}}}), duration,
                          ScenarioMode::Both, {}});
  list.push_back(Scenario{"ab_short", FaultProgram({FaultEvent{0.0, 0.12, PhaseABShort{}}}), duration,
                          ScenarioMode::Both, {}});
  list.push_back(Scenario{"jump_neg60", FaultProgram({FaultEvent{0.0, 0.0, PhaseJump{-std::numbers::pi / 3.0}}}),
                          duration, ScenarioMode::Both, {}});
  list.push_back(Scenario{"jump_pos60", FaultProgram({FaultEvent{0.0, 0.0, PhaseJump{std::numbers::pi / 3.0}}}),
                          duration, ScenarioMode::Both, {}});
  return list;
}

std::optional<Scenario> find_builtin(const std::string& name) {
  for (Scenario& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

Scenario load_scenario_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error("cannot read scenario file " + path + ": " + e.message());
  }

  Scenario s;
  s.name = tree.get<std::string>("scenario.name", "custom");
  s.duration = parse_double("scenario.duration", tree.get<std::string>("scenario.duration", "0.2"));
  s.mode = parse_scenario_mode(tree.get<std::string>("scenario.mode", "both"));

  std::vector<FaultEvent> events;
  for (const auto& [section, body] : tree) {
    if (section.rfind("fault", 0) == 0) {
      events.push_back(parse_fault_section(section, body));
    } else if (section == "plant" || section == "controller" || section == "sim") {
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!setters().contains(full)) {
          throw std::invalid_argument(path + ": unknown parameter '" + full + "'");
        }
        s.overrides[full] = value.data();
      }
    } else if (section != "scenario") {
      throw std::invalid_argument(path + ": unknown section [" + section + "]");
    }
  }
  s.fault = FaultProgram(std::move(events));
  s.validate();
  return s;
}

ControlMode parse_mode(const std::string& text) {
  if (text == "dsdu") return ControlMode::Dsdu;
  if (text == "proposed") return ControlMode::Proposed;
  throw std::invalid_argument("unknown mode '" + text + "'");
}

ScenarioMode parse_scenario_mode(const std::string& text) {
  if (text == "both") return ScenarioMode::Both;
  return parse_mode(text) == ControlMode::Dsdu ? ScenarioMode::Dsdu : ScenarioMode::Proposed;
}

std::string mode_name(ControlMode mode) { return mode == ControlMode::Dsdu ? "dsdu" : "proposed"; }

ModeComparison compare_modes(const Metrics& dsdu, const Metrics& proposed) {
  ModeComparison c;
  c.peak_reduction_pu = dsdu.peak_current_pu - proposed.peak_current_pu;
  c.peak_reduction_percent = dsdu.peak_current_pu > 0.0 ? 100.0 * c.peak_reduction_pu / dsdu.peak_current_pu : 0.0;
  c.dsdu_latency = dsdu.reaction_latency;
  c.proposed_latency = proposed.reaction_latency;
  c.dsdu_rst_count = dsdu.rst_count;
  c.proposed_rst_count = proposed.rst_count;
  return c;
}

const RunResult* ScenarioResult::find(ControlMode mode) const {
  for (const RunResult& r : runs) {
    if (r.mode == mode) return &r;
  }
  return nullptr;
}

RunResult run_mode(const Scenario& scenario, const Configuration& config, ControlMode mode) {
  ControllerConfig cfg = config.controller;
  cfg.mode = mode;
  Simulator sim(config.plant, cfg, scenario.fault, config.sim, config.base);
  sim.run_until(scenario.duration);
  return sim.finish(scenario.duration);
}

ScenarioResult run_scenario(const Scenario& scenario, const Configuration& config, bool parallel) {
  scenario.validate();
  ScenarioResult result;
  result.name = scenario.name;
  result.config = config;
  for (const auto& [key, value] : scenario.overrides) {
    apply_parameter(result.config, key, value);
  }

  std::vector<ControlMode> modes;
  if (scenario.mode != ScenarioMode::Proposed) modes.push_back(ControlMode::Dsdu);
  if (scenario.mode != ScenarioMode::Dsdu) modes.push_back(ControlMode::Proposed);

  if (parallel && modes.size() > 1) {
    std::vector<std::future<RunResult>> jobs;
    for (ControlMode mode : modes) {
      jobs.push_back(std::async(std::launch::async, run_mode, std::cref(scenario), std::cref(result.config), mode));
    }
    for (auto& job : jobs) {
      result.runs.push_back(job.get());
    }
  } else {
    for (ControlMode mode : modes) {
      result.runs.push_back(run_mode(scenario, result.config, mode));
    }
  }

  const RunResult* dsdu = result.find(ControlMode::Dsdu);
  const RunResult* proposed = result.find(ControlMode::Proposed);
  if (dsdu && proposed) {
    result.comparison = compare_modes(dsdu->metrics, proposed->metrics);
  }
  return result;
}

}  // namespace frtsim
