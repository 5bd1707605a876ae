#include "frtsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace frtsim {

namespace {

using Complex = std::complex<double>;

AlphaBetad to_alphabeta(Complex z) { return AlphaBetad(z.real(), z.imag()); }

int switch_index(const SwitchVector& sw) { return int(sw[0]) | (int(sw[1]) << 1) | (int(sw[2]) << 2); }

}  // namespace

PlantState<double> rated_steady_state(const PlantParams<double>& p, double i_peak, double t) {
  const Complex j(0.0, 1.0);
  const Complex e = std::polar(p.v_m, p.omega_g * t);
  const Complex z_g = p.r_g + j * p.omega_g * p.l_g;
  const Complex y_c = j * p.omega_g * p.c_f;
  Complex v_c = e;
  Complex i_inv = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    i_inv = std::polar(i_peak, std::arg(v_c));
    v_c = (e + z_g * i_inv) / (1.0 + y_c * z_g);
  }
  PlantState<double> s;
  s.x << to_alphabeta(i_inv), to_alphabeta(v_c), to_alphabeta(i_inv - y_c * v_c);
  s.t = t;
  return s;
}

Simulator::Simulator(const PlantParams<double>& plant, const ControllerConfig& cfg, FaultProgram program,
                     const SimulationConfig& sim, const PerUnitBase<double>& base)
    : params_(plant), cfg_(cfg), program_(std::move(program)), sim_(sim), base_(base), network_(plant) {
  params_.validate();
  cfg_.validate();
  if (sim_.plant_step_ticks < 1) {
    throw std::invalid_argument("plant_step_ticks must be at least 1");
  }
  if (!(sim_.fault_align >= 0.0 && sim_.fault_align < 1.0)) {
    throw std::invalid_argument("fault_align must lie in [0, 1)");
  }
  pwm_ = PwmPeripheral::make(sim_.n_pwm, cfg_.k_ovs, cfg_.t_cpu / sim_.n_pwm);
  if (sim_.plant_step_ticks * 8 > pwm_.ovs.n_ovs) {
    throw std::invalid_argument("plant step must not exceed T_ovs / 8");
  }
  t_clk_ = pwm_.carrier.t_clk;

  for (int k = 0; k < 8; ++k) {
    const SwitchVector sw{bool(k & 1), bool(k & 2), bool(k & 4)};
    pole_alphabeta_[k] = abc_to_alphabeta(pole_voltage(sw, params_.v_dc));
  }

  const double grid_period = 2.0 * std::numbers::pi / params_.omega_g;
  const auto base_periods = static_cast<std::int64_t>(std::ceil(sim_.pre_roll_cycles * grid_period / cfg_.t_cpu));
  zero_tick_ = base_periods * sim_.n_pwm + std::llround(sim_.fault_align * sim_.n_pwm);
  for (double td : program_.discontinuities()) {
    discontinuity_ticks_.push_back(zero_tick_ + std::llround(td / t_clk_));
  }

  // Warm start at the rated sinusoidal steady state.
  const double t0 = time_of(0);
  plant_ = rated_steady_state(params_, cfg_.i_ref_dq.norm(), t0);
  br_ = locked_base_rate_state(plant_.v_c(), cfg_.omega_nominal, t0);
  br_.pi_integrator = Dqd(params_.r_f * cfg_.i_ref_dq(0), 0.0);
  hr_.ff_memory = plant_.v_c();
  hr_.ctr_ovs_w = cfg_.k_ovs;

  const Complex j(0.0, 1.0);
  const Complex v_c(plant_.v_c()(0), plant_.v_c()(1));
  const Complex i_inv(plant_.i_inv()(0), plant_.i_inv()(1));
  const Complex v_inv = v_c + (params_.r_f + j * params_.omega_g * params_.l_f) * i_inv;
  write_shadow(pwm_.bank, modulate(to_alphabeta(v_inv), cfg_.v_dc, sim_.n_pwm), sim_.n_pwm);
  pwm_.bank.active = pwm_.bank.shadow;

  result_.mode = cfg_.mode;
  result_.zero_tick = zero_tick_;

  // Tick 0 behaves as a valley that coincides with an oversampling interrupt.
  PwmEvents initial;
  initial.events = {PwmEvent{PwmEventKind::Valley, 0}, PwmEvent{PwmEventKind::OvsInterrupt, 0}};
  process_instant(initial);
}

void Simulator::run_until(double t_end) {
  while (time_of(tick_) < t_end - 0.5 * t_clk_) {
    const std::int64_t n = ticks_to_ovs_interrupt(pwm_.ovs);
    const SwitchVector start = gate_states(pwm_.carrier, pwm_.bank);
    const PwmEvents events = advance(pwm_, n);
    for (const PwmEvent& e : events.events) {
      if ((e.kind == PwmEventKind::Peak || e.kind == PwmEventKind::Valley) && e.offset != n) {
        throw std::logic_error("carrier extreme fell between oversampling interrupts");
      }
    }
    integrate_batch(start, events, n);
    tick_ += n;
    process_instant(events);
  }
}

void Simulator::integrate_batch(const SwitchVector& start, const PwmEvents& events, std::int64_t n_ticks) {
  SwitchVector sw = start;
  auto toggle = events.events.begin();
  const auto toggles_end = events.events.end();
  auto skip_non_toggles = [&] {
    while (toggle != toggles_end && toggle->kind != PwmEventKind::GateToggle) ++toggle;
  };
  skip_non_toggles();

  const std::int64_t step = sim_.plant_step_ticks;
  std::int64_t pos = 0;
  while (pos < n_ticks) {
    std::int64_t next = std::min(n_ticks, (pos / step + 1) * step);
    if (toggle != toggles_end) {
      next = std::min(next, toggle->offset);
    }
    while (next_discontinuity_ < discontinuity_ticks_.size() &&
           discontinuity_ticks_[next_discontinuity_] <= tick_ + pos) {
      ++next_discontinuity_;
    }
    if (next_discontinuity_ < discontinuity_ticks_.size()) {
      next = std::min(next, discontinuity_ticks_[next_discontinuity_] - tick_);
    }

    const double t_start = time_of(tick_ + pos);
    const double t_stop = time_of(tick_ + next);
    plant_.t = t_start;
    const GridRegime regime = program_.regime_at(0.5 * (t_start + t_stop));
    plant_ = step_rk4(plant_, pole_alphabeta_[switch_index(sw)], regime, network_, params_, t_stop - t_start);
    plant_.t = t_stop;
    pos = next;

    while (toggle != toggles_end && toggle->offset == pos) {
      sw[toggle->phase] = toggle->rising;
      ++toggle;
      skip_non_toggles();
    }
  }
}

void Simulator::process_instant(const PwmEvents& events) {
  const bool boundary = events.contains(PwmEventKind::Peak) || events.contains(PwmEventKind::Valley);
  if (boundary) {
    result_.loads.push_back(CompareLoad{tick_, pwm_.bank.active, false});
  }
  if (!events.contains(PwmEventKind::OvsInterrupt)) {
    return;
  }

  const ControlSample sample{plant_.v_c(), plant_.i_inv(), time_of(tick_)};
  if (boundary) {
    base_rate_task(br_, sample, cfg_);
    tracking_.push_back({sample.t, (cfg_.i_ref_dq - br_.i_dq).norm()});
  }

  const HighRateOutput out = high_rate_task(hr_, br_, sample, cfg_, sim_.n_pwm);
  if (out.shadow_write) {
    write_shadow(pwm_.bank, *out.shadow_write, sim_.n_pwm);
  }
  if (out.rst) {
    on_reset_actions(pwm_);
    result_.loads.push_back(CompareLoad{tick_, pwm_.bank.active, true});
    result_.reset_times.push_back(sample.t);
    if (!boundary) {
      base_rate_task(br_, sample, cfg_);
      tracking_.push_back({sample.t, (cfg_.i_ref_dq - br_.i_dq).norm()});
    }
  }
  if (sim_.record_telemetry) {
    result_.telemetry.push_back(out.telemetry);
  }
  record(sample);
}

void Simulator::record(const ControlSample& sample) {
  if (sample.t < -sim_.trace_lead - 0.5 * t_clk_) {
    return;
  }
  TraceRecord r;
  r.t = sample.t;
  r.e_abc = grid_source_voltage(program_, params_, sample.t);
  r.v_pcc = sample.v_pcc;
  r.i_inv = sample.i_s;
  r.i_pu = base_.current_pu(sample.i_s.norm());
  r.rst = hr_.rst;
  r.ctr_ovs_w = hr_.ctr_ovs_w;
  result_.trace.records.push_back(r);
}

RunResult Simulator::finish(double duration) {
  const double grid_period = 2.0 * std::numbers::pi / params_.omega_g;
  result_.metrics = compute_metrics(result_, program_, duration, tracking_, base_.i_base, grid_period);
  RunResult out = std::move(result_);
  result_ = RunResult{};
  return out;
}

Metrics compute_metrics(const RunResult& run, const FaultProgram& program, double duration,
                        const std::vector<std::array<double, 2>>& tracking, double i_base, double grid_period) {
  Metrics m;
  for (const TraceRecord& r : run.trace.records) {
    if (r.t < 0.0 || r.t > duration) continue;
    if (r.i_pu > m.peak_current_pu) {
      m.peak_current_pu = r.i_pu;
      m.peak_time = r.t;
    }
  }
  const double first_fault = program.first_fault_time();
  for (double t : run.reset_times) {
    if (t < 0.0 || t > duration) continue;
    ++m.rst_count;
    if (!std::isnan(first_fault) && t >= first_fault && !m.reaction_latency) {
      m.reaction_latency = t - first_fault;
    }
  }
  double worst = 0.0;
  for (const auto& [t, err] : tracking) {
    if (t >= -grid_period && t < 0.0) {
      worst = std::max(worst, err);
    }
  }
  m.steady_state_current_error_pu = worst / i_base;
  return m;
}

}  // namespace frtsim
