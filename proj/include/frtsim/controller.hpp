#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "frtsim/frames.hpp"
#include "frtsim/plant.hpp"
#include "frtsim/pwm.hpp"

namespace frtsim {

enum class ControlMode : std::uint8_t { Dsdu, Proposed };

/// Where the Dsdu baseline takes the feedforward sample that it writes.
enum class DsduSampling : std::uint8_t { LastOvs, Boundary };

struct PiGains {
  double kp;  // V/A
  double ki;  // V/(A s)
};

struct PllGains {
  double kp;  // rad/s per unit of normalized q-axis voltage
  double ki;  // rad/s^2 per unit
};

struct ControllerConfig {
  ControlMode mode = ControlMode::Proposed;
  DsduSampling dsdu_sampling = DsduSampling::Boundary;
  int k_ovs = 15;
  double t_cpu = 1.0 / 7000.0;  // base-rate period, s
  double l_s = 3.4e-3;          // model inductance, H
  double r_s = 12.5e-3;         // model resistance, ohm
  double delta_i_mag = 0.0;     // current-change threshold, A
  Dqd i_ref_dq = Dqd::Zero();   // A
  PiGains pi{};
  PllGains pll{};
  double sogi_k = std::sqrt(2.0);
  double v_dc = 400.0;
  double v_nominal = 0.0;      // phase peak, V; floors the PLL normalization
  double omega_nominal = 0.0;  // rad/s

  double t_ovs() const { return t_cpu / k_ovs; }
  void validate() const;
};

/// Gains and references for rated injection into the given plant: current loop
/// at f_sw/10, SRF-PLL at 20 Hz with 0.707 damping, threshold 0.1 p.u.
ControllerConfig default_controller_config(const PlantParams<double>& plant, const PerUnitBase<double>& base);

struct ControlSample {
  AlphaBetad v_pcc = AlphaBetad::Zero();
  AlphaBetad i_s = AlphaBetad::Zero();
  double t = 0.0;
};

/// Second-order generalized integrator, states (v', qv').
struct SogiState {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double u_prev = 0.0;
};

struct BaseRateState {
  Dqd pi_integrator = Dqd::Zero();  // V
  double pll_theta = 0.0;           // rad, estimate at t_last
  double pll_omega = 0.0;           // rad/s
  double pll_integrator = 0.0;      // rad/s
  std::array<SogiState, 2> sogi{};  // alpha, beta
  AlphaBetad v_s_ref = AlphaBetad::Zero();
  Dqd i_dq = Dqd::Zero();  // last measured current in the PLL frame
  double t_last = 0.0;
  bool started = false;
};

struct HighRateState {
  AlphaBetad ff_memory = AlphaBetad::Zero();
  int ctr_ovs_w = 1;  // index of the most recent execution within its base period
  bool u_end = false;
  bool u_ff = false;
  bool rst = false;
  AlphaBetad last_disturbance = AlphaBetad::Zero();
  AlphaBetad last_delta_i = AlphaBetad::Zero();
};

struct HighRateTelemetry {
  double t = 0.0;
  int ctr_ovs_w = 0;
  bool rst = false;
  bool u_end = false;
  AlphaBetad delta_v = AlphaBetad::Zero();
  double delta_i_norm = 0.0;
  std::optional<CompareValues> cmp;
};

struct HighRateOutput {
  std::optional<CompareValues> shadow_write;
  bool rst = false;
  HighRateTelemetry telemetry;
};

// Base-rate task ------------------------------------------------------------

/// Positive-sequence voltage extracted from the two SOGI outputs.
AlphaBetad sogi_positive_sequence(const BaseRateState& state);

void sogi_step(SogiState& sogi, double input, double omega, double k, double h);

/// DSOGI + SRF-PLL + synchronous-frame PI with decoupling. Writes the new
/// regulator output v*_s (alpha-beta) into the state.
void base_rate_task(BaseRateState& state, const ControlSample& held, const ControllerConfig& cfg);

/// Steady state for a balanced input of the given alpha-beta voltage and
/// frequency: SOGIs settled, PLL locked, integrators zero.
BaseRateState locked_base_rate_state(const AlphaBetad& v_pcc, double omega, double t);

// High-rate task building blocks ---------------------------------------------

inline AlphaBetad feedforward_compose(const AlphaBetad& v_s_ref, const AlphaBetad& v_pcc_sample) {
  return v_s_ref + v_pcc_sample;
}

/// Min-max zero-sequence injection, then saturation to the DC rails.
ThreePhased offset_injection(const ThreePhased& v_n_ref_abc, double v_dc);

CompareValues refs_to_compare(const ThreePhased& pole_refs, double v_dc, std::int32_t n_pwm);

inline AlphaBetad estimate_disturbance(const HighRateState& hr, const AlphaBetad& v_pcc_sample) {
  return hr.ff_memory - v_pcc_sample;
}

double remaining_time(int ctr_ovs_w, const ControllerConfig& cfg);

inline AlphaBetad estimate_current_change(const AlphaBetad& delta_v, double t_rem, const ControllerConfig& cfg) {
  return (t_rem / cfg.l_s) * delta_v;
}

inline bool decide_reset(const AlphaBetad& delta_i, const ControllerConfig& cfg) {
  return l2_norm(delta_i) > cfg.delta_i_mag;
}

/// Compare values for alpha-beta inverter voltage reference v*_n.
CompareValues modulate(const AlphaBetad& v_n_ref, double v_dc, std::int32_t n_pwm);

/// One oversampling-interrupt execution. In Proposed mode every execution
/// writes the shadow registers and runs the three monitoring sub-blocks. In
/// Dsdu mode a single execution per base period writes: the one at the
/// carrier extreme (Boundary) or the last one before the next extreme
/// (LastOvs).
HighRateOutput high_rate_task(HighRateState& hr, const BaseRateState& br, const ControlSample& sample,
                              const ControllerConfig& cfg, std::int32_t n_pwm);

/// Carrier shift requested by RST: forced counter reset with immediate load.
PwmEvents on_reset_actions(PwmPeripheral& pwm);

}  // namespace frtsim
