#include "frtsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace frtsim {

void ControllerConfig::validate() const {
  if (k_ovs < 1) throw std::invalid_argument("k_ovs must be at least 1");
  if (!(t_cpu > 0.0)) throw std::invalid_argument("t_cpu must be positive");
  if (!(delta_i_mag > 0.0)) throw std::invalid_argument("delta_i_mag must be positive");
  if (!(l_s > 0.0)) throw std::invalid_argument("l_s must be positive");
  if (!(v_dc > 0.0)) throw std::invalid_argument("v_dc must be positive");
}

ControllerConfig default_controller_config(const PlantParams<double>& plant, const PerUnitBase<double>& base) {
  ControllerConfig cfg;
  cfg.l_s = plant.l_f;
  cfg.r_s = plant.r_f;
  cfg.v_dc = plant.v_dc;
  cfg.v_nominal = plant.v_m;
  cfg.omega_nominal = plant.omega_g;
  cfg.i_ref_dq = Dqd(base.i_base, 0.0);
  cfg.delta_i_mag = 0.1 * base.i_base;

  const double f_sw = 0.5 / cfg.t_cpu;
  const double omega_cc = 2.0 * std::numbers::pi * f_sw / 10.0;
  cfg.pi.kp = cfg.l_s * omega_cc;
  cfg.pi.ki = cfg.pi.kp * omega_cc / 10.0;

  const double omega_n = 2.0 * std::numbers::pi * 20.0;
  const double zeta = 1.0 / std::sqrt(2.0);
  cfg.pll.kp = 2.0 * zeta * omega_n;
  cfg.pll.ki = omega_n * omega_n;
  return cfg;
}

// ---------------------------------------------------------------------------

void sogi_step(SogiState& sogi, double input, double omega, double k, double h) {
  // Trapezoidal integration of
  //   d/dt [v', qv'] = omega * [[-k, -1], [1, 0]] [v', qv'] + [k omega, 0] u.
  Eigen::Matrix2d a;
  a << -k * omega, -omega,
       omega, 0.0;
  const Eigen::Vector2d b(k * omega, 0.0);
  const Eigen::Matrix2d identity = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d lhs = identity - 0.5 * h * a;
  const Eigen::Vector2d rhs = (identity + 0.5 * h * a) * sogi.x + 0.5 * h * b * (sogi.u_prev + input);
  sogi.x = lhs.inverse() * rhs;
  sogi.u_prev = input;
}

AlphaBetad sogi_positive_sequence(const BaseRateState& state) {
  const Eigen::Vector2d& al = state.sogi[0].x;
  const Eigen::Vector2d& be = state.sogi[1].x;
  return AlphaBetad(0.5 * (al(0) - be(1)), 0.5 * (al(1) + be(0)));
}

BaseRateState locked_base_rate_state(const AlphaBetad& v_pcc, double omega, double t) {
  BaseRateState s;
  s.sogi[0].x = Eigen::Vector2d(v_pcc(0), v_pcc(1));
  s.sogi[0].u_prev = v_pcc(0);
  s.sogi[1].x = Eigen::Vector2d(v_pcc(1), -v_pcc(0));
  s.sogi[1].u_prev = v_pcc(1);
  s.pll_theta = wrap_angle(std::atan2(v_pcc(1), v_pcc(0)));
  s.pll_omega = omega;
  s.t_last = t;
  s.started = true;
  return s;
}

void base_rate_task(BaseRateState& state, const ControlSample& held, const ControllerConfig& cfg) {
  const double h = state.started ? held.t - state.t_last : 0.0;
  if (h < 0.0) {
    throw std::invalid_argument("base-rate samples must be time ordered");
  }

  sogi_step(state.sogi[0], held.v_pcc(0), state.pll_omega, cfg.sogi_k, h);
  sogi_step(state.sogi[1], held.v_pcc(1), state.pll_omega, cfg.sogi_k, h);
  const AlphaBetad v_pos = sogi_positive_sequence(state);

  const double theta = wrap_angle(state.pll_theta + state.pll_omega * h);
  const Dqd v_dq = alphabeta_to_dq(v_pos, theta);
  const double magnitude = std::max(v_pos.norm(), 0.05 * cfg.v_nominal);
  const double err = v_dq(1) / magnitude;
  state.pll_integrator += cfg.pll.ki * err * h;
  state.pll_omega = cfg.omega_nominal + cfg.pll.kp * err + state.pll_integrator;
  state.pll_theta = theta;

  state.i_dq = alphabeta_to_dq(held.i_s, theta);
  const Dqd error = cfg.i_ref_dq - state.i_dq;
  const Dqd decoupling = state.pll_omega * cfg.l_s * Dqd(-state.i_dq(1), state.i_dq(0));
  const Dqd unsaturated = cfg.pi.kp * error + state.pi_integrator + decoupling;

  const double limit = cfg.v_dc / std::sqrt(3.0);
  const double norm = unsaturated.norm();
  const Dqd saturated = norm > limit ? Dqd(unsaturated * (limit / norm)) : unsaturated;

  // Back-calculation anti-windup, tracking time constant kp/ki.
  state.pi_integrator += h * (cfg.pi.ki * error + (cfg.pi.ki / cfg.pi.kp) * (saturated - unsaturated));

  state.v_s_ref = dq_to_alphabeta(saturated, theta);
  state.t_last = held.t;
  state.started = true;
}

// ---------------------------------------------------------------------------

ThreePhased offset_injection(const ThreePhased& v_n_ref_abc, double v_dc) {
  const double offset = -0.5 * (v_n_ref_abc.maxCoeff() + v_n_ref_abc.minCoeff());
  const double rail = 0.5 * v_dc;
  return (v_n_ref_abc.array() + offset).cwiseMax(-rail).cwiseMin(rail).matrix();
}

CompareValues refs_to_compare(const ThreePhased& pole_refs, double v_dc, std::int32_t n_pwm) {
  CompareValues cmp{};
  for (int p = 0; p < 3; ++p) {
    const double counts = std::round((pole_refs(p) / v_dc + 0.5) * n_pwm);
    cmp[p] = static_cast<std::int32_t>(std::clamp(counts, 0.0, double(n_pwm)));
  }
  return cmp;
}

CompareValues modulate(const AlphaBetad& v_n_ref, double v_dc, std::int32_t n_pwm) {
  return refs_to_compare(offset_injection(alphabeta_to_abc(v_n_ref), v_dc), v_dc, n_pwm);
}

double remaining_time(int ctr_ovs_w, const ControllerConfig& cfg) {
  if (ctr_ovs_w < 1 || ctr_ovs_w > cfg.k_ovs) {
    throw std::out_of_range("oversampling window index outside [1, k_ovs]");
  }
  return (1.0 - double(ctr_ovs_w) / cfg.k_ovs) * cfg.t_cpu;
}

HighRateOutput high_rate_task(HighRateState& hr, const BaseRateState& br, const ControlSample& sample,
                              const ControllerConfig& cfg, std::int32_t n_pwm) {
  HighRateOutput out;
  const int l = hr.ctr_ovs_w % cfg.k_ovs + 1;
  hr.u_end = l == cfg.k_ovs;

  if (cfg.mode == ControlMode::Dsdu) {
    const bool write = cfg.dsdu_sampling == DsduSampling::LastOvs ? hr.u_end : l == 1;
    if (write) {
      out.shadow_write = modulate(feedforward_compose(br.v_s_ref, sample.v_pcc), cfg.v_dc, n_pwm);
      hr.ff_memory = sample.v_pcc;
    }
    hr.rst = false;
    hr.u_ff = hr.u_end;
    hr.last_disturbance.setZero();
    hr.last_delta_i.setZero();
    hr.ctr_ovs_w = l;
  } else {
    out.shadow_write = modulate(feedforward_compose(br.v_s_ref, sample.v_pcc), cfg.v_dc, n_pwm);
    hr.last_disturbance = estimate_disturbance(hr, sample.v_pcc);
    hr.last_delta_i = estimate_current_change(hr.last_disturbance, remaining_time(l, cfg), cfg);
    hr.rst = decide_reset(hr.last_delta_i, cfg);
    hr.u_ff = hr.u_end || hr.rst;
    if (hr.u_ff) {
      hr.ff_memory = sample.v_pcc;
    }
    hr.ctr_ovs_w = hr.rst ? 1 : l;
  }

  out.rst = hr.rst;
  out.telemetry = HighRateTelemetry{sample.t, hr.ctr_ovs_w, hr.rst, hr.u_end,
                                    hr.last_disturbance, hr.last_delta_i.norm(), out.shadow_write};
  return out;
}

PwmEvents on_reset_actions(PwmPeripheral& pwm) {
  force_reset(pwm);
  PwmEvents events;
  events.events.push_back(PwmEvent{PwmEventKind::ForcedPeak, 0});
  return events;
}

}  // namespace frtsim
