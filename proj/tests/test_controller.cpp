#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "frtsim/controller.hpp"
#include "frtsim/pwm.hpp"

using namespace frtsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const PerUnitBase<double> kBase = rated_peak_base(220.0, 15.0);

ControllerConfig config(ControlMode mode = ControlMode::Proposed) {
  ControllerConfig cfg = default_controller_config(default_plant_params(), kBase);
  cfg.mode = mode;
  return cfg;
}

AlphaBetad grid(double v_m, double theta) { return AlphaBetad(v_m * std::cos(theta), v_m * std::sin(theta)); }

}  // namespace

TEST_CASE("default controller configuration") {
  const ControllerConfig cfg = config();
  CHECK_NOTHROW(cfg.validate());
  const double omega_cc = 2.0 * std::numbers::pi * 350.0;
  CHECK_THAT(cfg.pi.kp, WithinRel(3.4e-3 * omega_cc, 1e-12));
  CHECK_THAT(cfg.pi.ki, WithinRel(3.4e-3 * omega_cc * omega_cc / 10.0, 1e-12));
  CHECK_THAT(cfg.delta_i_mag, WithinRel(2.1213, 1e-4));
  CHECK_THAT(cfg.t_ovs(), WithinRel(1.0 / 105000.0, 1e-12));
  CHECK_THAT(cfg.pll.kp, WithinRel(2.0 * 0.7071 * 2.0 * std::numbers::pi * 20.0, 1e-4));

  ControllerConfig bad = cfg;
  bad.k_ovs = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.delta_i_mag = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.t_cpu = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("base-rate output is pure decoupling when tracking") {
  const ControllerConfig cfg = config();
  const double theta = 0.7;
  const double v_m = default_plant_params().v_m;
  BaseRateState br = locked_base_rate_state(grid(v_m, theta), cfg.omega_nominal, 0.0);
  const ControlSample sample{grid(v_m, theta), dq_to_alphabeta(cfg.i_ref_dq, theta), 0.0};
  base_rate_task(br, sample, cfg);
  const Dqd v_dq = alphabeta_to_dq(br.v_s_ref, theta);
  CHECK_THAT(v_dq(0), WithinAbs(0.0, 1e-9));
  CHECK_THAT(v_dq(1), WithinRel(cfg.omega_nominal * cfg.l_s * cfg.i_ref_dq(0), 1e-9));
  CHECK(br.pi_integrator.isZero());
}

TEST_CASE("pll locks to a balanced grid") {
  const ControllerConfig cfg = config();
  const double v_m = default_plant_params().v_m;
  BaseRateState br;
  br.pll_omega = cfg.omega_nominal;
  br.pll_theta = 0.6;  // far from the true angle
  const double h = cfg.t_cpu;
  const int samples = int(std::round(10.0 / 60.0 / h));
  for (int k = 0; k <= samples; ++k) {
    const double t = k * h;
    base_rate_task(br, ControlSample{grid(v_m, cfg.omega_nominal * t), AlphaBetad::Zero(), t}, cfg);
  }
  const double truth = wrap_angle(cfg.omega_nominal * samples * h);
  const double err = std::remainder(br.pll_theta - truth, 2.0 * std::numbers::pi);
  CHECK(std::abs(err) < 0.01);
  CHECK(br.pll_theta >= 0.0);
  CHECK(br.pll_theta < 2.0 * std::numbers::pi);
}

TEST_CASE("dsogi extracts the positive sequence") {
  const ControllerConfig cfg = config();
  BaseRateState br;
  const double h = cfg.t_cpu;
  const double w = cfg.omega_nominal;
  // positive sequence 100 V plus negative sequence 40 V
  auto input = [&](double t) {
    return AlphaBetad(100.0 * std::cos(w * t) + 40.0 * std::cos(-w * t),
                      100.0 * std::sin(w * t) + 40.0 * std::sin(-w * t));
  };
  for (int k = 0; k < 700; ++k) {
    const AlphaBetad u = input(k * h);
    sogi_step(br.sogi[0], u(0), w, cfg.sogi_k, k == 0 ? 0.0 : h);
    sogi_step(br.sogi[1], u(1), w, cfg.sogi_k, k == 0 ? 0.0 : h);
  }
  const AlphaBetad pos = sogi_positive_sequence(br);
  CHECK_THAT(pos.norm(), WithinRel(100.0, 1e-3));
  const double t_end = 699 * h;
  CHECK_THAT(std::remainder(std::atan2(pos(1), pos(0)) - w * t_end, 2.0 * std::numbers::pi), WithinAbs(0.0, 1e-3));
}

TEST_CASE("voltage reference saturates with anti-windup") {
  const ControllerConfig cfg = config();
  BaseRateState br = locked_base_rate_state(grid(179.6, 0.0), cfg.omega_nominal, 0.0);
  // current far from reference for many periods
  for (int k = 1; k <= 200; ++k) {
    const double t = k * cfg.t_cpu;
    const double th = cfg.omega_nominal * t;
    base_rate_task(br, ControlSample{grid(179.6, th), dq_to_alphabeta(Dqd(-60.0, 0.0), th), t}, cfg);
    CHECK(br.v_s_ref.norm() <= cfg.v_dc / std::sqrt(3.0) * (1.0 + 1e-12));
  }
  CHECK(br.pi_integrator.norm() < 2.0 * cfg.v_dc);
}

TEST_CASE("base-rate samples must be time ordered") {
  const ControllerConfig cfg = config();
  BaseRateState br = locked_base_rate_state(grid(179.6, 0.0), cfg.omega_nominal, 1.0);
  CHECK_THROWS_AS(base_rate_task(br, ControlSample{grid(179.6, 0.0), AlphaBetad::Zero(), 0.5}, cfg),
                  std::invalid_argument);
}

TEST_CASE("feedforward composition") {
  CHECK(feedforward_compose(AlphaBetad(0, 0), AlphaBetad(100, 0)) == AlphaBetad(100, 0));
  CHECK(feedforward_compose(AlphaBetad(10, 0), AlphaBetad(100, 0)) == AlphaBetad(110, 0));
  CHECK(feedforward_compose(AlphaBetad(3, -4), AlphaBetad(0, 0)) == AlphaBetad(3, -4));
}

TEST_CASE("min-max offset injection") {
  CHECK(offset_injection(ThreePhased(100, -50, -50), 400.0).isApprox(ThreePhased(75, -75, -75)));
  CHECK(offset_injection(ThreePhased::Zero(), 400.0).isZero());
  CHECK(offset_injection(ThreePhased(30, 0, -30), 400.0).isApprox(ThreePhased(30, 0, -30)));
  const ThreePhased clipped = offset_injection(ThreePhased(500, -250, -250), 400.0);
  CHECK(clipped.isApprox(ThreePhased(200, -200, -200)));
}

TEST_CASE("pole references to compare counts") {
  const std::int32_t n = 28560;
  CHECK(refs_to_compare(ThreePhased(0, 200, -200), 400.0, n) == CompareValues{n / 2, n, 0});
  CHECK(refs_to_compare(ThreePhased(1000, -1000, 1.0), 400.0, n) == CompareValues{n, 0, 14351});
  CHECK(modulate(AlphaBetad::Zero(), 400.0, n) == CompareValues{n / 2, n / 2, n / 2});
}

TEST_CASE("disturbance estimate") {
  HighRateState hr;
  hr.ff_memory = AlphaBetad(50, 20);
  CHECK(estimate_disturbance(hr, AlphaBetad(50, 20)).isZero());
  hr.ff_memory = AlphaBetad(179.6, 0);
  const AlphaBetad sag = estimate_disturbance(hr, AlphaBetad(17.96, 0));
  CHECK_THAT(sag(0), WithinAbs(161.64, 1e-9));
  hr.ff_memory = AlphaBetad(0, 179.6);
  CHECK(estimate_disturbance(hr, AlphaBetad(0, -179.6)).isApprox(AlphaBetad(0, 359.2)));

  const double v_m = 220.0 * std::sqrt(2.0) / std::sqrt(3.0);
  hr.ff_memory = AlphaBetad(v_m, 0);
  CHECK_THAT(estimate_disturbance(hr, AlphaBetad(0.1 * v_m, 0))(0), WithinAbs(161.67, 0.01));
}

TEST_CASE("remaining time in the base period") {
  const ControllerConfig cfg = config();
  CHECK(remaining_time(15, cfg) == 0.0);
  CHECK_THAT(remaining_time(1, cfg), WithinRel(14.0 / 15.0 / 7000.0, 1e-12));
  CHECK_THAT(remaining_time(1, cfg), WithinAbs(133.33e-6, 0.01e-6));
  CHECK_THAT(remaining_time(8, cfg), WithinRel(7.0 / 15.0 * cfg.t_cpu, 1e-12));
  CHECK_THROWS_AS(remaining_time(0, cfg), std::out_of_range);
  CHECK_THROWS_AS(remaining_time(16, cfg), std::out_of_range);
}

TEST_CASE("current change estimate and reset decision") {
  const ControllerConfig cfg = config();
  CHECK(estimate_current_change(AlphaBetad::Zero(), 1e-4, cfg).isZero());
  const AlphaBetad di = estimate_current_change(AlphaBetad(161.67, 0), remaining_time(1, cfg), cfg);
  CHECK_THAT(di(0), WithinAbs(6.34, 0.005));
  CHECK(estimate_current_change(AlphaBetad(500, 500), 0.0, cfg).isZero());

  CHECK_FALSE(decide_reset(AlphaBetad::Zero(), cfg));
  CHECK(decide_reset(di, cfg));
  ControllerConfig exact = cfg;
  exact.delta_i_mag = 5.0;
  CHECK_FALSE(decide_reset(AlphaBetad(3.0, 4.0), exact));
  CHECK(decide_reset(AlphaBetad(3.0, 4.0 + 1e-12), exact));
}

TEST_CASE("reset decision is scale consistent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  ControllerConfig cfg = config();
  for (int i = 0; i < 1000; ++i) {
    const AlphaBetad di(u(rng), u(rng));
    const double s = std::exp2(std::round(std::log2(scale(rng))));  // exact in binary
    ControllerConfig scaled = cfg;
    scaled.delta_i_mag = cfg.delta_i_mag * s;
    CHECK(decide_reset(di, cfg) == decide_reset(AlphaBetad(di * s), scaled));
  }
}

TEST_CASE("high-rate task in normal operation") {
  const ControllerConfig cfg = config();
  const double v_m = 179.6;
  BaseRateState br = locked_base_rate_state(grid(v_m, 0.0), cfg.omega_nominal, 0.0);
  HighRateState hr;
  hr.ff_memory = grid(v_m, 0.0);
  hr.ctr_ovs_w = 4;
  const AlphaBetad memory = hr.ff_memory;
  const HighRateOutput out = high_rate_task(hr, br, ControlSample{grid(v_m, 0.002), AlphaBetad::Zero(), 0.0}, cfg,
                                            28560);
  CHECK_FALSE(out.rst);
  CHECK(hr.ctr_ovs_w == 5);
  CHECK(hr.ff_memory == memory);
  REQUIRE(out.shadow_write);
  CHECK(*out.shadow_write == modulate(feedforward_compose(br.v_s_ref, grid(v_m, 0.002)), cfg.v_dc, 28560));
  CHECK(hr.u_ff == (hr.u_end || hr.rst));

  hr.ctr_ovs_w = 14;
  high_rate_task(hr, br, ControlSample{grid(v_m, 0.004), AlphaBetad::Zero(), 0.0}, cfg, 28560);
  CHECK(hr.u_end);
  CHECK(hr.u_ff);
  CHECK(hr.ctr_ovs_w == 15);
  CHECK(hr.ff_memory == grid(v_m, 0.004));

  high_rate_task(hr, br, ControlSample{grid(v_m, 0.005), AlphaBetad::Zero(), 0.0}, cfg, 28560);
  CHECK(hr.ctr_ovs_w == 1);
  CHECK_FALSE(hr.u_end);
}

TEST_CASE("window counter cycles through the base period") {
  const ControllerConfig cfg = config();
  BaseRateState br = locked_base_rate_state(grid(179.6, 0.0), cfg.omega_nominal, 0.0);
  HighRateState hr;
  hr.ff_memory = grid(179.6, 0.0);
  hr.ctr_ovs_w = cfg.k_ovs;
  for (int n = 0; n < 3 * cfg.k_ovs; ++n) {
    high_rate_task(hr, br, ControlSample{grid(179.6, 0.0), AlphaBetad::Zero(), 0.0}, cfg, 28560);
    CHECK(hr.ctr_ovs_w == n % cfg.k_ovs + 1);
    CHECK(hr.u_ff == (hr.u_end || hr.rst));
  }
}

TEST_CASE("fault detected at the second execution") {
  const ControllerConfig cfg = config();
  const double v_m = 179.6;
  BaseRateState br = locked_base_rate_state(grid(v_m, 0.0), cfg.omega_nominal, 0.0);
  HighRateState hr;
  hr.ff_memory = grid(v_m, 0.0);
  hr.ctr_ovs_w = 1;
  const AlphaBetad sagged = 0.1 * grid(v_m, 0.01);
  const HighRateOutput out = high_rate_task(hr, br, ControlSample{sagged, AlphaBetad::Zero(), 0.0}, cfg, 28560);
  CHECK(out.rst);
  CHECK(hr.rst);
  CHECK(hr.u_ff);
  CHECK_FALSE(hr.u_end);
  CHECK(hr.ff_memory == sagged);
  CHECK(hr.ctr_ovs_w == 1);
  CHECK_THAT(out.telemetry.delta_i_norm,
             WithinRel((grid(v_m, 0.0) - sagged).norm() * remaining_time(2, cfg) / cfg.l_s, 1e-12));
}

TEST_CASE("dsdu baseline writes once per base period") {
  for (DsduSampling sampling : {DsduSampling::Boundary, DsduSampling::LastOvs}) {
    ControllerConfig cfg = config(ControlMode::Dsdu);
    cfg.dsdu_sampling = sampling;
    BaseRateState br = locked_base_rate_state(grid(179.6, 0.0), cfg.omega_nominal, 0.0);
    HighRateState hr;
    hr.ctr_ovs_w = cfg.k_ovs;
    int writes = 0;
    for (int n = 0; n < 2 * cfg.k_ovs; ++n) {
      // a deep sag never triggers a reset in this mode
      const HighRateOutput out =
          high_rate_task(hr, br, ControlSample{AlphaBetad(1.0, 0.0), AlphaBetad::Zero(), 0.0}, cfg, 28560);
      CHECK_FALSE(out.rst);
      if (out.shadow_write) {
        ++writes;
        CHECK(hr.ctr_ovs_w == (sampling == DsduSampling::Boundary ? 1 : cfg.k_ovs));
      }
    }
    CHECK(writes == 2);
  }
}

TEST_CASE("reset actions load the fresh shadow values") {
  PwmPeripheral pwm = PwmPeripheral::make(28560, 15, 1e-9);
  pwm.carrier.ctr = 4000;
  write_shadow(pwm.bank, {11, 22, 33}, 28560);
  const PwmEvents ev = on_reset_actions(pwm);
  CHECK(ev.contains(PwmEventKind::ForcedPeak));
  CHECK(pwm.bank.active == CompareValues{11, 22, 33});
  CHECK(pwm.carrier.ctr == 28560);
  CHECK(pwm.carrier.dir == CountDirection::Down);
}
