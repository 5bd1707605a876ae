#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "frtsim/controller.hpp"
#include "frtsim/frames.hpp"
#include "frtsim/plant.hpp"
#include "frtsim/pwm.hpp"

namespace frtsim {

struct SimulationConfig {
  std::int32_t n_pwm = 28560;          // carrier peak, counts
  std::int64_t plant_step_ticks = 17;  // RK4 step, T_ovs / 112
  double pre_roll_cycles = 5.0;        // minimum grid cycles simulated before t = 0
  double fault_align = 0.02;           // t = 0 lies this fraction of T_cpu after a base-rate sample
  double trace_lead = 0.02;            // s of pre-fault trace kept
  bool record_telemetry = false;
};

struct TraceRecord {
  double t = 0.0;
  ThreePhased e_abc = ThreePhased::Zero();
  AlphaBetad v_pcc = AlphaBetad::Zero();
  AlphaBetad i_inv = AlphaBetad::Zero();
  double i_pu = 0.0;
  bool rst = false;
  int ctr_ovs_w = 0;
};

struct TraceSet {
  std::vector<TraceRecord> records;
};

/// One transfer of the shadow compares into the active registers.
struct CompareLoad {
  std::int64_t tick = 0;
  CompareValues active{};
  bool forced = false;
};

struct Metrics {
  double peak_current_pu = 0.0;
  double peak_time = 0.0;
  int rst_count = 0;
  std::optional<double> reaction_latency;  // first fault start to first forced reset
  double steady_state_current_error_pu = 0.0;
};

struct RunResult {
  ControlMode mode = ControlMode::Proposed;
  TraceSet trace;
  Metrics metrics;
  std::vector<CompareLoad> loads;
  std::vector<HighRateTelemetry> telemetry;  // filled when record_telemetry is set
  std::vector<double> reset_times;           // scenario time of every forced reset
  std::int64_t zero_tick = 0;
};

/// Sinusoidal steady state of the LCL network with the inverter injecting a
/// current of the given peak amplitude in phase with the PCC voltage.
PlantState<double> rated_steady_state(const PlantParams<double>& p, double i_peak, double t);

/// Event loop coupling the PWM peripheral, the controller tasks and the plant.
///
/// Time advances in batches that end at oversampling interrupts. Within a
/// batch the plant is stepped with RK4 in steps of plant_step_ticks, split at
/// every gate toggle and at every fault discontinuity, so each RK4 step sees
/// one switch vector and one grid regime.
class Simulator {
 public:
  Simulator(const PlantParams<double>& plant, const ControllerConfig& cfg, FaultProgram program,
            const SimulationConfig& sim, const PerUnitBase<double>& base);

  /// Processes interrupt instants until the scenario time reaches t_end.
  void run_until(double t_end);

  double time() const { return time_of(tick_); }
  double time_of(std::int64_t tick) const { return double(tick - zero_tick_) * t_clk_; }
  std::int64_t tick() const { return tick_; }
  std::int64_t zero_tick() const { return zero_tick_; }
  double t_clk() const { return t_clk_; }
  double start_time() const { return time_of(0); }

  const PlantState<double>& plant_state() const { return plant_; }
  const PwmPeripheral& pwm() const { return pwm_; }
  const BaseRateState& base_rate_state() const { return br_; }
  const HighRateState& high_rate_state() const { return hr_; }
  ControllerConfig& controller_config() { return cfg_; }

  /// Base-rate samples of (t, |i*_dq - i_dq|) in amperes.
  const std::vector<std::array<double, 2>>& tracking_history() const { return tracking_; }

  /// Moves the accumulated trace, loads and telemetry out and derives metrics.
  RunResult finish(double duration);

 private:
  void process_instant(const PwmEvents& events);
  void integrate_batch(const SwitchVector& start, const PwmEvents& events, std::int64_t n_ticks);
  void record(const ControlSample& sample);

  PlantParams<double> params_;
  ControllerConfig cfg_;
  FaultProgram program_;
  SimulationConfig sim_;
  PerUnitBase<double> base_;
  LclNetwork<double> network_;
  std::array<AlphaBetad, 8> pole_alphabeta_{};

  double t_clk_ = 0.0;
  std::int64_t tick_ = 0;
  std::int64_t zero_tick_ = 0;
  std::vector<std::int64_t> discontinuity_ticks_;
  std::size_t next_discontinuity_ = 0;

  PlantState<double> plant_;
  PwmPeripheral pwm_;
  BaseRateState br_;
  HighRateState hr_;

  RunResult result_;
  std::vector<std::array<double, 2>> tracking_;
};

/// Metrics of one run over [0, duration].
Metrics compute_metrics(const RunResult& run, const FaultProgram& program, double duration,
                        const std::vector<std::array<double, 2>>& tracking, double i_base, double grid_period);

}  // namespace frtsim
