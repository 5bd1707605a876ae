#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "frtsim/frames.hpp"

namespace frtsim {

/// Electrical parameters of the inverter, its LC filter and the grid behind it.
template <typename Scalar>
struct PlantParams {
  Scalar l_f;      // H, inverter-side filter inductance
  Scalar r_f;      // ohm
  Scalar c_f;      // F, PCC capacitor
  Scalar l_g;      // H, grid inductance
  Scalar r_g;      // ohm
  Scalar v_dc;     // V
  Scalar v_m;      // V, grid phase-peak amplitude
  Scalar omega_g;  // rad/s

  void validate() const {
    if (!(l_f > 0 && c_f > 0 && l_g > 0 && v_dc > 0 && v_m > 0 && omega_g > 0)) {
      throw std::invalid_argument("plant parameters l_f, c_f, l_g, v_dc, v_m, omega_g must be positive");
    }
    if (!(r_f >= 0 && r_g >= 0)) {
      throw std::invalid_argument("plant resistances must be non-negative");
    }
  }

  template <typename Other>
  PlantParams<Other> cast() const {
    return {Other(l_f), Other(r_f), Other(c_f), Other(l_g), Other(r_g), Other(v_dc), Other(v_m), Other(omega_g)};
  }
};

/// 4 kW, 220 V, 60 Hz laboratory inverter. The grid impedance is a stiff
/// amplifier-like source; see README for the rationale.
PlantParams<double> default_plant_params();

/// State ordering: [i_inv(al, be), v_c(al, be), i_g(al, be)].
template <typename Scalar>
using StateVector = Eigen::Matrix<Scalar, 6, 1>;

template <typename Scalar>
struct PlantState {
  StateVector<Scalar> x = StateVector<Scalar>::Zero();
  Scalar t = 0;  // s

  auto i_inv() { return x.template segment<2>(0); }
  auto v_c() { return x.template segment<2>(2); }
  auto i_g() { return x.template segment<2>(4); }
  AlphaBeta<Scalar> i_inv() const { return x.template segment<2>(0); }
  AlphaBeta<Scalar> v_c() const { return x.template segment<2>(2); }
  AlphaBeta<Scalar> i_g() const { return x.template segment<2>(4); }

  /// Energy stored in the three reactive elements, in joules.
  Scalar stored_energy(const PlantParams<Scalar>& p) const {
    return Scalar(0.5) * (p.l_f * i_inv().squaredNorm() + p.c_f * v_c().squaredNorm() +
                          p.l_g * i_g().squaredNorm());
  }
};

using SwitchVector = std::array<bool, 3>;  // true = upper device conducting

class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(double t, const std::string& what)
      : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

// ---------------------------------------------------------------------------
// Grid faults

struct SymmetricSag {
  double depth;  // fraction of nominal removed, 0..1
};
struct PhaseABShort {};
struct PhaseJump {
  double delta;  // rad, persistent from t_start
};
using FaultKind = std::variant<SymmetricSag, PhaseABShort, PhaseJump>;

struct FaultEvent {
  double t_start;
  double t_end;
  FaultKind kind;
};

/// Source condition at one instant, as produced by the fault program.
struct GridRegime {
  double scale = 1.0;
  bool ab_short = false;
  double phase_offset = 0.0;
};

class FaultProgram {
 public:
  FaultProgram() = default;
  explicit FaultProgram(std::vector<FaultEvent> events);

  const std::vector<FaultEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

  /// Condition of the source at time t. Sags and shorts apply on
  /// [t_start, t_end); phase jumps persist from t_start.
  GridRegime regime_at(double t) const;

  /// Sorted, de-duplicated instants at which the source is discontinuous.
  std::vector<double> discontinuities() const;

  /// Start of the first event, or NaN if there is none.
  double first_fault_time() const;

 private:
  std::vector<FaultEvent> events_;
};

template <typename Scalar>
ThreePhase<Scalar> source_voltage(const GridRegime& regime, const PlantParams<Scalar>& p, Scalar t) {
  constexpr Scalar kThird = 2 * std::numbers::pi_v<Scalar> / 3;
  const Scalar angle = p.omega_g * t + Scalar(regime.phase_offset);
  const Scalar amp = p.v_m * Scalar(regime.scale);
  ThreePhase<Scalar> v(amp * std::cos(angle), amp * std::cos(angle - kThird), amp * std::cos(angle + kThird));
  if (regime.ab_short) {
    const Scalar mean = Scalar(0.5) * (v(0) + v(1));
    v(0) = mean;
    v(1) = mean;
  }
  return v;
}

template <typename Scalar>
ThreePhase<Scalar> grid_source_voltage(const FaultProgram& program, const PlantParams<Scalar>& p, Scalar t) {
  return source_voltage(program.regime_at(double(t)), p, t);
}

template <typename Scalar>
ThreePhase<Scalar> pole_voltage(const SwitchVector& sw, Scalar v_dc) {
  const Scalar half = v_dc / 2;
  return ThreePhase<Scalar>(sw[0] ? half : -half, sw[1] ? half : -half, sw[2] ? half : -half);
}

// ---------------------------------------------------------------------------
// LCL network

/// Linear state-space form dx/dt = a x + b [v_inv; e_g] of the filter and grid
/// impedance in the stationary frame. The alpha and beta axes are decoupled.
template <typename Scalar>
struct LclNetwork {
  Eigen::Matrix<Scalar, 6, 6> a;
  Eigen::Matrix<Scalar, 6, 4> b;

  explicit LclNetwork(const PlantParams<Scalar>& p) {
    a.setZero();
    b.setZero();
    for (int axis = 0; axis < 2; ++axis) {
      const int ii = axis, vc = 2 + axis, ig = 4 + axis;
      a(ii, ii) = -p.r_f / p.l_f;
      a(ii, vc) = -1 / p.l_f;
      a(vc, ii) = 1 / p.c_f;
      a(vc, ig) = -1 / p.c_f;
      a(ig, vc) = 1 / p.l_g;
      a(ig, ig) = -p.r_g / p.l_g;
      b(ii, axis) = 1 / p.l_f;
      b(ig, 2 + axis) = -1 / p.l_g;
    }
  }

  StateVector<Scalar> derivative(const StateVector<Scalar>& x, const AlphaBeta<Scalar>& v_inv,
                                 const AlphaBeta<Scalar>& e_g) const {
    Eigen::Matrix<Scalar, 4, 1> u;
    u << v_inv, e_g;
    return a * x + b * u;
  }
};

template <typename Scalar>
StateVector<Scalar> derivative(const PlantState<Scalar>& state, const std::type_identity_t<AlphaBeta<Scalar>>& v_inv,
                               const std::type_identity_t<AlphaBeta<Scalar>>& e_g, const PlantParams<Scalar>& p) {
  return LclNetwork<Scalar>(p).derivative(state.x, v_inv, e_g);
}

/// Classical RK4 step with the switch state held constant. The grid regime is
/// resolved once at the step midpoint, so callers place fault instants on step
/// boundaries; the source waveform itself is sampled at the stage times.
template <typename Scalar>
PlantState<Scalar> step_rk4(const PlantState<Scalar>& state, const std::type_identity_t<AlphaBeta<Scalar>>& v_inv,
                            const GridRegime& regime, const LclNetwork<Scalar>& net,
                            const PlantParams<Scalar>& p, Scalar dt) {
  const Scalar t = state.t;
  const Scalar half = dt / 2;
  const AlphaBeta<Scalar> e0 = abc_to_alphabeta(source_voltage(regime, p, t));
  const AlphaBeta<Scalar> e1 = abc_to_alphabeta(source_voltage(regime, p, t + half));
  const AlphaBeta<Scalar> e2 = abc_to_alphabeta(source_voltage(regime, p, t + dt));

  const StateVector<Scalar> k1 = net.derivative(state.x, v_inv, e0);
  const StateVector<Scalar> k2 = net.derivative(state.x + half * k1, v_inv, e1);
  const StateVector<Scalar> k3 = net.derivative(state.x + half * k2, v_inv, e1);
  const StateVector<Scalar> k4 = net.derivative(state.x + dt * k3, v_inv, e2);

  PlantState<Scalar> next;
  next.x = state.x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  next.t = t + dt;
  if (!next.x.allFinite()) {
    throw NonFiniteState(double(next.t), "plant state became non-finite at t=" + std::to_string(double(next.t)));
  }
  return next;
}

template <typename Scalar>
PlantState<Scalar> step_rk4(const PlantState<Scalar>& state, const SwitchVector& sw, const FaultProgram& program,
                            const PlantParams<Scalar>& p, Scalar dt) {
  if (!(dt > 0)) {
    throw std::invalid_argument("step_rk4 requires dt > 0");
  }
  const AlphaBeta<Scalar> v_inv = abc_to_alphabeta(pole_voltage(sw, p.v_dc));
  const GridRegime regime = program.regime_at(double(state.t + dt / 2));
  return step_rk4(state, v_inv, regime, LclNetwork<Scalar>(p), p, dt);
}

}  // namespace frtsim
