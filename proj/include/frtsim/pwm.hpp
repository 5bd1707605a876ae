#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "frtsim/plant.hpp"

namespace frtsim {

// Emulation of a center-aligned PWM peripheral at carrier-count resolution.
//
// One tick moves each counter by one count. A counter that reaches its peak
// flips to Down and a counter that reaches zero flips to Up in the same tick,
// so a stored state never reads (peak, Up) or (0, Down). Active compare values
// are loaded from the shadow registers in the tick that produces a Peak or a
// Valley, and the gate of a phase conducts during a tick interval iff the
// carrier value of that interval is strictly below the active compare.

enum class CountDirection : std::uint8_t { Up, Down };

struct CarrierState {
  std::int32_t ctr = 0;
  CountDirection dir = CountDirection::Up;
  std::int32_t n_pwm = 0;
  double t_clk = 0.0;  // seconds per count
};

struct OvsCounter {
  std::int32_t ctr = 0;
  CountDirection dir = CountDirection::Up;
  std::int32_t n_ovs = 0;
};

using CompareValues = std::array<std::int32_t, 3>;

struct CompareBank {
  CompareValues shadow{};
  CompareValues active{};
};

struct PwmPeripheral {
  CarrierState carrier;
  OvsCounter ovs;
  CompareBank bank;

  /// Both counters at zero counting up, all compares at zero. Throws if
  /// n_pwm is not an exact multiple of k_ovs.
  static PwmPeripheral make(std::int32_t n_pwm, std::int32_t k_ovs, double t_clk);

  std::int32_t k_ovs() const { return carrier.n_pwm / ovs.n_ovs; }
};

enum class PwmEventKind : std::uint8_t { Peak, Valley, OvsInterrupt, GateToggle, ForcedPeak };

struct PwmEvent {
  PwmEventKind kind;
  std::int64_t offset;  // tick within the batch, 1-based; 0 for forced events
  int phase = -1;       // GateToggle only
  bool rising = false;  // GateToggle only

  bool operator==(const PwmEvent&) const = default;
};

/// Events of one batch in tick order. Within a tick the order is carrier
/// extreme, oversampling interrupt, then gate toggles by phase.
struct PwmEvents {
  std::vector<PwmEvent> events;

  std::size_t count(PwmEventKind kind) const;
  bool contains(PwmEventKind kind) const { return count(kind) > 0; }
  bool operator==(const PwmEvents&) const = default;
};

PwmEvents advance(PwmPeripheral& pwm, std::int64_t n_ticks);

/// Replaces the shadow registers, saturating each value to [0, n_pwm].
void write_shadow(CompareBank& bank, const CompareValues& cmp, std::int32_t n_pwm);

/// Jumps both counters to their peaks counting down and loads the active
/// compares from the shadow registers immediately.
void force_reset(PwmPeripheral& pwm);

SwitchVector gate_states(const CarrierState& carrier, const CompareBank& bank);

/// Ticks until the oversampling counter next reaches an extreme.
std::int64_t ticks_to_ovs_interrupt(const OvsCounter& ovs);

}  // namespace frtsim
