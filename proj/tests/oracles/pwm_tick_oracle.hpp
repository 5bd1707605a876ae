#pragma once

// Reference model of the PWM peripheral that moves one count per call.
// Written from the register-level description only; it shares no code with
// the batched implementation.

#include <array>
#include <cstdint>
#include <vector>

namespace oracle {

struct TickEvent {
  int kind;  // 0 peak, 1 valley, 2 ovs interrupt, 3 gate toggle
  std::int64_t offset;
  int phase;
  bool rising;

  bool operator==(const TickEvent&) const = default;
};

struct TickPwm {
  std::int32_t n_pwm = 0;
  std::int32_t n_ovs = 0;
  std::int32_t ctr = 0;
  bool up = true;
  std::int32_t octr = 0;
  bool oup = true;
  std::array<std::int32_t, 3> shadow{};
  std::array<std::int32_t, 3> active{};

  bool gate(int p) const { return ctr < active[p]; }

  // One count; events of that tick are appended to ev.
  void tick(std::int64_t offset, std::vector<TickEvent>& ev) {
    const bool before[3] = {gate(0), gate(1), gate(2)};
    ctr += up ? 1 : -1;
    if (ctr == n_pwm) {
      up = false;
      active = shadow;
      ev.push_back({0, offset, -1, false});
    } else if (ctr == 0) {
      up = true;
      active = shadow;
      ev.push_back({1, offset, -1, false});
    }
    octr += oup ? 1 : -1;
    if (octr == n_ovs) {
      oup = false;
      ev.push_back({2, offset, -1, false});
    } else if (octr == 0) {
      oup = true;
      ev.push_back({2, offset, -1, false});
    }
    for (int p = 0; p < 3; ++p) {
      if (gate(p) != before[p]) ev.push_back({3, offset, p, gate(p)});
    }
  }

  std::vector<TickEvent> run(std::int64_t n) {
    std::vector<TickEvent> all;
    for (std::int64_t k = 1; k <= n; ++k) tick(k, all);
    return all;
  }

  void reset_to_peak() {
    ctr = n_pwm;
    up = false;
    octr = n_ovs;
    oup = false;
    active = shadow;
  }
};

}  // namespace oracle
