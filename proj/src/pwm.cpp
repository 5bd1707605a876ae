#include "frtsim/pwm.hpp"

#include <algorithm>
#include <stdexcept>

namespace frtsim {

PwmPeripheral PwmPeripheral::make(std::int32_t n_pwm, std::int32_t k_ovs, double t_clk) {
  if (n_pwm <= 0 || k_ovs <= 0) {
    throw std::invalid_argument("n_pwm and k_ovs must be positive");
  }
  if (n_pwm % k_ovs != 0) {
    throw std::invalid_argument("n_pwm must be divisible by k_ovs");
  }
  if (!(t_clk > 0.0)) {
    throw std::invalid_argument("t_clk must be positive");
  }
  PwmPeripheral pwm;
  pwm.carrier = CarrierState{0, CountDirection::Up, n_pwm, t_clk};
  pwm.ovs = OvsCounter{0, CountDirection::Up, n_pwm / k_ovs};
  return pwm;
}

std::size_t PwmEvents::count(PwmEventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const PwmEvent& e) { return e.kind == kind; }));
}

namespace {

std::int64_t ticks_to_extreme(std::int32_t ctr, CountDirection dir, std::int32_t peak) {
  return dir == CountDirection::Up ? std::int64_t(peak) - ctr : std::int64_t(ctr);
}

void push_toggle(std::vector<PwmEvent>& out, std::int64_t offset, int phase, bool rising) {
  out.push_back(PwmEvent{PwmEventKind::GateToggle, offset, phase, rising});
}

}  // namespace

PwmEvents advance(PwmPeripheral& pwm, std::int64_t n_ticks) {
  if (n_ticks < 1) {
    throw std::invalid_argument("advance requires at least one tick");
  }
  PwmEvents result;
  auto& out = result.events;
  CarrierState& c = pwm.carrier;
  CompareBank& bank = pwm.bank;

  SwitchVector gate = gate_states(c, bank);
  std::int64_t pos = 0;
  while (pos < n_ticks) {
    const std::int64_t dist = ticks_to_extreme(c.ctr, c.dir, c.n_pwm);
    const std::int64_t seg = std::min(n_ticks - pos, dist);
    const bool hits_extreme = seg == dist;
    // Ticks whose interval still uses the compares that were active at the
    // start of the segment. The extreme tick itself sees the freshly loaded ones.
    const std::int64_t plain = hits_extreme ? seg - 1 : seg;
    const std::int64_t c0 = c.ctr;
    for (int p = 0; p < 3; ++p) {
      const std::int64_t cmp = bank.active[p];
      std::int64_t at = 0;
      if (c.dir == CountDirection::Up && c0 < cmp) {
        at = cmp - c0;  // first tick with ctr == cmp turns the gate off
      } else if (c.dir == CountDirection::Down && c0 >= cmp) {
        at = c0 - cmp + 1;  // first tick with ctr < cmp turns it on
      }
      if (at >= 1 && at <= plain) {
        gate[p] = c.dir == CountDirection::Down;
        push_toggle(out, pos + at, p, gate[p]);
      }
    }
    c.ctr += static_cast<std::int32_t>(c.dir == CountDirection::Up ? seg : -seg);
    pos += seg;
    if (hits_extreme) {
      const bool peak = c.dir == CountDirection::Up;
      c.dir = peak ? CountDirection::Down : CountDirection::Up;
      out.push_back(PwmEvent{peak ? PwmEventKind::Peak : PwmEventKind::Valley, pos});
      bank.active = bank.shadow;
      const SwitchVector loaded = gate_states(c, bank);
      for (int p = 0; p < 3; ++p) {
        if (loaded[p] != gate[p]) {
          gate[p] = loaded[p];
          push_toggle(out, pos, p, gate[p]);
        }
      }
    }
  }

  OvsCounter& o = pwm.ovs;
  std::int64_t opos = 0;
  while (opos < n_ticks) {
    const std::int64_t dist = ticks_to_extreme(o.ctr, o.dir, o.n_ovs);
    const std::int64_t seg = std::min(n_ticks - opos, dist);
    o.ctr += static_cast<std::int32_t>(o.dir == CountDirection::Up ? seg : -seg);
    opos += seg;
    if (seg == dist) {
      o.dir = o.dir == CountDirection::Up ? CountDirection::Down : CountDirection::Up;
      out.push_back(PwmEvent{PwmEventKind::OvsInterrupt, opos});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const PwmEvent& a, const PwmEvent& b) {
    if (a.offset != b.offset) return a.offset < b.offset;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.phase < b.phase;
  });
  return result;
}

void write_shadow(CompareBank& bank, const CompareValues& cmp, std::int32_t n_pwm) {
  for (int p = 0; p < 3; ++p) {
    bank.shadow[p] = std::clamp(cmp[p], std::int32_t{0}, n_pwm);
  }
}

void force_reset(PwmPeripheral& pwm) {
  pwm.carrier.ctr = pwm.carrier.n_pwm;
  pwm.carrier.dir = CountDirection::Down;
  pwm.ovs.ctr = pwm.ovs.n_ovs;
  pwm.ovs.dir = CountDirection::Down;
  pwm.bank.active = pwm.bank.shadow;
}

SwitchVector gate_states(const CarrierState& carrier, const CompareBank& bank) {
  return {carrier.ctr < bank.active[0], carrier.ctr < bank.active[1], carrier.ctr < bank.active[2]};
}

std::int64_t ticks_to_ovs_interrupt(const OvsCounter& ovs) {
  return ticks_to_extreme(ovs.ctr, ovs.dir, ovs.n_ovs);
}

}  // namespace frtsim
