#include "frtsim/plant.hpp"

#include <algorithm>
#include <limits>

namespace frtsim {

PlantParams<double> default_plant_params() {
  PlantParams<double> p{};
  p.l_f = 3.4e-3;
  p.r_f = 12.5e-3;
  p.c_f = 55e-6;
  p.l_g = 1e-6;
  p.r_g = 0.1;
  p.v_dc = 400.0;
  p.v_m = 220.0 * std::sqrt(2.0) / std::sqrt(3.0);
  p.omega_g = 2.0 * std::numbers::pi * 60.0;
  return p;
}

namespace {

bool is_jump(const FaultEvent& e) { return std::holds_alternative<PhaseJump>(e.kind); }

// A phase jump is a step in angle; only its start instant occupies the timeline.
double occupied_until(const FaultEvent& e) { return is_jump(e) ? e.t_start : e.t_end; }

}  // namespace

FaultProgram::FaultProgram(std::vector<FaultEvent> events) : events_(std::move(events)) {
  std::sort(events_.begin(), events_.end(),
            [](const FaultEvent& a, const FaultEvent& b) { return a.t_start < b.t_start; });
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const FaultEvent& e = events_[k];
    if (!(e.t_end >= e.t_start)) {
      throw std::invalid_argument("fault event ends before it starts");
    }
    if (const auto* sag = std::get_if<SymmetricSag>(&e.kind)) {
      if (!(sag->depth >= 0.0 && sag->depth <= 1.0)) {
        throw std::invalid_argument("sag depth must lie in [0, 1]");
      }
    }
    if (k > 0 && events_[k].t_start < occupied_until(events_[k - 1])) {
      throw std::invalid_argument("fault events overlap");
    }
  }
}

GridRegime FaultProgram::regime_at(double t) const {
  GridRegime regime;
  for (const FaultEvent& e : events_) {
    if (t < e.t_start) {
      break;
    }
    if (const auto* jump = std::get_if<PhaseJump>(&e.kind)) {
      regime.phase_offset += jump->delta;
      continue;
    }
    if (t >= e.t_end) {
      continue;
    }
    if (const auto* sag = std::get_if<SymmetricSag>(&e.kind)) {
      regime.scale = 1.0 - sag->depth;
    } else {
      regime.ab_short = true;
    }
  }
  return regime;
}

std::vector<double> FaultProgram::discontinuities() const {
  std::vector<double> times;
  for (const FaultEvent& e : events_) {
    times.push_back(e.t_start);
    if (!is_jump(e)) {
      times.push_back(e.t_end);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

double FaultProgram::first_fault_time() const {
  return events_.empty() ? std::numeric_limits<double>::quiet_NaN() : events_.front().t_start;
}

}  // namespace frtsim
