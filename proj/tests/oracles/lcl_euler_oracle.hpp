#pragma once

// Brute-force forward-Euler integration of the filter and grid network,
// written directly from the per-phase circuit equations in scalar form.

#include <array>
#include <cmath>

namespace oracle {

struct Lcl {
  double l_f, r_f, c_f, l_g, r_g, v_dc, v_m, omega;
  double sag_scale = 1.0;  // applied to the source amplitude
};

// [i_inv_al, i_inv_be, v_c_al, v_c_be, i_g_al, i_g_be]
using State = std::array<double, 6>;

inline std::array<double, 2> clarke(double a, double b, double c) {
  return {(2.0 * a - b - c) / 3.0, (b - c) / std::sqrt(3.0)};
}

inline std::array<double, 2> source(const Lcl& p, double t) {
  const double w = p.omega * t;
  const double amp = p.sag_scale * p.v_m;
  const double pi = std::acos(-1.0);
  return clarke(amp * std::cos(w), amp * std::cos(w - 2.0 * pi / 3.0), amp * std::cos(w + 2.0 * pi / 3.0));
}

inline std::array<double, 2> poles(const Lcl& p, std::array<bool, 3> sw) {
  const double h = p.v_dc / 2.0;
  return clarke(sw[0] ? h : -h, sw[1] ? h : -h, sw[2] ? h : -h);
}

inline State rate(const Lcl& p, const State& x, std::array<double, 2> v, std::array<double, 2> e) {
  State d{};
  for (int k = 0; k < 2; ++k) {
    const double i = x[k], vc = x[2 + k], ig = x[4 + k];
    d[k] = (v[k] - vc - p.r_f * i) / p.l_f;
    d[2 + k] = (i - ig) / p.c_f;
    d[4 + k] = (vc - e[k] - p.r_g * ig) / p.l_g;
  }
  return d;
}

// Advances x over dt with n Euler sub-steps, switch vector held.
inline State euler(const Lcl& p, State x, double t, double dt, int n, std::array<bool, 3> sw, bool with_source) {
  const double h = dt / n;
  const auto v = poles(p, sw);
  for (int s = 0; s < n; ++s) {
    const auto e = with_source ? source(p, t + s * h) : std::array<double, 2>{0.0, 0.0};
    const State d = rate(p, x, v, e);
    for (int k = 0; k < 6; ++k) x[k] += h * d[k];
  }
  return x;
}

// Richardson combination of n and 2n sub-steps, second order in h.
inline State euler_richardson(const Lcl& p, const State& x, double t, double dt, int n, std::array<bool, 3> sw,
                              bool with_source) {
  const State coarse = euler(p, x, t, dt, n, sw, with_source);
  const State fine = euler(p, x, t, dt, 2 * n, sw, with_source);
  State out{};
  for (int k = 0; k < 6; ++k) out[k] = 2.0 * fine[k] - coarse[k];
  return out;
}

inline double energy(const Lcl& p, const State& x) {
  return 0.5 * (p.l_f * (x[0] * x[0] + x[1] * x[1]) + p.c_f * (x[2] * x[2] + x[3] * x[3]) +
                p.l_g * (x[4] * x[4] + x[5] * x[5]));
}

}  // namespace oracle
