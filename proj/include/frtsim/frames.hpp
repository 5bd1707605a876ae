#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace frtsim {

// Dense vector types for the three reference frames. All are column vectors
// templated on the scalar so the plant and the transforms can be exercised in
// float, double or long double.
template <typename Scalar>
using ThreePhase = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using AlphaBeta = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Dq = Eigen::Matrix<Scalar, 2, 1>;

using ThreePhased = ThreePhase<double>;
using AlphaBetad = AlphaBeta<double>;
using Dqd = Dq<double>;

/// Amplitude-invariant Clarke matrix: a balanced set of phase peak V maps to
/// an alpha-beta vector of norm V.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 3> clarke_matrix() {
  const Scalar third = Scalar(1) / Scalar(3);
  const Scalar inv_sqrt3 = Scalar(1) / std::sqrt(Scalar(3));
  Eigen::Matrix<Scalar, 2, 3> m;
  m << 2 * third, -third, -third,
       0, inv_sqrt3, -inv_sqrt3;
  return m;
}

/// Right inverse of clarke_matrix() on the zero-sequence-free subspace.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 2> inverse_clarke_matrix() {
  const Scalar half_sqrt3 = std::sqrt(Scalar(3)) / Scalar(2);
  Eigen::Matrix<Scalar, 3, 2> m;
  m << 1, 0,
       Scalar(-0.5), half_sqrt3,
       Scalar(-0.5), -half_sqrt3;
  return m;
}

template <typename Derived>
AlphaBeta<typename Derived::Scalar> abc_to_alphabeta(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return clarke_matrix<Scalar>() * x;
}

template <typename Derived>
ThreePhase<typename Derived::Scalar> alphabeta_to_abc(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return inverse_clarke_matrix<Scalar>() * x;
}

/// Rotation taking dq coordinates at angle theta back to alpha-beta.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation(Scalar theta) {
  return Eigen::Rotation2D<Scalar>(theta).toRotationMatrix();
}

template <typename Derived>
Dq<typename Derived::Scalar> alphabeta_to_dq(const Eigen::MatrixBase<Derived>& x,
                                             typename Derived::Scalar theta) {
  using Scalar = typename Derived::Scalar;
  return rotation<Scalar>(theta).transpose() * x;
}

template <typename Derived>
AlphaBeta<typename Derived::Scalar> dq_to_alphabeta(const Eigen::MatrixBase<Derived>& x,
                                                    typename Derived::Scalar theta) {
  using Scalar = typename Derived::Scalar;
  return rotation<Scalar>(theta) * x;
}

template <typename Derived>
typename Derived::Scalar l2_norm(const Eigen::MatrixBase<Derived>& x) {
  return x.norm();
}

/// Wraps an angle into [0, 2*pi).
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  Scalar wrapped = std::fmod(theta, two_pi);
  if (wrapped < 0) {
    wrapped += two_pi;
  }
  if (wrapped >= two_pi) {
    wrapped = 0;
  }
  return wrapped;
}

template <typename Scalar>
struct PerUnitBase {
  Scalar v_base;  // volts, phase peak
  Scalar i_base;  // amperes, phase peak
  Scalar z_base;  // ohms

  static PerUnitBase from_voltage_current(Scalar v_base, Scalar i_base) {
    if (!(v_base > 0) || !(i_base > 0)) {
      throw std::invalid_argument("per-unit bases must be positive");
    }
    return PerUnitBase{v_base, i_base, v_base / i_base};
  }

  Scalar current_pu(Scalar amps) const { return amps / i_base; }
  Scalar voltage_pu(Scalar volts) const { return volts / v_base; }
};

/// Peak-valued bases for a rated rms line current and rms line-to-line voltage.
template <typename Scalar>
PerUnitBase<Scalar> rated_peak_base(Scalar v_ll_rms, Scalar i_rms) {
  const Scalar v_phase_peak = v_ll_rms * std::sqrt(Scalar(2)) / std::sqrt(Scalar(3));
  return PerUnitBase<Scalar>::from_voltage_current(v_phase_peak, i_rms * std::sqrt(Scalar(2)));
}

}  // namespace frtsim
