// observer.hpp
//
// Extended-state disturbance observer. J^-1 d is treated as an extra state
// F2; with F1 = omega_e and e1 = F1_hat - omega_e the observer runs
//
//   F1_hat_dot = J^-1 Omega_e + J^-1 u + F2_hat - C1 beta e1
//   F2_hat_dot = -C2 beta^2 e1
//
// and the torque estimate is d_hat = J F2_hat. Per axis the estimation
// error follows a linear system whose poles are the roots of
// lambda^2 + C1 beta lambda + C2 beta^2; the defaults C1 = 2, C2 = 1,
// beta = 1 place a double pole at -1.

#pragma once

#include <stdexcept>

#include "pap/attitude_math.hpp"
#include "pap/dynamics.hpp"

namespace pap {

struct ObserverParams {
  double C1 = 2.0;
  double C2 = 1.0;
  double beta = 1.0;

  static ObserverParams defaults() { return ObserverParams{}; }

  void validate() const {
    if (!(C1 > 0.0) || !(C2 > 0.0) || !(beta > 0.0)) {
      throw std::invalid_argument("ObserverParams: C1, C2, beta must be positive");
    }
  }
};

struct ObserverState {
  Vec3 F1_hat = Vec3::Zero();  // estimate of omega_e (rad/s)
  Vec3 F2_hat = Vec3::Zero();  // estimate of J^-1 d (rad/s^2)
};

struct ObserverDerivative {
  Vec3 F1_hat_dot = Vec3::Zero();
  Vec3 F2_hat_dot = Vec3::Zero();
};

/// Observer right-hand side. `u_applied` is the saturated torque actually
/// driving the plant; `omega_e` and `Omega_e` are the current measurements.
inline ObserverDerivative observer_derivative(const ObserverState& obs, const Vec3& omega_e,
                                              const Vec3& u_applied, const Vec3& Omega_e,
                                              const SpacecraftParams& params,
                                              const ObserverParams& op) {
  ObserverDerivative out;
  const Vec3 e1 = obs.F1_hat - omega_e;
  out.F1_hat_dot =
      params.J_inv * Omega_e + params.J_inv * u_applied + obs.F2_hat - op.C1 * op.beta * e1;
  out.F2_hat_dot = -op.C2 * op.beta * op.beta * e1;
  return out;
}

/// d_hat = J F2_hat (N*m).
inline Vec3 disturbance_estimate(const ObserverState& obs, const SpacecraftParams& params) {
  return params.J * obs.F2_hat;
}

}  // namespace pap
