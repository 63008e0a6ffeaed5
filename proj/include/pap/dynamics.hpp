// dynamics.hpp
//
// Rigid-body attitude error dynamics in error coordinates:
//
//   q_ev_dot = F_e omega_e,   q_e0_dot = -1/2 q_ev^T omega_e
//   J omega_e_dot = Omega_e + u + d
//
// with the coupling term
//   Omega_e = J omega_e^x C_e omega_d - J C_e omega_d_dot - omega_s^x J omega_s
// and omega_s reconstructed as omega_e + C_e omega_d. Also provides target
// kinematics, the built-in slow-sinusoid target rate profile, and the
// disturbance models used by the simulation scenarios.

#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "pap/attitude_math.hpp"

namespace pap {

/// Inertia and actuator limit. `make` validates symmetry and positive
/// definiteness and caches the inverse and eigenvalue extremes.
struct SpacecraftParams {
  Mat3 J = Mat3::Identity();
  double u_max = 0.05;  // N*m, per axis

  Mat3 J_inv = Mat3::Identity();
  double lambda_J_min = 1.0;
  double lambda_J_max = 1.0;

  static SpacecraftParams make(const Mat3& J, double u_max) {
    if (!(u_max > 0.0)) {
      throw std::invalid_argument("SpacecraftParams: u_max must be positive");
    }
    if ((J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("SpacecraftParams: inertia matrix must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(J);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument("SpacecraftParams: inertia matrix must be positive definite");
    }
    SpacecraftParams p;
    p.J = J;
    p.u_max = u_max;
    p.J_inv = J.inverse();
    p.lambda_J_min = es.eigenvalues().minCoeff();
    p.lambda_J_max = es.eigenvalues().maxCoeff();
    return p;
  }

  /// Inertia used throughout the simulation scenarios (kg*m^2).
  static SpacecraftParams reference_spacecraft() {
    Mat3 J;
    J << 2.8, 0.1, 0.5,
         0.1, 2.5, 0.24,
         0.5, 0.24, 1.9;
    return make(J, 0.05);
  }
};

struct ErrorState {
  Quaternion q_e;
  Vec3 omega_e = Vec3::Zero();  // rad/s, body frame
};

struct TargetState {
  Quaternion q_d;
  Vec3 omega_d = Vec3::Zero();      // rad/s, target frame
  Vec3 omega_d_dot = Vec3::Zero();  // rad/s^2
};

enum class DisturbanceKind { none, periodic, pulse, composite };

/// External torque model. The periodic variant is three slow trig rows with
/// per-axis sine/cosine amplitudes, integer frequency multiples of omega_p
/// and a constant bias; the pulse variant adds a rectangular kick on
/// [start, start + duration).
struct DisturbanceModel {
  DisturbanceKind kind = DisturbanceKind::none;

  double omega_p = 0.01;  // rad/s
  Vec3 amp_sin = Vec3::Zero();
  Vec3 amp_cos = Vec3::Zero();
  Vec3 bias = Vec3::Zero();
  Vec3 sin_mult = Vec3(3.0, 2.0, 2.0);
  Vec3 cos_mult = Vec3(3.0, 3.0, 4.0);

  Vec3 pulse = Vec3::Zero();  // N*m
  double pulse_start = 0.0;   // s
  double pulse_duration = 0.0;

  static DisturbanceModel none_model() { return DisturbanceModel{}; }

  /// The reference periodic perturbation, amplitudes in units of 1e-4 N*m:
  /// [ 1 sin(3 w t) + 4 cos(3 w t) - 20,
  ///   5 sin(2 w t) + 3 cos(3 w t) + 20,
  ///   3 sin(2 w t) - 1 cos(4 w t) + 20 ], w = 0.01 rad/s.
  static DisturbanceModel reference_periodic() {
    DisturbanceModel m;
    m.kind = DisturbanceKind::periodic;
    m.omega_p = 0.01;
    m.amp_sin = 1e-4 * Vec3(1.0, 5.0, 3.0);
    m.amp_cos = 1e-4 * Vec3(4.0, 3.0, -1.0);
    m.bias = 1e-4 * Vec3(-20.0, 20.0, 20.0);
    return m;
  }

  /// Periodic perturbation plus a 0.5 N*m per-axis kick at t = 100 s for 0.5 s.
  static DisturbanceModel reference_composite() {
    DisturbanceModel m = reference_periodic();
    m.kind = DisturbanceKind::composite;
    m.pulse = Vec3(0.5, 0.5, 0.5);
    m.pulse_start = 100.0;
    m.pulse_duration = 0.5;
    return m;
  }

  void validate() const {
    if (pulse_duration < 0.0) {
      throw std::invalid_argument("DisturbanceModel: pulse duration must be >= 0");
    }
    if (!amp_sin.allFinite() || !amp_cos.allFinite() || !bias.allFinite() ||
        !pulse.allFinite()) {
      throw std::invalid_argument("DisturbanceModel: amplitudes must be finite");
    }
  }
};

/// Coupling term Omega_e of the error dynamics (N*m). Zero whenever
/// omega_e, omega_d and omega_d_dot all vanish.
inline Vec3 coupling_term(const Quaternion& q_e, const Vec3& omega_e,
                          const TargetState& target, const SpacecraftParams& params) {
  const Mat3 C_e = rotation_matrix(q_e);
  const Vec3 wd_body = C_e * target.omega_d;
  const Vec3 omega_s = omega_e + wd_body;
  return params.J * omega_e.cross(wd_body) - params.J * (C_e * target.omega_d_dot) -
         omega_s.cross(params.J * omega_s);
}

struct ErrorDerivative {
  Vec4 q_e_dot = Vec4::Zero();
  Vec3 omega_e_dot = Vec3::Zero();
};

/// Right-hand side of the error dynamics. `u` is the already-saturated
/// applied torque.
inline ErrorDerivative error_derivative(const ErrorState& state, const TargetState& target,
                                        const Vec3& u, const Vec3& d,
                                        const SpacecraftParams& params) {
  ErrorDerivative out;
  out.q_e_dot = quat_kinematics(state.q_e, state.omega_e);
  const Vec3 Omega_e = coupling_term(state.q_e, state.omega_e, target, params);
  out.omega_e_dot = params.J_inv * (Omega_e + u + d);
  return out;
}

/// Target kinematics q_d_dot = 1/2 q_d (x) [omega_d; 0].
inline Vec4 target_derivative(const TargetState& target) {
  return quat_kinematics(target.q_d, target.omega_d);
}

struct RateCommand {
  Vec3 omega_d = Vec3::Zero();
  Vec3 omega_d_dot = Vec3::Zero();
};

/// Built-in reference angular-velocity profile,
/// 0.3 deg/s * [cos(t/80), sin(t/100), -cos(t/100)], with its analytic
/// time derivative. Degrees are converted here; everything downstream is SI.
inline RateCommand eval_omega_d(double t) {
  constexpr double k = 0.3 * M_PI / 180.0;
  RateCommand rc;
  rc.omega_d = k * Vec3(std::cos(t / 80.0), std::sin(t / 100.0), -std::cos(t / 100.0));
  rc.omega_d_dot =
      k * Vec3(-std::sin(t / 80.0) / 80.0, std::cos(t / 100.0) / 100.0,
               std::sin(t / 100.0) / 100.0);
  return rc;
}

inline Vec3 eval_disturbance(const DisturbanceModel& m, double t) {
  Vec3 d = Vec3::Zero();
  if (m.kind == DisturbanceKind::periodic || m.kind == DisturbanceKind::composite) {
    for (int i = 0; i < 3; ++i) {
      d(i) = m.amp_sin(i) * std::sin(m.sin_mult(i) * m.omega_p * t) +
             m.amp_cos(i) * std::cos(m.cos_mult(i) * m.omega_p * t) + m.bias(i);
    }
  }
  if (m.kind == DisturbanceKind::pulse || m.kind == DisturbanceKind::composite) {
    if (t >= m.pulse_start && t < m.pulse_start + m.pulse_duration) {
      d += m.pulse;
    }
  }
  return d;
}

}  // namespace pap
