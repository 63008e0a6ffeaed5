// controller.hpp
//
// Precisely-assigned-performance control law. The tracking error
// s = q_ev - rho is kept inside a tube of half-width Delta_e by making the
// barrier value H = K_H (Delta_e^2 - s^T s) satisfy H_dot > -alpha H. The
// controller is a backstepping pair:
//
//   omega_v = F_e^-1 [ (2 lambda_v K_H - K_s) s + rho_dot ]
//   u       = -Omega_e - d_hat + J omega_v_dot + (2 lambda_u K_h - K_2) J z2
//
// with z2 = omega_e - omega_v, h = K_h (Delta_h^2 - z2^T z2), and lambda_v,
// lambda_u produced by the universal stabilizing formula
//
//   lambda(A, B) = (-A - sqrt(A^2 + sigma B^2)) / (B + eps)
//
// evaluated on
//   A1 = -alpha H + delta_H ||tanh(C_s s)||,  B1 = 4 K_H^2 s^T s
//   A2 = -lambda_Jmin^2 (gamma h + delta_h ||z2||),  B2 = 4 K_h^2 z2^T J^2 z2.
//
// The eps term regularizes the B -> 0 limit; the closed-loop gains stay
// bounded and lambda <= 0 everywhere. omega_v_dot is assembled analytically
// (no numerical differentiation in the loop).

#pragma once

#include <algorithm>
#include <cmath>

#include "pap/attitude_math.hpp"
#include "pap/dynamics.hpp"

namespace pap {

struct ControllerGains {
  double K_H = 2.0;
  double K_h = 1.0;
  double K_s = 0.1;
  double K_2 = 2.0;
  double alpha = 0.5;   // 1/s, barrier rate for H
  double gamma = 0.25;  // 1/s, barrier rate for h
  double delta_H = 1e-5;
  double delta_h = 2e-3;
  double sigma1 = 0.05;
  double sigma2 = 1.0;
  double C_s = 1e7;     // tanh sharpness
  // Denominator regularizer. Besides removing the B -> 0 singularity it caps
  // the near-origin gain at 2 A / eps; the default keeps that cap inside the
  // actuator's bandwidth at the 0.1 s control rate (1e-7 leaves a gain of
  // order 1e3/s and the loop limit-cycles around the tube).
  double eps = 2e-5;
  double Delta_e = 1e-5;
  double Delta_h = 1e-5;

  static ControllerGains reference_gains() { return ControllerGains{}; }

  void validate() const {
    const double fields[] = {K_H, K_h, K_s, K_2, alpha, gamma, delta_H, delta_h,
                             sigma1, sigma2, C_s, eps, Delta_e, Delta_h};
    for (double f : fields) {
      if (!(f > 0.0) || !std::isfinite(f)) {
        throw std::invalid_argument("ControllerGains: all fields must be positive and finite");
      }
    }
  }
};

/// One controller evaluation, all intermediate quantities exposed for
/// logging and analysis.
struct ControlOutputs {
  Vec3 s = Vec3::Zero();
  double H = 0.0;
  double h = 0.0;
  double lambda_v = 0.0;
  double lambda_u = 0.0;
  Vec3 omega_v = Vec3::Zero();
  Vec3 omega_v_dot = Vec3::Zero();
  Vec3 z2 = Vec3::Zero();
  Vec3 u_raw = Vec3::Zero();
  Vec3 u_sat = Vec3::Zero();
};

inline Vec3 tracking_error(const Vec3& q_ev, const Vec3& rho) { return q_ev - rho; }

inline double barrier_H(const Vec3& s, const ControllerGains& g) {
  return g.K_H * (g.Delta_e * g.Delta_e - s.squaredNorm());
}

inline double barrier_h(const Vec3& z2, const ControllerGains& g) {
  return g.K_h * (g.Delta_h * g.Delta_h - z2.squaredNorm());
}

/// Universal stabilizing gain. For B > 0 and eps = 0 it satisfies the exact
/// identity A + B lambda = -sqrt(A^2 + sigma B^2) <= 0; with eps > 0 the
/// value is continuous in (A, B) on B >= 0 and stays bounded as B -> 0.
/// At B = 0 the reachable branch (A <= 0 there) evaluates to 0.
inline double sontag_lambda(double A, double B, double sigma, double eps) {
  const double den = B + eps;
  if (!(den > 0.0)) {
    return 0.0;
  }
  const double value = (-A - std::sqrt(A * A + sigma * B * B)) / den;
  return std::min(value, 0.0);
}

struct SontagPartials {
  double dA = 0.0;
  double dB = 0.0;
};

/// Closed-form partials of sontag_lambda with the regularized denominator:
///   d lambda / dA = (-1 - A/R) / (B + eps)
///   d lambda / dB = (A + R - sigma B (B + eps) / R) / (B + eps)^2
/// with R = sqrt(A^2 + sigma B^2). Callers keep B away from A = B = 0.
inline SontagPartials sontag_lambda_partials(double A, double B, double sigma, double eps) {
  const double R = std::sqrt(A * A + sigma * B * B);
  const double den = B + eps;
  SontagPartials p;
  if (!(R > 0.0) || !(den > 0.0)) {
    return p;
  }
  p.dA = (-1.0 - A / R) / den;
  p.dB = (A + R - sigma * B * den / R) / (den * den);
  return p;
}

struct A1B1 {
  double A1 = 0.0;
  double B1 = 0.0;
};

inline A1B1 a1_b1(const Vec3& s, double H, const ControllerGains& g) {
  A1B1 r;
  r.A1 = -g.alpha * H + g.delta_H * s.array().unaryExpr([&](double v) {
    return std::tanh(g.C_s * v);
  }).matrix().norm();
  r.B1 = 4.0 * g.K_H * g.K_H * s.squaredNorm();
  return r;
}

struct A2B2 {
  double A2 = 0.0;
  double B2 = 0.0;
};

inline A2B2 a2_b2(const Vec3& z2, double h, const ControllerGains& g,
                  const SpacecraftParams& params) {
  A2B2 r;
  const double lmin2 = params.lambda_J_min * params.lambda_J_min;
  r.A2 = -lmin2 * (g.gamma * h + g.delta_h * z2.norm());
  r.B2 = 4.0 * g.K_h * g.K_h * (params.J * z2).squaredNorm();
  return r;
}

struct VirtualControl {
  Vec3 omega_v = Vec3::Zero();
  double lambda_v = 0.0;
};

/// Smooth virtual rate command; throws SingularJacobian via fe_inverse when
/// |q_e0| is below the singularity guard.
inline VirtualControl virtual_control(const Quaternion& q_e, const Vec3& s,
                                      const Vec3& rho_dot, const ControllerGains& g) {
  VirtualControl out;
  const double H = barrier_H(s, g);
  const auto ab = a1_b1(s, H, g);
  out.lambda_v = sontag_lambda(ab.A1, ab.B1, g.sigma1, g.eps);
  out.omega_v = fe_inverse(q_e) * ((2.0 * out.lambda_v * g.K_H - g.K_s) * s + rho_dot);
  return out;
}

/// Analytic time derivative of the virtual control along the closed loop:
///
///   omega_v_dot = d(F_e^-1)/dt [(2 lambda_v K_H - K_s) s + rho_dot]
///               + F_e^-1 [2 K_H (lambda_v_dot s + lambda_v s_dot)
///                         - K_s s_dot + rho_ddot]
///
/// with s_dot = F_e omega_e - rho_dot, d(F_e^-1)/dt = -F_e^-1 F_e_dot F_e^-1,
/// H_dot = -2 K_H s^T s_dot, B1_dot = 8 K_H^2 s^T s_dot and
/// A1_dot = -alpha H_dot + delta_H tanh(C_s s)^T M_s s_dot / ||tanh(C_s s)||,
/// M_s = diag(C_s (1 - tanh^2(C_s s_i))). The regularized gain is C^1 in
/// (A1, B1) away from s = 0, so the chain rule applies everywhere the
/// lambda_v_dot s term is nonzero; at s = 0 that term vanishes and the
/// partials are skipped.
inline Vec3 virtual_control_derivative(const ErrorState& state, const Vec3& s,
                                       const Vec3& rho_dot, const Vec3& rho_ddot,
                                       const ControllerGains& g) {
  const Mat3 Fe = fe_matrix(state.q_e);
  const Mat3 Fe_inv = fe_inverse(state.q_e);
  const Mat3 Fe_dot = fe_matrix_dot(state.q_e, state.omega_e);
  const Mat3 Fe_inv_dot = -Fe_inv * Fe_dot * Fe_inv;

  const Vec3 s_dot = Fe * state.omega_e - rho_dot;
  const double H = barrier_H(s, g);
  const auto ab = a1_b1(s, H, g);
  const double lambda_v = sontag_lambda(ab.A1, ab.B1, g.sigma1, g.eps);

  double lambda_v_dot = 0.0;
  const Vec3 th = s.array().unaryExpr([&](double v) { return std::tanh(g.C_s * v); });
  const double th_norm = th.norm();
  if (th_norm > 0.0) {
    const Vec3 Ms_s_dot =
        (g.C_s * (Vec3::Ones().array() - th.array().square()) * s_dot.array()).matrix();
    const double H_dot = -2.0 * g.K_H * s.dot(s_dot);
    const double A1_dot = -g.alpha * H_dot + g.delta_H * th.dot(Ms_s_dot) / th_norm;
    const double B1_dot = 8.0 * g.K_H * g.K_H * s.dot(s_dot);
    const auto part = sontag_lambda_partials(ab.A1, ab.B1, g.sigma1, g.eps);
    lambda_v_dot = part.dA * A1_dot + part.dB * B1_dot;
  }

  const Vec3 bracket = (2.0 * lambda_v * g.K_H - g.K_s) * s + rho_dot;
  return Fe_inv_dot * bracket +
         Fe_inv * (2.0 * g.K_H * (lambda_v_dot * s + lambda_v * s_dot) - g.K_s * s_dot +
                   rho_ddot);
}

struct ActualControl {
  Vec3 u_raw = Vec3::Zero();
  Vec3 u_sat = Vec3::Zero();
  double lambda_u = 0.0;
};

/// Torque command with per-axis saturation at u_max. The saturated value is
/// what the plant and the observer both receive.
inline ActualControl actual_control(const ErrorState& state, const TargetState& target,
                                    const Vec3& z2, const Vec3& omega_v_dot,
                                    const Vec3& d_hat, const ControllerGains& g,
                                    const SpacecraftParams& params) {
  ActualControl out;
  const double h = barrier_h(z2, g);
  const auto ab = a2_b2(z2, h, g, params);
  out.lambda_u = sontag_lambda(ab.A2, ab.B2, g.sigma2, g.eps);
  const Vec3 Omega_e = coupling_term(state.q_e, state.omega_e, target, params);
  out.u_raw = -Omega_e - d_hat + params.J * omega_v_dot +
              (2.0 * out.lambda_u * g.K_h - g.K_2) * (params.J * z2);
  out.u_sat = out.u_raw.cwiseMax(-params.u_max).cwiseMin(params.u_max);
  return out;
}

/// Full controller evaluation for one control tick.
inline ControlOutputs compute_control(const ErrorState& state, const TargetState& target,
                                      const Vec3& rho, const Vec3& rho_dot,
                                      const Vec3& rho_ddot, const Vec3& d_hat,
                                      const ControllerGains& g,
                                      const SpacecraftParams& params) {
  ControlOutputs out;
  out.s = tracking_error(state.q_e.vec, rho);
  out.H = barrier_H(out.s, g);

  const auto vc = virtual_control(state.q_e, out.s, rho_dot, g);
  out.lambda_v = vc.lambda_v;
  out.omega_v = vc.omega_v;
  out.omega_v_dot = virtual_control_derivative(state, out.s, rho_dot, rho_ddot, g);

  out.z2 = state.omega_e - out.omega_v;
  out.h = barrier_h(out.z2, g);

  const auto ac = actual_control(state, target, out.z2, out.omega_v_dot, d_hat, g, params);
  out.lambda_u = ac.lambda_u;
  out.u_raw = ac.u_raw;
  out.u_sat = ac.u_sat;
  return out;
}

}  // namespace pap
