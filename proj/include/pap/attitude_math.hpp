// attitude_math.hpp
//
// Quaternion and small-matrix primitives shared by every other module.
// Convention: Hamilton product, scalar-last storage [vec; scalar]. An
// attitude quaternion maps its parent frame onto its child frame, i.e.
// v_child = rotation_matrix(q) * v_parent, and the kinematics
// q_dot = 1/2 q (x) [omega; 0] take omega resolved in the child frame.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pap {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when the kinematics Jacobian F_e is inverted too close to the
/// 180-degree attitude-error singularity.
struct SingularJacobian : std::runtime_error {
  explicit SingularJacobian(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kFeSingularityGuard = 1e-6;

/// Unit quaternion, scalar-last. Construction normalizes, so instances
/// satisfy |vec|^2 + scalar^2 = 1 at all times.
struct Quaternion {
  Vec3 vec{0.0, 0.0, 0.0};
  double scalar{1.0};

  Quaternion() = default;
  Quaternion(const Vec3& v, double s) : vec(v), scalar(s) { normalize(); }

  static Quaternion identity() { return Quaternion{}; }

  double norm() const { return std::sqrt(vec.squaredNorm() + scalar * scalar); }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("Quaternion: cannot normalize zero/non-finite quaternion");
    }
    vec /= n;
    scalar /= n;
  }

  Quaternion conjugate() const {
    Quaternion q;
    q.vec = -vec;
    q.scalar = scalar;
    return q;
  }

  Vec4 as_vec4() const { return Vec4{vec.x(), vec.y(), vec.z(), scalar}; }
};

/// Skew-symmetric cross-product matrix: skew(a) * b == a x b.
inline Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return m;
}

/// Hamilton product p (x) q, scalar-last components.
inline Quaternion hamilton_product(const Quaternion& p, const Quaternion& q) {
  Quaternion r;
  r.vec = p.scalar * q.vec + q.scalar * p.vec + p.vec.cross(q.vec);
  r.scalar = p.scalar * q.scalar - p.vec.dot(q.vec);
  r.normalize();
  return r;
}

/// Quaternion rate 1/2 q (x) [omega; 0] with omega in the child frame.
/// Returned as a raw 4-vector [vec_dot; scalar_dot]; not unit-norm.
inline Vec4 quat_kinematics(const Quaternion& q, const Vec3& omega_child) {
  Vec4 dq;
  dq.head<3>() = 0.5 * (q.scalar * omega_child + q.vec.cross(omega_child));
  dq(3) = -0.5 * q.vec.dot(omega_child);
  return dq;
}

/// Attitude error q_e = conj(q_d) (x) q_s, so that q_s = q_d (x) q_e.
inline Quaternion quat_error(const Quaternion& q_d, const Quaternion& q_s) {
  return hamilton_product(q_d.conjugate(), q_s);
}

/// Frame transformation matrix of q: v_child = rotation_matrix(q) * v_parent.
/// For the attitude error quaternion this is C_e (target frame -> body frame).
inline Mat3 rotation_matrix(const Quaternion& q) {
  const Vec3& v = q.vec;
  const double s = q.scalar;
  return (s * s - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() -
         2.0 * s * skew(v);
}

/// Kinematics Jacobian F_e = 1/2 (q_e0 I + q_ev^x); det(F_e) = q_e0 / 8.
inline Mat3 fe_matrix(const Quaternion& q_e) {
  return 0.5 * (q_e.scalar * Mat3::Identity() + skew(q_e.vec));
}

/// Inverse of F_e in closed form. Throws SingularJacobian near the
/// 180-degree error attitude (|q_e0| < 1e-6).
inline Mat3 fe_inverse(const Quaternion& q_e) {
  const double s = q_e.scalar;
  if (std::abs(s) < kFeSingularityGuard) {
    throw SingularJacobian("fe_inverse: |q_e0| = " + std::to_string(std::abs(s)) +
                           " below singularity guard");
  }
  const Vec3& v = q_e.vec;
  // (s I + v^x)^-1 = (s^2 I - s v^x + v v^T) / (s (s^2 + |v|^2)); unit norm
  // makes the trailing factor s.
  return (2.0 / s) * (s * s * Mat3::Identity() - s * skew(v) + v * v.transpose());
}

/// Time derivative of F_e along the error kinematics:
/// F_e_dot = 1/2 (-1/2 q_ev^T omega_e I + (F_e omega_e)^x).
inline Mat3 fe_matrix_dot(const Quaternion& q_e, const Vec3& omega_e) {
  const Vec3 qev_dot = fe_matrix(q_e) * omega_e;
  return 0.5 * (-0.5 * q_e.vec.dot(omega_e) * Mat3::Identity() + skew(qev_dot));
}

}  // namespace pap
