// rpf.hpp
//
// Reference Performance Function: per-axis 4th-order polynomial that decays
// from its initial value to zero exactly at t_sd and then stays zero. The
// five coefficients come from rho(0) = a0, rho_dot(0) = 0 and
// rho(t_sd) = rho_dot(t_sd) = rho_ddot(t_sd) = 0, which makes the junction
// with the zero tail C^2:
//
//   rho(t) = a0 * (1 - 6 (t/T)^2 + 8 (t/T)^3 - 3 (t/T)^4),  t in [0, T].

#pragma once

#include <array>
#include <stdexcept>

namespace pap {

struct InvalidHorizon : std::runtime_error {
  explicit InvalidHorizon(const std::string& what) : std::runtime_error(what) {}
};

struct RpfPoly {
  std::array<double, 5> coeffs{};  // a0..a4
  double t_sd = 1.0;
};

struct RpfEval {
  double rho = 0.0;
  double rho_dot = 0.0;
  double rho_ddot = 0.0;
};

inline RpfPoly fit_rpf(double a0, double t_sd) {
  if (!(t_sd > 0.0)) {
    throw InvalidHorizon("fit_rpf: t_sd must be positive");
  }
  RpfPoly p;
  p.t_sd = t_sd;
  const double T2 = t_sd * t_sd;
  p.coeffs = {a0, 0.0, -6.0 * a0 / T2, 8.0 * a0 / (T2 * t_sd), -3.0 * a0 / (T2 * T2)};
  return p;
}

inline RpfEval eval_rpf(const RpfPoly& p, double t) {
  if (t >= p.t_sd) {
    return RpfEval{};
  }
  const auto& a = p.coeffs;
  RpfEval e;
  e.rho = a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4])));
  e.rho_dot = a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * 4.0 * a[4]));
  e.rho_ddot = 2.0 * a[2] + t * (6.0 * a[3] + t * 12.0 * a[4]);
  return e;
}

}  // namespace pap
