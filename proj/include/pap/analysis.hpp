// analysis.hpp
//
// Post-processing over simulation traces: settling time / steady-state /
// overshoot metrics, the finite-time attraction bounds T_H1, T_h, T_H2 with
// their derived constants, and the runtime barrier monitor that checks the
// discretized condition H_dot > -alpha H.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "pap/controller.hpp"
#include "pap/observer.hpp"
#include "pap/trace.hpp"

namespace pap {

struct EmptyTrace : std::runtime_error {
  explicit EmptyTrace(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleConstants : std::runtime_error {
  explicit InfeasibleConstants(const std::string& what) : std::runtime_error(what) {}
};

/// Smallest sample time T such that |x(t)| < delta for every sample t >= T.
/// Absent when the last sample still violates the bound.
inline std::optional<double> settling_time(const std::vector<double>& x, double dt,
                                           double delta) {
  if (x.empty()) {
    throw EmptyTrace("settling_time: empty series");
  }
  std::size_t last_violation = x.size();  // sentinel: none
  for (std::size_t i = x.size(); i-- > 0;) {
    if (!(std::abs(x[i]) < delta)) {
      last_violation = i;
      break;
    }
  }
  if (last_violation == x.size()) {
    return 0.0;
  }
  if (last_violation == x.size() - 1) {
    return std::nullopt;
  }
  return static_cast<double>(last_violation + 1) * dt;
}

/// Largest excursion past zero on the side opposite the initial sign;
/// zero if the series never crosses.
inline double overshoot(const std::vector<double>& x, double initial_sign) {
  if (x.empty()) {
    throw EmptyTrace("overshoot: empty series");
  }
  const double sgn = initial_sign >= 0.0 ? 1.0 : -1.0;
  double worst = 0.0;
  for (double v : x) {
    worst = std::max(worst, -sgn * v);
  }
  return std::max(worst, 0.0);
}

struct PerformanceReport {
  std::array<std::optional<double>, 3> settling_time{};  // s, per axis
  std::array<double, 3> steady_state_max{};              // max |q_evi|, t >= t_sd
  std::array<double, 3> overshoot{};
  std::optional<double> tube_entry_time;  // first t after which H > 0 holds to the end
  std::optional<double> h_entry_time;
  bool pap_satisfied = false;
};

struct TheoryBounds {
  double delta_S = 0.0;
  double delta_z = 0.0;
  double T_H1 = std::numeric_limits<double>::quiet_NaN();
  double T_h = std::numeric_limits<double>::quiet_NaN();
  double T_H2 = std::numeric_limits<double>::quiet_NaN();
  double G_B = std::numeric_limits<double>::quiet_NaN();
  double H_B = std::numeric_limits<double>::quiet_NaN();
  double D_e = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
};

/// Auxiliary constants of the observer-error bound D_e; they are not pinned
/// by the control design and enter only this diagnostic.
struct TheoryAux {
  double h_m = 1e-4;
  double chi = 0.5;
  double C_d = 1.0;
};

/// Minimum eigenvalue of the solution Q of M^T Q + Q M = -I for the per-axis
/// observer error matrix M = [[-C1, 1], [-C2 beta, 0]].
inline double observer_lyapunov_min_eig(const ObserverParams& op) {
  const double c2 = op.C2 * op.beta;
  const double q12 = -0.5;
  const double q11 = (1.0 + c2) / (2.0 * op.C1);
  const double q22 = (q11 + 0.5 * op.C1) / c2;
  const double mid = 0.5 * (q11 + q22);
  const double rad = std::sqrt(0.25 * (q11 - q22) * (q11 - q22) + q12 * q12);
  return mid - rad;
}

/// delta_S = delta_H - K_H Delta_h and delta_z = delta_h - 2 K_h xi_m /
/// lambda_Jmin; the attraction bounds exist only when both are positive.
/// Also evaluates the observer-error bound
/// D_e = lambda_Jmax sqrt(h_m / (chi C_d lambda_Q2min)).
inline TheoryBounds derived_constants(const ControllerGains& g, const SpacecraftParams& params,
                                      const ObserverParams& op, double xi_m,
                                      const TheoryAux& aux = TheoryAux{}) {
  TheoryBounds b;
  b.delta_S = g.delta_H - g.K_H * g.Delta_h;
  b.delta_z = g.delta_h - 2.0 * g.K_h * xi_m / params.lambda_J_min;
  b.feasible = b.delta_S > 0.0 && b.delta_z > 0.0;
  b.D_e = params.lambda_J_max *
          std::sqrt(aux.h_m / (aux.chi * aux.C_d * observer_lyapunov_min_eig(op)));
  return b;
}

/// Peak of the transient bound term: max over t >= 0 of
/// (2n / (2 alpha - gamma)) (e^{-gamma t / 2} - e^{-alpha t}), with the
/// gamma = 2 alpha limit n / (alpha e).
inline double g_b_bound(double alpha, double gamma, double n) {
  if (n == 0.0) {
    return 0.0;
  }
  if (gamma == 2.0 * alpha) {
    return n / (alpha * std::exp(1.0));
  }
  const double r = gamma / (2.0 * alpha);
  return n / (alpha - 0.5 * gamma) * std::exp(-(gamma / (gamma - 2.0 * alpha)) * std::log(r)) *
         (1.0 - r);
}

/// Finite-time attraction bounds from the initial barrier values:
///   T_H1 = (1/alpha) ln(alpha |H(0)| / (delta_S Delta_e) + 1)   (h(0) > 0)
///   T_h  = (1/gamma) ln(gamma |h(0)| / (delta_z Delta_h) + 1)   (h(0) <= 0)
///   H_B  = H(0) e^{-alpha T_h} + (delta_S Delta_e / alpha)(1 - e^{-alpha T_h}) - G_B
///   T_H2 = (1/alpha) ln(alpha |H_B| / (delta_S Delta_e) + 1)
/// Throws InfeasibleConstants unless delta_S and delta_z are positive.
inline TheoryBounds attraction_bounds(double H0, double h0, double z2_0_norm,
                                      const TheoryBounds& base, const ControllerGains& g) {
  if (!base.feasible) {
    throw InfeasibleConstants("attraction_bounds: delta_S and delta_z must be positive");
  }
  TheoryBounds b = base;
  const double m = b.delta_S * g.Delta_e;
  b.T_H1 = H0 > 0.0 ? 0.0 : std::log(g.alpha * std::abs(H0) / m + 1.0) / g.alpha;
  if (h0 > 0.0) {
    b.T_h = 0.0;
    return b;
  }
  b.T_h = std::log(g.gamma * std::abs(h0) / (b.delta_z * g.Delta_h) + 1.0) / g.gamma;
  const double Z1 = std::sqrt(std::max(z2_0_norm * z2_0_norm - g.Delta_h * g.Delta_h, 0.0));
  b.G_B = g_b_bound(g.alpha, g.gamma, g.K_H * Z1 * g.Delta_e);
  const double decay = std::exp(-g.alpha * b.T_h);
  b.H_B = H0 * decay + (m / g.alpha) * (1.0 - decay) - b.G_B;
  b.T_H2 = b.H_B >= 0.0 ? 0.0 : std::log(g.alpha * std::abs(b.H_B) / m + 1.0) / g.alpha;
  return b;
}

struct PapViolation {
  std::size_t index = 0;
  double t = 0.0;
  double H = 0.0;
  double H_dot_fd = 0.0;
};

/// Discretized check of H_dot > -alpha H on the logged trace, gated to the
/// samples with ||z2|| < Delta_h where the condition is claimed.
inline std::vector<PapViolation> pap_monitor(const SimulationTrace& trace,
                                             const ControllerGains& g) {
  std::vector<PapViolation> violations;
  if (trace.rows.size() < 2) {
    return violations;
  }
  for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    if (row.z2.norm() >= g.Delta_h) {
      continue;
    }
    const double H_dot_fd = (trace.rows[k + 1].H - row.H) / trace.dt;
    const double tol = 1e-12 * std::max(1.0, std::abs(row.H));
    if (H_dot_fd + g.alpha * row.H < -tol) {
      violations.push_back(PapViolation{k, row.t, row.H, H_dot_fd});
    }
  }
  return violations;
}

/// First sample time after which the series stays strictly positive to the
/// end of the trace.
inline std::optional<double> positive_entry_time(const SimulationTrace& trace,
                                                 double TraceRow::* member) {
  if (trace.rows.empty()) {
    throw EmptyTrace("positive_entry_time: empty trace");
  }
  std::size_t last_nonpos = trace.rows.size();
  for (std::size_t i = trace.rows.size(); i-- > 0;) {
    if (!(trace.rows[i].*member > 0.0)) {
      last_nonpos = i;
      break;
    }
  }
  if (last_nonpos == trace.rows.size()) {
    return trace.rows.front().t;
  }
  if (last_nonpos == trace.rows.size() - 1) {
    return std::nullopt;
  }
  return trace.rows[last_nonpos + 1].t;
}

/// Full per-run report. pap_satisfied means: every axis settles inside
/// Delta_e and stays there, both barriers enter and hold positive, and the
/// monitor records no violations.
inline PerformanceReport make_report(const SimulationTrace& trace, const ControllerGains& g,
                                     double t_sd) {
  if (trace.rows.empty()) {
    throw EmptyTrace("make_report: empty trace");
  }
  PerformanceReport rep;
  const std::size_t n = trace.rows.size();
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> series(n);
    for (std::size_t k = 0; k < n; ++k) {
      series[k] = trace.rows[k].q_ev(axis);
    }
    rep.settling_time[axis] = settling_time(series, trace.dt, g.Delta_e);
    rep.overshoot[axis] = overshoot(series, series.front() >= 0.0 ? 1.0 : -1.0);
    const double window_start = std::min(t_sd, trace.rows.back().t);
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (trace.rows[k].t >= window_start) {
        ss = std::max(ss, std::abs(series[k]));
      }
    }
    rep.steady_state_max[axis] = ss;
  }
  rep.tube_entry_time = positive_entry_time(trace, &TraceRow::H);
  rep.h_entry_time = positive_entry_time(trace, &TraceRow::h);

  bool ok = rep.tube_entry_time.has_value() && rep.h_entry_time.has_value();
  for (int axis = 0; axis < 3; ++axis) {
    ok = ok && rep.settling_time[axis].has_value() &&
         rep.steady_state_max[axis] < g.Delta_e;
  }
  rep.pap_satisfied = ok && pap_monitor(trace, g).empty();
  return rep;
}

}  // namespace pap
