// trace.hpp

#pragma once

#include <vector>

#include "pap/attitude_math.hpp"

namespace pap {

/// One control-rate sample of the closed loop.
struct TraceRow {
  double t = 0.0;
  Vec3 q_ev = Vec3::Zero();
  double q_e0 = 1.0;
  Vec3 rho = Vec3::Zero();
  Vec3 s = Vec3::Zero();
  Vec3 omega_s = Vec3::Zero();
  Vec3 omega_e = Vec3::Zero();
  Vec3 z2 = Vec3::Zero();
  Vec3 u = Vec3::Zero();  // saturated applied torque
  Vec3 d = Vec3::Zero();
  Vec3 d_hat = Vec3::Zero();
  double H = 0.0;
  double h = 0.0;
  double lambda_v = 0.0;
  double lambda_u = 0.0;
};

/// Uniformly sampled record of a scenario run (one row per control tick,
/// t = 0 .. t_final inclusive).
struct SimulationTrace {
  double dt = 0.1;
  std::vector<TraceRow> rows;
};

}  // namespace pap
