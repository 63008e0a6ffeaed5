// Acceptance suite: every scenario-level requirement is exercised at its
// stated tolerance and reported as one [ACCEPTANCE] line per criterion.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>

#include "pap/analysis.hpp"
#include "pap/config.hpp"
#include "pap/sim_engine.hpp"
#include "test_util.hpp"

using namespace pap;

namespace {

struct TimedTrace {
  SimulationTrace trace;
  double wall_seconds = 0.0;
};

const TimedTrace& nominal_run() {
  static const TimedTrace cached = [] {
    TimedTrace out;
    const auto t0 = std::chrono::steady_clock::now();
    out.trace = run_scenario(nominal_scenario());
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return cached;
}

const SimulationTrace& robust_run() {
  static const SimulationTrace cached = run_scenario(robust_scenario());
  return cached;
}

void acceptance_line(int n, const char* name, bool pass, const std::string& detail = "") {
  std::printf("[ACCEPTANCE] criterion %2d (%s): %s%s%s\n", n, name, pass ? "PASS" : "FAIL",
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

}  // namespace

TEST(Acceptance, Criterion1_NominalReproduction) {
  const TimedTrace& run = nominal_run();
  const SimulationTrace& tr = run.trace;

  bool tube_ok = true, steady_ok = true, H_ok = true, h_ok = true;
  double first_H_pos = -1.0, first_h_pos = -1.0;
  for (const auto& r : tr.rows) {
    if (r.t >= 25.0) {
      tube_ok = tube_ok && (r.s.cwiseAbs().maxCoeff() < 1e-5);
      H_ok = H_ok && (r.H > 0.0);
      h_ok = h_ok && (r.h > 0.0);
    }
    if (r.t >= 50.0) {
      steady_ok = steady_ok && (r.q_ev.cwiseAbs().maxCoeff() < 1e-5);
    }
    if (first_H_pos < 0.0 && r.H > 0.0) first_H_pos = r.t;
    if (first_h_pos < 0.0 && r.h > 0.0) first_h_pos = r.t;
  }
  const auto H_entry = positive_entry_time(tr, &TraceRow::H);
  const auto h_entry = positive_entry_time(tr, &TraceRow::h);
  const bool runtime_ok = run.wall_seconds < 60.0;

  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "tube(a):%s steady(b):%s H>0 from 25(c):%s h>0 from 25(c):%s "
                "[H holds from %.1f s, h holds from %.1f s] runtime %.2f s",
                tube_ok ? "pass" : "FAIL", steady_ok ? "pass" : "FAIL",
                H_ok ? "pass" : "FAIL", h_ok ? "pass" : "FAIL",
                H_entry ? *H_entry : -1.0, h_entry ? *h_entry : -1.0, run.wall_seconds);
  acceptance_line(1, "nominal reproduction", tube_ok && steady_ok && H_ok && h_ok && runtime_ok,
                  detail);

  EXPECT_TRUE(tube_ok) << "|q_evi - rho_i| < 1e-5 must hold for all t >= 25 s";
  EXPECT_TRUE(steady_ok) << "|q_evi| < 1e-5 must hold for all t >= 50 s";
  EXPECT_TRUE(H_ok) << "H(t) > 0 must hold for all t >= 25 s";
  EXPECT_TRUE(h_ok) << "h(t) > 0 must hold for all t >= 25 s (holds from "
                    << (h_entry ? *h_entry : -1.0) << " s; see decisions ledger)";
  EXPECT_TRUE(runtime_ok);
}

TEST(Acceptance, Criterion2_RobustnessReproduction) {
  const SimulationTrace& tr = robust_run();

  bool H_dipped = false, h_dipped = false, recovered = true;
  for (const auto& r : tr.rows) {
    if (r.t >= 100.0 && r.t <= 130.0) {
      H_dipped = H_dipped || (r.H < 0.0);
      h_dipped = h_dipped || (r.h < 0.0);
    }
    if (r.t >= 130.0) {
      recovered = recovered && (r.q_ev.cwiseAbs().maxCoeff() < 1e-5);
    }
  }
  const auto H_entry = positive_entry_time(tr, &TraceRow::H);
  const auto h_entry = positive_entry_time(tr, &TraceRow::h);
  const bool returned = H_entry.has_value() && h_entry.has_value() && *H_entry <= 130.0 &&
                        *h_entry <= 130.0;

  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "H dipped:%d h dipped:%d returned positive by %.1f/%.1f s, |q_ev|<1e-5 from 130:%s",
                H_dipped, h_dipped, H_entry ? *H_entry : -1.0, h_entry ? *h_entry : -1.0,
                recovered ? "pass" : "FAIL");
  acceptance_line(2, "robustness reproduction", H_dipped && h_dipped && returned && recovered,
                  detail);

  EXPECT_TRUE(H_dipped);
  EXPECT_TRUE(h_dipped);
  EXPECT_TRUE(returned);
  EXPECT_TRUE(recovered);
}

TEST(Acceptance, Criterion3_MonteCarloDeskScale) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg = monte_carlo_scenario();
  cfg.case_count = 100;

  int accuracy_ok = 0, entries_ok = 0, failures = 0;
  double worst = 0.0;
  const auto results = run_monte_carlo(cfg);
  for (const auto& res : results) {
    if (!res.report) {
      ++failures;
      continue;
    }
    if (res.report->tube_entry_time && res.report->h_entry_time) {
      ++entries_ok;
    }
    const SimulationTrace tr = run_scenario(mc_case_config(cfg, res.case_id));
    double qmax60 = 0.0;
    for (const auto& r : tr.rows) {
      if (r.t >= 60.0) qmax60 = std::max(qmax60, r.q_ev.cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, qmax60);
    if (qmax60 < 2e-6) ++accuracy_ok;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = failures == 0 && accuracy_ok == cfg.case_count &&
                    entries_ok == cfg.case_count && wall < 900.0;

  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "%d/%d cases < 2e-6 after 60 s (worst %.2e), %d/%d barrier entries hold, "
                "%d failures, %.1f s",
                accuracy_ok, cfg.case_count, worst, entries_ok, cfg.case_count, failures, wall);
  acceptance_line(3, "Monte Carlo desk scale", pass, detail);

  EXPECT_EQ(failures, 0);
  EXPECT_EQ(accuracy_ok, cfg.case_count);
  EXPECT_EQ(entries_ok, cfg.case_count);
  EXPECT_LT(wall, 900.0);
}

TEST(Acceptance, Criterion4_SontagIdentitySuite) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ua(-50.0, 50.0), ub(1e-9, 50.0), us(1e-3, 3.0);
  bool identity_ok = true, sign_ok = true;
  for (int i = 0; i < 10000; ++i) {
    const double A = ua(rng), B = ub(rng), sigma = us(rng);
    const double lam0 = sontag_lambda(A, B, sigma, 0.0);
    identity_ok = identity_ok && std::abs(A + B * lam0 + std::sqrt(A * A + sigma * B * B)) <
                                     1e-9 * (1.0 + std::abs(A) + B);
    sign_ok = sign_ok && lam0 <= 0.0 && sontag_lambda(A, B, sigma, 1e-7) <= 0.0;
  }
  bool continuity_ok = true;
  for (double A = -2.0; A <= 2.0; A += 0.2) {
    const double at_zero = sontag_lambda(A, 0.0, 1.0, 1e-7);
    continuity_ok = continuity_ok && std::abs(sontag_lambda(A, 1e-14, 1.0, 1e-7) - at_zero) <
                                         1e-6 * (1.0 + std::abs(at_zero));
  }
  acceptance_line(4, "Sontag identity suite", identity_ok && sign_ok && continuity_ok);
  EXPECT_TRUE(identity_ok);
  EXPECT_TRUE(sign_ok);
  EXPECT_TRUE(continuity_ok);
}

TEST(Acceptance, Criterion5_GradientCheck) {
  const SimulationTrace& tr = nominal_run().trace;
  const ScenarioConfig cfg = nominal_scenario();
  const Quaternion q_e0 = quat_error(cfg.q_d0, cfg.q_s0);
  std::array<RpfPoly, 3> rpf;
  for (int i = 0; i < 3; ++i) {
    rpf[i] = fit_rpf(q_e0.vec(i) - cfg.rpf_offset(i), cfg.t_sd);
  }
  auto rpf_eval = [&](double t, Vec3& rho, Vec3& rho_dot, Vec3& rho_ddot) {
    for (int i = 0; i < 3; ++i) {
      const RpfEval e = eval_rpf(rpf[i], t);
      rho(i) = e.rho;
      rho_dot(i) = e.rho_dot;
      rho_ddot(i) = e.rho_ddot;
    }
  };

  int checked = 0;
  double worst_rel = 0.0;
  const double h = 1e-5;
  for (const auto& row : tr.rows) {
    if (row.t < 0.3 || row.t > 20.0) continue;
    const Quaternion q(row.q_ev, row.q_e0);
    const Vec3 omega_e = row.omega_e;
    if (4.0 * cfg.gains.K_H * cfg.gains.K_H * row.s.squaredNorm() < 1e-6) continue;

    auto omega_v_at = [&](double t, const Quaternion& qq) {
      Vec3 rho, rho_dot, rho_ddot;
      rpf_eval(t, rho, rho_dot, rho_ddot);
      return virtual_control(qq, tracking_error(qq.vec, rho), rho_dot, cfg.gains).omega_v;
    };
    auto advance = [&](double dt) {
      const Vec4 dq = quat_kinematics(q, omega_e);
      const Vec4 q4 = q.as_vec4() + dt * dq;
      return Quaternion(q4.head<3>(), q4(3));
    };
    const Vec3 fd = (omega_v_at(row.t + h, advance(h)) - omega_v_at(row.t - h, advance(-h))) /
                    (2.0 * h);
    Vec3 rho, rho_dot, rho_ddot;
    rpf_eval(row.t, rho, rho_dot, rho_ddot);
    const Vec3 an = virtual_control_derivative({q, omega_e}, tracking_error(q.vec, rho),
                                               rho_dot, rho_ddot, cfg.gains);
    const double err = (an - fd).norm();
    const double bound = std::max(1e-8, 1e-4 * fd.norm());
    worst_rel = std::max(worst_rel, err / std::max(1e-300, fd.norm()));
    EXPECT_LT(err, bound) << "at t = " << row.t;
    ++checked;
  }
  const bool pass = checked >= 100;
  char detail[128];
  std::snprintf(detail, sizeof(detail), "%d trajectory points, worst relative error %.2e",
                checked, worst_rel);
  acceptance_line(5, "analytic gradient check", pass && worst_rel < 1e-4, detail);
  EXPECT_GE(checked, 100);
}

TEST(Acceptance, Criterion6_AttitudeMathInvariants) {
  std::mt19937_64 rng(103);
  bool det_ok = true, orth_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const Quaternion q = test::random_unit_quaternion(rng);
    det_ok = det_ok && std::abs(fe_matrix(q).determinant() - q.scalar / 8.0) < 1e-12;
    const Mat3 R = rotation_matrix(q);
    orth_ok = orth_ok &&
              (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12;
  }
  double worst_drift = 0.0;
  for (const auto& row : nominal_run().trace.rows) {
    const double norm = std::sqrt(row.q_ev.squaredNorm() + row.q_e0 * row.q_e0);
    worst_drift = std::max(worst_drift, std::abs(norm - 1.0));
  }
  const bool drift_ok = worst_drift < 1e-9;
  char detail[128];
  std::snprintf(detail, sizeof(detail), "det/orthonormality over 1000 draws, norm drift %.2e",
                worst_drift);
  acceptance_line(6, "attitude-math invariants", det_ok && orth_ok && drift_ok, detail);
  EXPECT_TRUE(det_ok);
  EXPECT_TRUE(orth_ok);
  EXPECT_TRUE(drift_ok);
}

TEST(Acceptance, Criterion7_RpfBoundarySuite) {
  bool ok = true;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> ua(-1.0, 1.0), ut(5.0, 150.0);
  auto check_poly = [&](double a0, double T) {
    const RpfPoly p = fit_rpf(a0, T);
    const auto& a = p.coeffs;
    auto val = [&](double t) { return a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4]))); };
    auto dot = [&](double t) { return a[1] + t * (2 * a[2] + t * (3 * a[3] + t * 4 * a[4])); };
    auto ddot = [&](double t) { return 2 * a[2] + t * (6 * a[3] + t * 12 * a[4]); };
    ok = ok && std::abs(val(0) - a0) < 1e-9 && std::abs(dot(0)) < 1e-9 &&
         std::abs(val(T)) < 1e-9 && std::abs(dot(T)) < 1e-9 && std::abs(ddot(T)) < 1e-9;
    const RpfEval before = eval_rpf(p, T * (1.0 - 1e-9));
    const RpfEval after = eval_rpf(p, T);
    ok = ok && std::abs(before.rho - after.rho) < 1e-9 &&
         std::abs(before.rho_dot - after.rho_dot) < 1e-9 &&
         std::abs(before.rho_ddot - after.rho_ddot) < 1e-9;
  };
  check_poly(0.5965, 80.0);
  for (int i = 0; i < 50; ++i) {
    check_poly(ua(rng), ut(rng));
  }
  const bool value_ok = std::abs(eval_rpf(fit_rpf(0.5965, 80.0), 40.0).rho - 0.18640625) < 1e-12;
  acceptance_line(7, "RPF boundary suite", ok && value_ok);
  EXPECT_TRUE(ok);
  EXPECT_TRUE(value_ok);
}

TEST(Acceptance, Criterion8_ObserverLinearOracle) {
  const SpacecraftParams p = SpacecraftParams::reference_spacecraft();
  const ObserverParams op;
  const TargetState target{Quaternion::identity(), Vec3::Zero(), Vec3::Zero()};
  const Vec3 d0(2e-3, -1e-3, 1.5e-3);

  Eigen::VectorXd x(13);
  const Quaternion q0(Vec3(0.1, -0.2, 0.05), 0.97);
  x << q0.vec, q0.scalar, Vec3(0.05, -0.03, 0.02), Vec3::Zero(), Vec3::Zero();
  auto deriv = [&](const Eigen::VectorXd& xs, double) {
    const Quaternion q(xs.segment<3>(0), xs(3));
    const Vec3 we = xs.segment<3>(4);
    const ObserverState obs{xs.segment<3>(7), xs.segment<3>(10)};
    const ErrorDerivative ed = error_derivative({q, we}, target, Vec3::Zero(), d0, p);
    const Vec3 Om = coupling_term(q, we, target, p);
    const ObserverDerivative od = observer_derivative(obs, we, Vec3::Zero(), Om, p, op);
    Eigen::VectorXd dx(13);
    dx << ed.q_e_dot, ed.omega_e_dot, od.F1_hat_dot, od.F2_hat_dot;
    return dx;
  };

  Eigen::Matrix2d M;
  M << -op.C1 * op.beta, 1.0, -op.C2 * op.beta * op.beta, 0.0;
  const Vec3 F2_true = p.J_inv * d0;
  const Vec3 e1_0 = x.segment<3>(7) - x.segment<3>(4);
  const Vec3 e2_0 = Vec3(x.segment<3>(10)) - F2_true;

  const double dt = 1e-3;
  double worst = 0.0;
  for (long k = 0; k * dt <= 10.0; ++k) {
    const double t = k * dt;
    if (k % 100 == 0) {
      const Eigen::Matrix2d Phi = pap::test::expm2(M, t);
      const Vec3 e1 = x.segment<3>(7) - x.segment<3>(4);
      const Vec3 e2 = Vec3(x.segment<3>(10)) - F2_true;
      for (int axis = 0; axis < 3; ++axis) {
        const Eigen::Vector2d pred = Phi * Eigen::Vector2d(e1_0(axis), e2_0(axis));
        worst = std::max(worst, std::abs(e1(axis) - pred(0)));
        worst = std::max(worst, std::abs(e2(axis) - pred(1)));
      }
    }
    x = rk4_step(deriv, x, t, dt);
    x.head<4>().normalize();
  }
  const bool oracle_ok = worst < 1e-8;

  Eigen::Matrix2d Mdef;
  Mdef << -op.C1, 1.0, -op.C2 * op.beta, 0.0;
  const Eigen::EigenSolver<Eigen::Matrix2d> es(Mdef);
  const bool poles_ok = std::abs(es.eigenvalues()(0).real() + 1.0) < 1e-10 &&
                        std::abs(es.eigenvalues()(1).real() + 1.0) < 1e-10 &&
                        std::abs(es.eigenvalues()(0).imag()) < 1e-10 &&
                        std::abs(es.eigenvalues()(1).imag()) < 1e-10;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "max |sim - analytic| = %.2e over 10 s", worst);
  acceptance_line(8, "observer linear oracle", oracle_ok && poles_ok, detail);
  EXPECT_TRUE(oracle_ok);
  EXPECT_TRUE(poles_ok);
}

TEST(Acceptance, Criterion9_FiniteTimeBoundValidity) {
  // Feasible-constants scenario: H(0) <= 0, z2(0) = 0, no disturbance,
  // static target, exact observer start.
  ScenarioConfig cfg = nominal_scenario();
  cfg.gains.delta_H = 3e-5;  // delta_S = 1e-5 > 0
  cfg.target_motion = TargetMotion::rest;
  cfg.disturbance = DisturbanceModel::none_model();
  cfg.rpf_offset = Vec3(0.01, 0.01, 0.01);
  cfg.t_final = 60.0;

  const Quaternion q_e0 = quat_error(cfg.q_d0, cfg.q_s0);
  const Vec3 s0 = cfg.rpf_offset;
  const auto vc = virtual_control(q_e0, s0, Vec3::Zero(), cfg.gains);
  cfg.omega_s0 = vc.omega_v;  // omega_e(0) = omega_v(0), so z2(0) = 0

  const SimulationTrace tr = run_scenario(cfg);
  const TraceRow& first = tr.rows.front();
  ASSERT_LE(first.H, 0.0);
  ASSERT_GT(first.h, 0.0);
  ASSERT_LT(first.z2.norm(), cfg.gains.Delta_h);

  const TheoryBounds base =
      derived_constants(cfg.gains, cfg.spacecraft, cfg.observer, /*xi_m=*/0.0);
  ASSERT_TRUE(base.feasible);
  const TheoryBounds b = attraction_bounds(first.H, first.h, first.z2.norm(), base, cfg.gains);

  double crossing = -1.0;
  for (const auto& r : tr.rows) {
    if (r.H > 0.0) {
      crossing = r.t;
      break;
    }
  }
  const bool bound_ok = crossing >= 0.0 && crossing <= b.T_H1;

  // G_B closed form against numerical maximization
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> ua(0.05, 4.0), un(0.1, 10.0);
  bool gb_ok = true;
  for (int i = 0; i < 100; ++i) {
    const double alpha = ua(rng), gamma = ua(rng), n = un(rng);
    if (std::abs(gamma - 2.0 * alpha) < 1e-6) continue;
    auto f = [&](double t) {
      return (2.0 * n / (2.0 * alpha - gamma)) *
             (std::exp(-gamma * t / 2.0) - std::exp(-alpha * t));
    };
    const double hi = 50.0 / std::min(alpha, 0.5 * gamma) + 10.0;
    const double numeric = pap::test::golden_section_max(f, 0.0, hi);
    gb_ok = gb_ok && std::abs(g_b_bound(alpha, gamma, n) - numeric) <
                         1e-9 * std::max(1.0, numeric);
  }

  char detail[128];
  std::snprintf(detail, sizeof(detail), "measured H crossing %.1f s <= T_H1 %.1f s; G_B oracle ok:%d",
                crossing, b.T_H1, gb_ok);
  acceptance_line(9, "finite-time bound validity", bound_ok && gb_ok, detail);
  EXPECT_TRUE(bound_ok);
  EXPECT_TRUE(gb_ok);
}

TEST(Acceptance, Criterion10_PapConditionMonitor) {
  const ControllerGains g = nominal_scenario().gains;
  const auto nominal_violations = pap_monitor(nominal_run().trace, g);
  const bool clean = nominal_violations.empty();

  SimulationTrace synthetic;
  synthetic.dt = 0.1;
  for (double t = 0.0; t <= 20.0 + 1e-9; t += synthetic.dt) {
    TraceRow row;
    row.t = t;
    row.H = std::exp(-2.0 * g.alpha * t);
    row.z2 = Vec3::Zero();
    synthetic.rows.push_back(row);
  }
  const auto synthetic_violations = pap_monitor(synthetic, g);
  const bool flagged_all = synthetic_violations.size() == synthetic.rows.size() - 1;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "nominal violations: %zu, synthetic flagged %zu/%zu",
                nominal_violations.size(), synthetic_violations.size(),
                synthetic.rows.size() - 1);
  acceptance_line(10, "barrier-condition monitor", clean && flagged_all, detail);
  EXPECT_TRUE(clean);
  EXPECT_TRUE(flagged_all);
}
