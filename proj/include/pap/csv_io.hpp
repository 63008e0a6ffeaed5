// csv_io.hpp
//
// CSV emission for traces and per-case summaries. Values are written in
// scientific notation with 9 significant digits and a dot decimal separator
// regardless of locale; absent values are written as NA.

#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pap/analysis.hpp"
#include "pap/trace.hpp"

namespace pap {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// std::to_chars is locale-independent; the global C locale must not be able
// to change the decimal separator of emitted files.
inline std::string fmt_sci(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 8);
  return std::string(buf, res.ptr);
}

inline std::string fmt_or_na(const std::optional<double>& v) {
  return v.has_value() ? fmt_sci(*v) : std::string("NA");
}

inline std::string fmt_or_na(double v) {
  return std::isfinite(v) ? fmt_sci(v) : std::string("NA");
}

}  // namespace detail

inline constexpr const char* kTraceCsvHeader =
    "t,qev1,qev2,qev3,qe0,rho1,rho2,rho3,s1,s2,s3,ws1,ws2,ws3,we1,we2,we3,"
    "z21,z22,z23,u1,u2,u3,d1,d2,d3,dhat1,dhat2,dhat3,H,h,lambda_v,lambda_u";

inline void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_trace_csv: cannot open '" + path + "'");
  }
  out << kTraceCsvHeader << "\n";
  for (const TraceRow& r : trace.rows) {
    const double cols[33] = {
        r.t,
        r.q_ev(0), r.q_ev(1), r.q_ev(2), r.q_e0,
        r.rho(0), r.rho(1), r.rho(2),
        r.s(0), r.s(1), r.s(2),
        r.omega_s(0), r.omega_s(1), r.omega_s(2),
        r.omega_e(0), r.omega_e(1), r.omega_e(2),
        r.z2(0), r.z2(1), r.z2(2),
        r.u(0), r.u(1), r.u(2),
        r.d(0), r.d(1), r.d(2),
        r.d_hat(0), r.d_hat(1), r.d_hat(2),
        r.H, r.h, r.lambda_v, r.lambda_u};
    for (int i = 0; i < 33; ++i) {
      if (i > 0) {
        out << ',';
      }
      out << detail::fmt_sci(cols[i]);
    }
    out << "\n";
  }
  out.flush();
  if (!out) {
    throw IoError("write_trace_csv: write to '" + path + "' failed");
  }
}

struct SummaryRow {
  int case_id = 0;
  std::optional<PerformanceReport> report;
  std::optional<TheoryBounds> bounds;
  std::string error;  // non-empty when the case failed
};

inline constexpr const char* kSummaryCsvHeader =
    "case,settling_time1,settling_time2,settling_time3,"
    "steady_state_max1,steady_state_max2,steady_state_max3,"
    "overshoot1,overshoot2,overshoot3,tube_entry_time,h_entry_time,pap_satisfied,"
    "delta_S,delta_z,feasible,T_H1,T_h,T_H2,G_B,H_B,D_e,error";

inline void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("write_summary_csv: cannot open '" + path + "'");
  }
  out << kSummaryCsvHeader << "\n";
  for (const SummaryRow& row : rows) {
    out << row.case_id;
    if (row.report.has_value()) {
      const PerformanceReport& rep = *row.report;
      for (int i = 0; i < 3; ++i) {
        out << ',' << detail::fmt_or_na(rep.settling_time[i]);
      }
      for (int i = 0; i < 3; ++i) {
        out << ',' << detail::fmt_sci(rep.steady_state_max[i]);
      }
      for (int i = 0; i < 3; ++i) {
        out << ',' << detail::fmt_sci(rep.overshoot[i]);
      }
      out << ',' << detail::fmt_or_na(rep.tube_entry_time);
      out << ',' << detail::fmt_or_na(rep.h_entry_time);
      out << ',' << (rep.pap_satisfied ? "true" : "false");
    } else {
      for (int i = 0; i < 12; ++i) {
        out << ",NA";
      }
    }
    if (row.bounds.has_value()) {
      const TheoryBounds& b = *row.bounds;
      out << ',' << detail::fmt_sci(b.delta_S) << ',' << detail::fmt_sci(b.delta_z);
      out << ',' << (b.feasible ? "true" : "false");
      if (b.feasible) {
        out << ',' << detail::fmt_or_na(b.T_H1) << ',' << detail::fmt_or_na(b.T_h) << ','
            << detail::fmt_or_na(b.T_H2) << ',' << detail::fmt_or_na(b.G_B) << ','
            << detail::fmt_or_na(b.H_B) << ',' << detail::fmt_or_na(b.D_e);
      } else {
        out << ",NA,NA,NA,NA,NA," << detail::fmt_or_na(b.D_e);
      }
    } else {
      for (int i = 0; i < 9; ++i) {
        out << ",NA";
      }
    }
    out << ',' << (row.error.empty() ? "" : row.error) << "\n";
  }
  out.flush();
  if (!out) {
    throw IoError("write_summary_csv: write to '" + path + "' failed");
  }
}

}  // namespace pap
