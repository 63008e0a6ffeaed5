// config.hpp
//
// Flat key-value scenario configuration. One `section.key = value` pair per
// line, `#` starts a comment, unknown keys are rejected, missing keys keep
// the built-in defaults of the base scenario. Angles cross this boundary in
// degrees (init.omega_s_deg); everything else is SI.

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pap/sim_engine.hpp"

namespace pap {

struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& what, int line_no)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

struct UnknownKey : ParseError {
  UnknownKey(const std::string& key, int line_no)
      : ParseError("unknown key '" + key + "'", line_no) {}
};

struct UnitRangeError : ParseError {
  UnitRangeError(const std::string& what, int line_no) : ParseError(what, line_no) {}
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& key, const std::string& value,
                                         std::size_t count, int line) {
  std::istringstream iss(value);
  std::vector<double> out;
  double v;
  while (iss >> v) {
    out.push_back(v);
  }
  std::string rest;
  if (iss.bad() || (iss >> rest, !rest.empty()) || out.size() != count) {
    throw ParseError("key '" + key + "' expects " + std::to_string(count) + " number(s), got '" +
                         value + "'",
                     line);
  }
  return out;
}

inline double parse_positive(const std::string& key, const std::string& value, int line) {
  const double v = parse_numbers(key, value, 1, line)[0];
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw UnitRangeError("key '" + key + "' must be positive, got " + value, line);
  }
  return v;
}

inline double parse_nonnegative(const std::string& key, const std::string& value, int line) {
  const double v = parse_numbers(key, value, 1, line)[0];
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw UnitRangeError("key '" + key + "' must be >= 0, got " + value, line);
  }
  return v;
}

inline Vec3 parse_vec3(const std::string& key, const std::string& value, int line) {
  const auto v = parse_numbers(key, value, 3, line);
  return Vec3(v[0], v[1], v[2]);
}

inline Quaternion parse_quat(const std::string& key, const std::string& value, int line) {
  const auto v = parse_numbers(key, value, 4, line);
  try {
    return Quaternion(Vec3(v[0], v[1], v[2]), v[3]);
  } catch (const std::invalid_argument& e) {
    throw UnitRangeError("key '" + key + "': " + e.what(), line);
  }
}

using KeyHandler = std::function<void(ScenarioConfig&, const std::string&, int)>;

inline const std::map<std::string, KeyHandler>& key_table() {
  static const std::map<std::string, KeyHandler> table = [] {
    std::map<std::string, KeyHandler> t;
    auto pos = [](double ScenarioConfig::* field, const char* name) {
      return [field, name](ScenarioConfig& c, const std::string& v, int ln) {
        c.*field = parse_positive(name, v, ln);
      };
    };
    t["sim.t_final"] = pos(&ScenarioConfig::t_final, "sim.t_final");
    t["sim.dt_control"] = pos(&ScenarioConfig::dt_control, "sim.dt_control");
    t["sim.dt_inner"] = pos(&ScenarioConfig::dt_inner, "sim.dt_inner");
    t["sim.seed"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      const double raw = parse_nonnegative("sim.seed", v, ln);
      c.seed = static_cast<std::uint64_t>(raw);
    };
    t["sim.case_count"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      const double raw = parse_numbers("sim.case_count", v, 1, ln)[0];
      if (raw < 1.0 || raw != std::floor(raw)) {
        throw UnitRangeError("sim.case_count must be an integer >= 1", ln);
      }
      c.case_count = static_cast<int>(raw);
    };
    t["init.q_s"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.q_s0 = parse_quat("init.q_s", v, ln);
    };
    t["init.omega_s_deg"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.omega_s0 = (M_PI / 180.0) * parse_vec3("init.omega_s_deg", v, ln);
    };
    t["target.q_d"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.q_d0 = parse_quat("target.q_d", v, ln);
    };
    t["target.motion"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      if (v == "tracking") {
        c.target_motion = TargetMotion::tracking;
      } else if (v == "rest") {
        c.target_motion = TargetMotion::rest;
      } else {
        throw UnitRangeError("target.motion must be 'tracking' or 'rest'", ln);
      }
    };
    t["rpf.offset"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.rpf_offset = parse_vec3("rpf.offset", v, ln);
    };
    t["rpf.t_sd"] = pos(&ScenarioConfig::t_sd, "rpf.t_sd");

    auto gain = [](double ControllerGains::* field, const char* name) {
      return [field, name](ScenarioConfig& c, const std::string& v, int ln) {
        c.gains.*field = parse_positive(name, v, ln);
      };
    };
    t["gains.K_H"] = gain(&ControllerGains::K_H, "gains.K_H");
    t["gains.K_h"] = gain(&ControllerGains::K_h, "gains.K_h");
    t["gains.K_s"] = gain(&ControllerGains::K_s, "gains.K_s");
    t["gains.K_2"] = gain(&ControllerGains::K_2, "gains.K_2");
    t["gains.alpha"] = gain(&ControllerGains::alpha, "gains.alpha");
    t["gains.gamma"] = gain(&ControllerGains::gamma, "gains.gamma");
    t["gains.delta_H"] = gain(&ControllerGains::delta_H, "gains.delta_H");
    t["gains.delta_h"] = gain(&ControllerGains::delta_h, "gains.delta_h");
    t["gains.sigma1"] = gain(&ControllerGains::sigma1, "gains.sigma1");
    t["gains.sigma2"] = gain(&ControllerGains::sigma2, "gains.sigma2");
    t["gains.C_s"] = gain(&ControllerGains::C_s, "gains.C_s");
    t["gains.eps"] = gain(&ControllerGains::eps, "gains.eps");
    t["gains.Delta_e"] = gain(&ControllerGains::Delta_e, "gains.Delta_e");
    t["gains.Delta_h"] = gain(&ControllerGains::Delta_h, "gains.Delta_h");

    auto obs = [](double ObserverParams::* field, const char* name) {
      return [field, name](ScenarioConfig& c, const std::string& v, int ln) {
        c.observer.*field = parse_positive(name, v, ln);
      };
    };
    t["observer.C1"] = obs(&ObserverParams::C1, "observer.C1");
    t["observer.C2"] = obs(&ObserverParams::C2, "observer.C2");
    t["observer.beta"] = obs(&ObserverParams::beta, "observer.beta");

    t["spacecraft.J"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      const auto n = parse_numbers("spacecraft.J", v, 9, ln);
      Mat3 J;
      J << n[0], n[1], n[2], n[3], n[4], n[5], n[6], n[7], n[8];
      try {
        c.spacecraft = SpacecraftParams::make(J, c.spacecraft.u_max);
      } catch (const std::invalid_argument& e) {
        throw UnitRangeError(std::string("spacecraft.J: ") + e.what(), ln);
      }
    };
    t["spacecraft.u_max"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      const double u = parse_positive("spacecraft.u_max", v, ln);
      c.spacecraft = SpacecraftParams::make(c.spacecraft.J, u);
    };

    t["disturbance.kind"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      if (v == "none") {
        c.disturbance.kind = DisturbanceKind::none;
      } else if (v == "periodic") {
        c.disturbance.kind = DisturbanceKind::periodic;
      } else if (v == "pulse") {
        c.disturbance.kind = DisturbanceKind::pulse;
      } else if (v == "composite") {
        c.disturbance.kind = DisturbanceKind::composite;
      } else {
        throw UnitRangeError("disturbance.kind must be none|periodic|pulse|composite", ln);
      }
    };
    t["disturbance.omega_p"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.omega_p = parse_positive("disturbance.omega_p", v, ln);
    };
    t["disturbance.amp_sin"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.amp_sin = parse_vec3("disturbance.amp_sin", v, ln);
    };
    t["disturbance.amp_cos"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.amp_cos = parse_vec3("disturbance.amp_cos", v, ln);
    };
    t["disturbance.bias"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.bias = parse_vec3("disturbance.bias", v, ln);
    };
    t["disturbance.pulse"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.pulse = parse_vec3("disturbance.pulse", v, ln);
    };
    t["disturbance.pulse_start"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.pulse_start = parse_nonnegative("disturbance.pulse_start", v, ln);
    };
    t["disturbance.pulse_duration"] = [](ScenarioConfig& c, const std::string& v, int ln) {
      c.disturbance.pulse_duration = parse_nonnegative("disturbance.pulse_duration", v, ln);
    };
    return t;
  }();
  return table;
}

inline std::string trim(std::string_view sv) {
  const auto begin = sv.find_first_not_of(" \t\r");
  const auto end = sv.find_last_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    return {};
  }
  return std::string(sv.substr(begin, end - begin + 1));
}

}  // namespace detail

/// Applies one `key = value` assignment (used for both config lines and
/// command-line overrides).
inline void apply_key_value(ScenarioConfig& cfg, const std::string& key,
                            const std::string& value, int line = 0) {
  const auto& table = detail::key_table();
  const auto it = table.find(key);
  if (it == table.end()) {
    throw UnknownKey(key, line);
  }
  it->second(cfg, value, line);
}

/// Parses a flat key-value document on top of `base`. Unknown keys are
/// rejected; the final configuration is cross-validated (step divisibility,
/// positivity) before it is returned.
inline ScenarioConfig parse_config(const std::string& text,
                                   const ScenarioConfig& base = nominal_scenario()) {
  ScenarioConfig cfg = base;
  std::istringstream iss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(iss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) {
      raw.erase(hash);
    }
    const std::string stripped = detail::trim(raw);
    if (stripped.empty()) {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'section.key = value', got '" + stripped + "'", line_no);
    }
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("empty key or value", line_no);
    }
    apply_key_value(cfg, key, value, line_no);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UnitRangeError(e.what(), line_no);
  }
  return cfg;
}

/// Applies a `key=value` override string (the --set flag).
inline void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ParseError("override must look like key=value, got '" + assignment + "'", 0);
  }
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  if (key.empty() || value.empty()) {
    throw ParseError("override must look like key=value, got '" + assignment + "'", 0);
  }
  apply_key_value(cfg, key, value, 0);
}

}  // namespace pap
