#pragma once

// Scenario files: one `key = value` per line, `#` starts a comment. Keys are
// listed in README.md. Unknown keys and malformed values are errors that name
// the line and key. Power and SINR keys take linear units; the `_dbm` / `_db`
// spellings are accepted on input as well.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "jstpc/csma.hpp"
#include "jstpc/mac_sim.hpp"

namespace jstpc {

struct ScenarioFile {
  SimScenario sim;
  CsmaConfig csma;
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, int line, const std::string& key, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + (key.empty() ? "" : "'" + key + "': ") + what),
        line_(line), key_(key) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v) {
  if (v == "inf" || v == "+inf") return kInf;
  std::size_t used = 0;
  const double x = std::stod(v, &used);
  if (used != v.size() || std::isnan(x)) throw std::invalid_argument("not a number");
  return x;
}

inline long long parse_int(const std::string& v) {
  std::size_t used = 0;
  const long long x = std::stoll(v, &used);
  if (used != v.size()) throw std::invalid_argument("not an integer");
  return x;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false");
}

inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Setter = std::function<void(ScenarioFile&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&t](const std::string& k, auto member) {
      t[k] = [member](ScenarioFile& f, const std::string& v) { member(f) = parse_double(v); };
    };
    auto integer = [&t](const std::string& k, auto member) {
      t[k] = [member](ScenarioFile& f, const std::string& v) {
        const long long x = parse_int(v);
        if (x < -2147483647LL || x > 2147483647LL) throw std::out_of_range("integer out of range");
        member(f) = static_cast<int>(x);
      };
    };
    auto flag = [&t](const std::string& k, auto member) {
      t[k] = [member](ScenarioFile& f, const std::string& v) { member(f) = parse_bool(v); };
    };
    auto decibel = [&t](const std::string& k, auto member) {
      t[k] = [member](ScenarioFile& f, const std::string& v) { member(f) = db_to_linear(parse_double(v)); };
    };

    integer("nodes", [](ScenarioFile& f) -> int& { return f.sim.nodes; });
    real("rg_m", [](ScenarioFile& f) -> double& { return f.sim.rg_m; });
    integer("rings", [](ScenarioFile& f) -> int& { return f.sim.rings; });
    real("ra_factor", [](ScenarioFile& f) -> double& { return f.sim.ra_factor; });
    t["traffic"] = [](ScenarioFile& f, const std::string& v) {
      if (v == "saturated") f.sim.saturated = true;
      else if (v == "poisson") f.sim.saturated = false;
      else throw std::invalid_argument("expected saturated or poisson");
    };
    real("load_bps", [](ScenarioFile& f) -> double& { return f.sim.load_bps; });
    flag("mobile", [](ScenarioFile& f) -> bool& { return f.sim.mobile; });
    real("speed_max_mps", [](ScenarioFile& f) -> double& { return f.sim.speed_max_mps; });
    real("report_period_s", [](ScenarioFile& f) -> double& { return f.sim.report_period_s; });
    real("duration_s", [](ScenarioFile& f) -> double& { return f.sim.duration_s; });
    t["seed"] = [](ScenarioFile& f, const std::string& v) {
      const long long x = parse_int(v);
      if (x < 0) throw std::invalid_argument("seed must be non-negative");
      f.sim.seed = static_cast<std::uint64_t>(x);
    };
    real("theta", [](ScenarioFile& f) -> double& { return f.sim.theta; });
    real("lambda", [](ScenarioFile& f) -> double& { return f.sim.lambda; });
    t["planner"] = [](ScenarioFile& f, const std::string& v) { f.sim.planner = planner_mode_from_string(v); };
    t["scheduler"] = [](ScenarioFile& f, const std::string& v) {
      if (v == "greedy") f.sim.scheduler = ScheduleMode::Greedy;
      else if (v == "random") f.sim.scheduler = ScheduleMode::Random;
      else throw std::invalid_argument("expected greedy or random");
    };
    real("floor_scale", [](ScenarioFile& f) -> double& { return f.sim.floor_scale; });
    flag("audit", [](ScenarioFile& f) -> bool& { return f.sim.audit; });
    t["node"] = [](ScenarioFile& f, const std::string& v) {
      std::istringstream in(v);
      double x = 0, y = 0;
      std::string dst;
      if (!(in >> x >> y)) throw std::invalid_argument("expected: x y [dest]");
      in >> dst;
      std::string extra;
      if (in >> extra) throw std::invalid_argument("expected: x y [dest]");
      f.sim.positions.push_back({x, y});
      f.sim.destinations.push_back(dst.empty() ? -1 : static_cast<int>(parse_int(dst)));
    };

    real("radio.c", [](ScenarioFile& f) -> double& { return f.sim.radio.c; });
    real("radio.alpha", [](ScenarioFile& f) -> double& { return f.sim.radio.alpha; });
    real("radio.n0_mw", [](ScenarioFile& f) -> double& { return f.sim.radio.n0_mw; });
    decibel("radio.n0_dbm", [](ScenarioFile& f) -> double& { return f.sim.radio.n0_mw; });
    real("radio.gamma_min_mw", [](ScenarioFile& f) -> double& { return f.sim.radio.gamma_min_mw; });
    real("radio.gamma_max_mw", [](ScenarioFile& f) -> double& { return f.sim.radio.gamma_max_mw; });
    real("radio.i_min_mw", [](ScenarioFile& f) -> double& { return f.sim.radio.i_min_mw; });
    decibel("radio.i_min_dbm", [](ScenarioFile& f) -> double& { return f.sim.radio.i_min_mw; });
    real("radio.i_max_mw", [](ScenarioFile& f) -> double& { return f.sim.radio.i_max_mw; });
    decibel("radio.i_max_dbm", [](ScenarioFile& f) -> double& { return f.sim.radio.i_max_mw; });
    real("radio.eta_min", [](ScenarioFile& f) -> double& { return f.sim.radio.eta_min; });
    decibel("radio.eta_min_db", [](ScenarioFile& f) -> double& { return f.sim.radio.eta_min; });
    real("radio.eta_max", [](ScenarioFile& f) -> double& { return f.sim.radio.eta_max; });
    decibel("radio.eta_max_db", [](ScenarioFile& f) -> double& { return f.sim.radio.eta_max; });
    real("radio.circuit_power_w", [](ScenarioFile& f) -> double& { return f.sim.radio.circuit_power_w; });
    real("radio.amp_inverse_efficiency", [](ScenarioFile& f) -> double& { return f.sim.radio.amp_inverse_efficiency; });
    real("radio.sleep_power_w", [](ScenarioFile& f) -> double& { return f.sim.radio.sleep_power_w; });
    real("radio.bandwidth_hz", [](ScenarioFile& f) -> double& { return f.sim.radio.bandwidth_hz; });
    real("radio.d_max_m", [](ScenarioFile& f) -> double& { return f.sim.radio.d_max_m; });

    real("frame.slot_s", [](ScenarioFile& f) -> double& { return f.sim.frame.slot_s; });
    integer("frame.contention_slots", [](ScenarioFile& f) -> int& { return f.sim.frame.contention_slots; });
    integer("frame.scheduling_slots", [](ScenarioFile& f) -> int& { return f.sim.frame.scheduling_slots; });
    integer("frame.data_slots", [](ScenarioFile& f) -> int& { return f.sim.frame.data_slots; });
    real("frame.signaling_rate_bps", [](ScenarioFile& f) -> double& { return f.sim.frame.signaling_rate_bps; });
    integer("frame.request_bits", [](ScenarioFile& f) -> int& { return f.sim.frame.request_bits; });
    integer("frame.entry_bits", [](ScenarioFile& f) -> int& { return f.sim.frame.entry_bits; });
    real("frame.data_packet_bits", [](ScenarioFile& f) -> double& { return f.sim.frame.data_packet_bits; });
    integer("frame.cw_min", [](ScenarioFile& f) -> int& { return f.sim.frame.cw_min; });
    integer("frame.cw_max", [](ScenarioFile& f) -> int& { return f.sim.frame.cw_max; });
    real("frame.minislot_s", [](ScenarioFile& f) -> double& { return f.sim.frame.minislot_s; });
    real("frame.sifs_s", [](ScenarioFile& f) -> double& { return f.sim.frame.sifs_s; });
    real("frame.preamble_s", [](ScenarioFile& f) -> double& { return f.sim.frame.preamble_s; });
    real("frame.request_cs_threshold_mw", [](ScenarioFile& f) -> double& { return f.sim.frame.request_cs_threshold_mw; });
    decibel("frame.request_cs_threshold_dbm",
            [](ScenarioFile& f) -> double& { return f.sim.frame.request_cs_threshold_mw; });

    real("csma.cs_threshold_mw", [](ScenarioFile& f) -> double& { return f.csma.cs_threshold_mw; });
    decibel("csma.cs_threshold_dbm", [](ScenarioFile& f) -> double& { return f.csma.cs_threshold_mw; });
    integer("csma.cw_min", [](ScenarioFile& f) -> int& { return f.csma.cw_min; });
    integer("csma.cw_max", [](ScenarioFile& f) -> int& { return f.csma.cw_max; });
    integer("csma.retry_limit", [](ScenarioFile& f) -> int& { return f.csma.retry_limit; });
    real("csma.minislot_s", [](ScenarioFile& f) -> double& { return f.csma.minislot_s; });
    real("csma.sifs_s", [](ScenarioFile& f) -> double& { return f.csma.sifs_s; });
    real("csma.preamble_s", [](ScenarioFile& f) -> double& { return f.csma.preamble_s; });
    real("csma.packet_s", [](ScenarioFile& f) -> double& { return f.csma.packet_s; });
    real("csma.signaling_rate_bps", [](ScenarioFile& f) -> double& { return f.csma.signaling_rate_bps; });
    flag("csma.psm", [](ScenarioFile& f) -> bool& { return f.csma.psm; });
    real("csma.beacon_s", [](ScenarioFile& f) -> double& { return f.csma.beacon_s; });
    real("csma.atim_window_s", [](ScenarioFile& f) -> double& { return f.csma.atim_window_s; });
    integer("csma.atim_bits", [](ScenarioFile& f) -> int& { return f.csma.atim_bits; });
    integer("csma.atim_ack_bits", [](ScenarioFile& f) -> int& { return f.csma.atim_ack_bits; });
    integer("csma.rate_history", [](ScenarioFile& f) -> int& { return f.csma.rate_history; });
    return t;
  }();
  return table;
}

}  // namespace detail

/// Applies one assignment; `line` and `source` only feed diagnostics.
inline void apply_setting(ScenarioFile& f, const std::string& key, const std::string& value,
                          const std::string& source = "<override>", int line = 0) {
  const auto& t = detail::setters();
  const auto it = t.find(key);
  if (it == t.end()) throw ScenarioError(source, line, key, "unknown key");
  if (value.empty()) throw ScenarioError(source, line, key, "missing value");
  try {
    it->second(f, value);
  } catch (const std::exception& e) {
    throw ScenarioError(source, line, key, std::string("bad value '") + value + "': " + e.what());
  }
}

/// Parses scenario text and validates the result.
inline ScenarioFile parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  ScenarioFile f;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ScenarioError(source, line, "", "expected key = value");
    apply_setting(f, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)), source, line);
  }
  try {
    f.sim.validate();
    f.csma.validate();
  } catch (const std::exception& e) {
    throw ScenarioError(source, line, "", e.what());
  }
  return f;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, 0, "", "cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

/// Full dump in the input format; parse_scenario(to_text(f)) reproduces f.
inline std::string to_text(const ScenarioFile& f) {
  using detail::fmt;
  const auto& s = f.sim;
  const auto& r = s.radio;
  const auto& fr = s.frame;
  const auto& c = f.csma;
  std::ostringstream o;
  auto kv = [&o](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  kv("nodes", std::to_string(s.nodes));
  kv("rg_m", fmt(s.rg_m));
  kv("rings", std::to_string(s.rings));
  kv("ra_factor", fmt(s.ra_factor));
  kv("traffic", s.saturated ? "saturated" : "poisson");
  kv("load_bps", fmt(s.load_bps));
  kv("mobile", b(s.mobile));
  kv("speed_max_mps", fmt(s.speed_max_mps));
  kv("report_period_s", fmt(s.report_period_s));
  kv("duration_s", fmt(s.duration_s));
  kv("seed", std::to_string(s.seed));
  kv("theta", fmt(s.theta));
  kv("lambda", fmt(s.lambda));
  kv("planner", to_string(s.planner));
  kv("scheduler", to_string(s.scheduler));
  kv("floor_scale", fmt(s.floor_scale));
  kv("audit", b(s.audit));
  for (std::size_t i = 0; i < s.positions.size(); ++i)
    kv("node", fmt(s.positions[i].x) + " " + fmt(s.positions[i].y) +
                   (i < s.destinations.size() && s.destinations[i] >= 0 ? " " + std::to_string(s.destinations[i]) : ""));
  kv("radio.c", fmt(r.c));
  kv("radio.alpha", fmt(r.alpha));
  kv("radio.n0_mw", fmt(r.n0_mw));
  kv("radio.gamma_min_mw", fmt(r.gamma_min_mw));
  kv("radio.gamma_max_mw", fmt(r.gamma_max_mw));
  kv("radio.i_min_mw", fmt(r.i_min_mw));
  kv("radio.i_max_mw", fmt(r.i_max_mw));
  kv("radio.eta_min", fmt(r.eta_min));
  kv("radio.eta_max", fmt(r.eta_max));
  kv("radio.circuit_power_w", fmt(r.circuit_power_w));
  kv("radio.amp_inverse_efficiency", fmt(r.amp_inverse_efficiency));
  kv("radio.sleep_power_w", fmt(r.sleep_power_w));
  kv("radio.bandwidth_hz", fmt(r.bandwidth_hz));
  kv("radio.d_max_m", fmt(r.d_max_m));
  kv("frame.slot_s", fmt(fr.slot_s));
  kv("frame.contention_slots", std::to_string(fr.contention_slots));
  kv("frame.scheduling_slots", std::to_string(fr.scheduling_slots));
  kv("frame.data_slots", std::to_string(fr.data_slots));
  kv("frame.signaling_rate_bps", fmt(fr.signaling_rate_bps));
  kv("frame.request_bits", std::to_string(fr.request_bits));
  kv("frame.entry_bits", std::to_string(fr.entry_bits));
  kv("frame.data_packet_bits", fmt(fr.data_packet_bits));
  kv("frame.cw_min", std::to_string(fr.cw_min));
  kv("frame.cw_max", std::to_string(fr.cw_max));
  kv("frame.minislot_s", fmt(fr.minislot_s));
  kv("frame.sifs_s", fmt(fr.sifs_s));
  kv("frame.preamble_s", fmt(fr.preamble_s));
  kv("frame.request_cs_threshold_mw", fmt(fr.request_cs_threshold_mw));
  kv("csma.cs_threshold_mw", fmt(c.cs_threshold_mw));
  kv("csma.cw_min", std::to_string(c.cw_min));
  kv("csma.cw_max", std::to_string(c.cw_max));
  kv("csma.retry_limit", std::to_string(c.retry_limit));
  kv("csma.minislot_s", fmt(c.minislot_s));
  kv("csma.sifs_s", fmt(c.sifs_s));
  kv("csma.preamble_s", fmt(c.preamble_s));
  kv("csma.packet_s", fmt(c.packet_s));
  kv("csma.signaling_rate_bps", fmt(c.signaling_rate_bps));
  kv("csma.psm", b(c.psm));
  kv("csma.beacon_s", fmt(c.beacon_s));
  kv("csma.atim_window_s", fmt(c.atim_window_s));
  kv("csma.atim_bits", std::to_string(c.atim_bits));
  kv("csma.atim_ack_bits", std::to_string(c.atim_ack_bits));
  kv("csma.rate_history", std::to_string(c.rate_history));
  return o.str();
}

}  // namespace jstpc
