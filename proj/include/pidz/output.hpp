#pragma once

// Text outputs: trajectory CSV, metrics key-value files, atomic file writes.

#include "pidz/analysis.hpp"
#include "pidz/sim.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace pidz {

inline constexpr const char* kNormalization = "percent_of_abs_setpoint";

/// Locale-independent decimal formatting. precision < 0 gives the shortest
/// round-trip representation.
inline std::string format_number(double v, int precision = -1) {
  char buf[64];
  const auto res = precision < 0
                       ? std::to_chars(buf, buf + sizeof buf, v)
                       : std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general,
                                       precision);
  return {buf, res.ptr};
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return {buf, res.ptr};
}

inline std::string join(const VectorXd& v, int precision = -1, const char* sep = ",") {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_number(v(i), precision);
  }
  return out;
}

/// Header t,q1..qn,p1..pn,v1..vn,tau1..taun,Hd; 17 significant digits.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  const Eigen::Index n = traj.dim();
  os << "t";
  for (const char* prefix : {"q", "p", "v", "tau"})
    for (Eigen::Index i = 1; i <= n; ++i) os << ',' << prefix << i;
  os << ",Hd\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_number(traj.times[k], 17);
    for (const VectorXd* v : {&traj.states[k].q, &traj.states[k].p, &traj.commands[k],
                              &traj.torques[k]})
      os << ',' << join(*v, 17);
    os << ',' << format_number(traj.energies[k], 17) << '\n';
  }
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error(tmp.string() + ": write failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

/// Summary of one run, serialized as key=value lines.
struct RunMetrics {
  std::string label;
  std::string case_name;
  std::string controller;
  std::string wiring;
  std::string normalization = kNormalization;
  VectorXd q_star;
  VectorXd final_q;
  std::vector<double> steady_state_error;
  std::vector<std::string> error_units;  // "percent" or "rad"
  bool settled = false;
  std::vector<double> overshoot;
  std::vector<std::optional<double>> settling_time;
  std::vector<int> oscillations;
};

/// Case name shared by runs of the same scenario under different controllers.
inline std::string case_from_label(const std::string& label) {
  for (const char* suffix : {"_pidz", "_pi", "_none"}) {
    const std::string s(suffix);
    if (label.size() > s.size() && label.compare(label.size() - s.size(), s.size(), s) == 0)
      return label.substr(0, label.size() - s.size());
  }
  return label;
}

inline RunMetrics compute_metrics(const Trajectory& traj, const VectorXd& q_star) {
  RunMetrics m;
  m.label = traj.label;
  m.case_name = case_from_label(traj.label);
  m.controller = to_string(traj.controller);
  m.wiring = to_string(traj.wiring);
  m.q_star = q_star;
  const SteadyStateError e = steady_state_error(traj, q_star);
  m.final_q = e.final_q;
  m.steady_state_error = e.value;
  for (bool abs : e.absolute) m.error_units.push_back(abs ? "rad" : "percent");
  m.settled = e.settled;
  const TransientMetrics t = transient_metrics(traj, q_star);
  m.overshoot = t.overshoot;
  m.settling_time = t.settling_time;
  m.oscillations = t.oscillations;
  return m;
}

inline std::string format_metrics(const RunMetrics& m) {
  auto list = [](const auto& xs, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ",";
      s += fmt(xs[i]);
    }
    return s;
  };
  std::ostringstream os;
  os << "label=" << m.label << '\n'
     << "case=" << m.case_name << '\n'
     << "controller=" << m.controller << '\n'
     << "wiring=" << m.wiring << '\n'
     << "normalization=" << m.normalization << '\n'
     << "q_star=" << join(m.q_star) << '\n'
     << "final_q=" << join(m.final_q) << '\n'
     << "steady_state_error=" << list(m.steady_state_error, [](double v) { return format_number(v); })
     << '\n'
     << "steady_state_error_units=" << list(m.error_units, [](const std::string& s) { return s; })
     << '\n'
     << "settled=" << (m.settled ? "true" : "false") << '\n'
     << "overshoot=" << list(m.overshoot, [](double v) { return format_number(v); }) << '\n'
     << "settling_time="
     << list(m.settling_time,
             [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("none"); })
     << '\n'
     << "oscillations=" << list(m.oscillations, [](int v) { return std::to_string(v); }) << '\n';
  return os.str();
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("metrics: malformed number '" + s + "'");
  return v;
}

inline VectorXd parse_vector(const std::string& s) {
  const auto parts = split(s, ',');
  VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(parts[i]);
  return v;
}

}  // namespace detail

inline RunMetrics parse_metrics(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("metrics: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(std::string("metrics: missing key ") + key);
    return it->second;
  };
  RunMetrics m;
  m.label = get("label");
  m.case_name = kv.count("case") ? kv["case"] : case_from_label(m.label);
  m.controller = get("controller");
  m.wiring = get("wiring");
  m.normalization = get("normalization");
  m.q_star = detail::parse_vector(get("q_star"));
  m.final_q = detail::parse_vector(get("final_q"));
  const VectorXd e = detail::parse_vector(get("steady_state_error"));
  m.steady_state_error.assign(e.data(), e.data() + e.size());
  m.error_units = detail::split(get("steady_state_error_units"), ',');
  m.settled = get("settled") == "true";
  if (kv.count("overshoot")) {
    const VectorXd o = detail::parse_vector(kv["overshoot"]);
    m.overshoot.assign(o.data(), o.data() + o.size());
  }
  return m;
}

}  // namespace pidz
