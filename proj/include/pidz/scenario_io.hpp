#pragma once

// JSON scenario documents.
//
// {
//   "label": "table4_case_I",
//   "system":    {"builtin": "planar2dof", "offset": [0, 0]}
//             or {"mass": [[..]], "damping": [[..]], "input_gains": [..],
//                 "offset": [..], "potential_stiffness": [[..]]},
//   "dead_zone": {"r_b": [..], "l_b": [..], "beta": [..]},
//   "gains":     {"K_P": [..] | [[..]], "K_I": [..] | [[..]], "K_Z": [..],
//                 "mu": 10 | [..], "beta_comp": [..], "q_star": [..]},
//   "sim":       {"dt": 1e-3, "horizon": 10, "x0": {"q": [..], "p": [..]},
//                 "wiring": "physical", "controller": "pidz", "record_stride": 10}
// }
//
// Matrices are row-major nested arrays; a flat array is read as a diagonal.
// Unknown keys are rejected.

#include "pidz/scenarios.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace pidz {

/// Malformed scenario document. The message names the offending key or line.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& section,
                           std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key))
      throw ScenarioError((section.empty() ? key : section + "." + key) + ": unknown key");
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path + ": expected an object");
  return j;
}

inline double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path + ": expected a number");
  return j.get<double>();
}

inline VectorXd read_vector(const json& j, const std::string& path, Eigen::Index n = -1) {
  if (!j.is_array()) throw ScenarioError(path + ": expected an array of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = read_number(j[i], path + "[" + std::to_string(i) + "]");
  if (n >= 0 && v.size() != n)
    throw ScenarioError(path + ": expected " + std::to_string(n) + " entries, got " +
                        std::to_string(v.size()));
  return v;
}

/// Nested array (row-major) or flat array (diagonal).
inline MatrixXd read_matrix(const json& j, const std::string& path, Eigen::Index n) {
  if (!j.is_array()) throw ScenarioError(path + ": expected an array");
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != n)
      throw ScenarioError(path + ": expected " + std::to_string(n) + " rows, got " +
                          std::to_string(j.size()));
    MatrixXd m(n, n);
    for (std::size_t r = 0; r < j.size(); ++r)
      m.row(static_cast<Eigen::Index>(r)) =
          read_vector(j[r], path + "[" + std::to_string(r) + "]", n).transpose();
    return m;
  }
  return read_vector(j, path, n).asDiagonal();
}

inline json write_vector(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json write_matrix(const MatrixXd& m) {
  if (detail::is_diagonal(m)) return write_vector(m.diagonal());
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(write_vector(m.row(r).transpose()));
  return a;
}

inline SystemDescription read_system(const json& j) {
  require_object(j, "system");
  SystemDescription d;
  if (j.contains("builtin")) {
    reject_unknown(j, "system", {"builtin", "offset"});
    if (!j["builtin"].is_string()) throw ScenarioError("system.builtin: expected a string");
    d.builtin = j["builtin"].get<std::string>();
    if (d.builtin != "planar2dof")
      throw ScenarioError("system.builtin: unknown system '" + d.builtin + "'");
    d.offset = j.contains("offset") ? read_vector(j["offset"], "system.offset", 2)
                                    : VectorXd::Zero(2);
    return d;
  }
  reject_unknown(j, "system", {"mass", "damping", "input_gains", "offset", "potential_stiffness"});
  for (const char* key : {"mass", "damping", "input_gains"})
    if (!j.contains(key)) throw ScenarioError(std::string("system.") + key + ": missing");
  const json& jm = j["mass"];
  if (!jm.is_array() || jm.empty()) throw ScenarioError("system.mass: expected a matrix");
  const auto n = static_cast<Eigen::Index>(jm.size());
  d.mass = read_matrix(jm, "system.mass", n);
  d.damping = read_matrix(j["damping"], "system.damping", n);
  d.input_gains = read_vector(j["input_gains"], "system.input_gains", n);
  d.offset = j.contains("offset") ? read_vector(j["offset"], "system.offset", n) : VectorXd::Zero(n);
  d.potential_stiffness = j.contains("potential_stiffness")
                              ? read_matrix(j["potential_stiffness"], "system.potential_stiffness", n)
                              : MatrixXd::Zero(n, n);
  if (!detail::is_positive_definite(d.mass))
    throw ScenarioError("system.mass: must be symmetric positive definite");
  if (!detail::is_symmetric(d.damping) || detail::min_eigenvalue(d.damping) < 0.0)
    throw ScenarioError("system.damping: must be symmetric positive semi-definite");
  if (!detail::is_symmetric(d.potential_stiffness))
    throw ScenarioError("system.potential_stiffness: must be symmetric");
  for (Eigen::Index i = 0; i < n; ++i)
    if (d.input_gains(i) == 0.0) throw ScenarioError("system.input_gains: entries must be nonzero");
  return d;
}

inline PbcGains read_gains(const json& j, Eigen::Index n) {
  require_object(j, "gains");
  reject_unknown(j, "gains", {"K_P", "K_I", "K_Z", "mu", "beta_comp", "q_star"});
  for (const char* key : {"K_P", "K_I", "q_star"})
    if (!j.contains(key)) throw ScenarioError(std::string("gains.") + key + ": missing");
  PbcGains g;
  g.K_P = read_matrix(j["K_P"], "gains.K_P", n);
  g.K_I = read_matrix(j["K_I"], "gains.K_I", n);
  g.q_star = read_vector(j["q_star"], "gains.q_star", n);
  if (j.contains("K_Z")) {
    const json& kz = j["K_Z"];
    if (kz.is_array() && !kz.empty() && kz.front().is_array()) {
      const MatrixXd m = read_matrix(kz, "gains.K_Z", n);
      if (!detail::is_diagonal(m)) throw ScenarioError("gains.K_Z: must be diagonal");
      g.K_Z = m.diagonal();
    } else {
      g.K_Z = read_vector(kz, "gains.K_Z", n);
    }
  } else {
    g.K_Z = VectorXd::Zero(n);
  }
  if (!j.contains("mu"))
    g.mu = VectorXd::Constant(n, 10.0);
  else if (j["mu"].is_number())
    g.mu = VectorXd::Constant(n, j["mu"].get<double>());
  else
    g.mu = read_vector(j["mu"], "gains.mu", n);
  g.beta_comp = j.contains("beta_comp") ? read_vector(j["beta_comp"], "gains.beta_comp", n)
                                        : VectorXd::Zero(n);
  if (!detail::is_symmetric(g.K_P)) throw ScenarioError("gains.K_P: must be symmetric");
  if (!detail::is_positive_definite(g.K_I))
    throw ScenarioError("gains.K_I: must be symmetric positive definite");
  return g;
}

inline DeadZone read_dead_zone(const json& j, Eigen::Index n) {
  require_object(j, "dead_zone");
  reject_unknown(j, "dead_zone", {"r_b", "l_b", "beta"});
  for (const char* key : {"r_b", "l_b"})
    if (!j.contains(key)) throw ScenarioError(std::string("dead_zone.") + key + ": missing");
  const VectorXd beta =
      j.contains("beta") ? read_vector(j["beta"], "dead_zone.beta", n) : VectorXd::Zero(n);
  try {
    return DeadZone(read_vector(j["r_b"], "dead_zone.r_b", n),
                    read_vector(j["l_b"], "dead_zone.l_b", n), beta);
  } catch (const ModelError& e) {
    throw ScenarioError(e.what());
  }
}

inline SimConfig read_sim(const json& j, Eigen::Index n) {
  require_object(j, "sim");
  reject_unknown(j, "sim", {"dt", "horizon", "x0", "wiring", "controller", "record_stride"});
  SimConfig c;
  c.initial_state = GeneralizedState::zero(n);
  if (j.contains("dt")) c.dt = read_number(j["dt"], "sim.dt");
  if (j.contains("horizon")) c.horizon = read_number(j["horizon"], "sim.horizon");
  if (j.contains("record_stride")) {
    if (!j["record_stride"].is_number_integer())
      throw ScenarioError("sim.record_stride: expected an integer");
    c.record_stride = j["record_stride"].get<int>();
  }
  if (j.contains("x0")) {
    const json& x0 = require_object(j["x0"], "sim.x0");
    reject_unknown(x0, "sim.x0", {"q", "p"});
    const VectorXd q = x0.contains("q") ? read_vector(x0["q"], "sim.x0.q", n) : VectorXd::Zero(n);
    const VectorXd p = x0.contains("p") ? read_vector(x0["p"], "sim.x0.p", n) : VectorXd::Zero(n);
    c.initial_state = GeneralizedState(q, p);
  }
  try {
    if (j.contains("wiring")) {
      if (!j["wiring"].is_string()) throw ScenarioError("sim.wiring: expected a string");
      c.wiring = parse_wiring(j["wiring"].get<std::string>());
    }
    if (j.contains("controller")) {
      if (!j["controller"].is_string()) throw ScenarioError("sim.controller: expected a string");
      c.controller = parse_controller(j["controller"].get<std::string>());
    }
    c.validate(n);
  } catch (const ModelError& e) {
    throw ScenarioError(std::string("sim: ") + e.what());
  }
  return c;
}

}  // namespace io

inline Scenario parse_scenario(const std::string& text) {
  using io::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("document: expected a JSON object");
  io::reject_unknown(doc, "", {"label", "system", "dead_zone", "gains", "sim"});
  for (const char* key : {"label", "system", "gains"})
    if (!doc.contains(key)) throw ScenarioError(std::string(key) + ": missing");

  Scenario s;
  if (!doc["label"].is_string() || doc["label"].get<std::string>().empty())
    throw ScenarioError("label: expected a non-empty string");
  s.label = doc["label"].get<std::string>();
  if (s.label.find_first_of("/\\") != std::string::npos)
    throw ScenarioError("label: must not contain path separators");
  s.system = io::read_system(doc["system"]);
  const Eigen::Index n = s.system.dim();
  s.gains = io::read_gains(doc["gains"], n);
  if (doc.contains("dead_zone")) s.dead_zone = io::read_dead_zone(doc["dead_zone"], n);
  s.sim = doc.contains("sim") ? io::read_sim(doc["sim"], n) : io::read_sim(json::object(), n);
  if (s.sim.wiring == Wiring::physical && !s.dead_zone)
    throw ScenarioError("dead_zone: required for physical wiring");
  try {
    validate(s.gains, n, s.sim.controller == ControllerKind::none ? ControllerKind::pi
                                                                  : s.sim.controller);
  } catch (const ModelError& e) {
    throw ScenarioError(e.what());
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

inline std::string dump_scenario(const Scenario& s) {
  using io::json;
  json doc;
  doc["label"] = s.label;
  json sys;
  if (!s.system.builtin.empty()) {
    sys["builtin"] = s.system.builtin;
    sys["offset"] = io::write_vector(s.system.offset.size() ? s.system.offset : VectorXd::Zero(2));
  } else {
    sys["mass"] = io::write_matrix(s.system.mass);
    sys["damping"] = io::write_matrix(s.system.damping);
    sys["input_gains"] = io::write_vector(s.system.input_gains);
    sys["offset"] = io::write_vector(s.system.offset);
    sys["potential_stiffness"] = io::write_matrix(s.system.potential_stiffness);
  }
  doc["system"] = sys;
  if (s.dead_zone) {
    doc["dead_zone"] = {{"r_b", io::write_vector(s.dead_zone->right_break)},
                        {"l_b", io::write_vector(s.dead_zone->left_break)},
                        {"beta", io::write_vector(s.dead_zone->offset)}};
  }
  doc["gains"] = {{"K_P", io::write_matrix(s.gains.K_P)},
                  {"K_I", io::write_matrix(s.gains.K_I)},
                  {"K_Z", io::write_vector(s.gains.K_Z)},
                  {"mu", io::write_vector(s.gains.mu)},
                  {"beta_comp", io::write_vector(s.gains.beta_comp)},
                  {"q_star", io::write_vector(s.gains.q_star)}};
  doc["sim"] = {{"dt", s.sim.dt},
                {"horizon", s.sim.horizon},
                {"x0",
                 {{"q", io::write_vector(s.sim.initial_state.q)},
                  {"p", io::write_vector(s.sim.initial_state.p)}}},
                {"wiring", to_string(s.sim.wiring)},
                {"controller", to_string(s.sim.controller)},
                {"record_stride", s.sim.record_stride}};
  return doc.dump(2) + "\n";
}

}  // namespace pidz
