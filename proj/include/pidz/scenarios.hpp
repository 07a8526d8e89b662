#pragma once

// Ready-made 2-DoF planar manipulator and the PI / PIDZ experiment matrix.

#include "pidz/actuator.hpp"
#include "pidz/control.hpp"
#include "pidz/plant.hpp"
#include "pidz/sim.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace pidz {

struct ManipulatorConstants {
  double a1 = 0.1547;
  double a2 = 0.0111;
  double b = 0.0168;
  double d1 = 1.5964;
  double d2 = 0.6971;
  double g1 = 1.0;
  double g2 = 0.6;
};

/// M(q2) = [a1 + a2 + 2b cos q2, a2 + b cos q2; a2 + b cos q2, a2], U = 0,
/// D = diag(d1, d2), G = diag(g1, g2).
inline MechanicalSystem planar_manipulator_2dof(const VectorXd& offset = VectorXd::Zero(2),
                                                const ManipulatorConstants& c = {}) {
  MechanicalSystem sys;
  sys.n = 2;
  sys.mass = [c](const VectorXd& q) {
    const double cq = std::cos(q(1));
    MatrixXd m(2, 2);
    m << c.a1 + c.a2 + 2.0 * c.b * cq, c.a2 + c.b * cq,
         c.a2 + c.b * cq,               c.a2;
    return m;
  };
  sys.mass_grad = [c](const VectorXd& q) {
    const double sq = std::sin(q(1));
    MatrixXd d2(2, 2);
    d2 << -2.0 * c.b * sq, -c.b * sq,
          -c.b * sq,       0.0;
    return std::vector<MatrixXd>{MatrixXd::Zero(2, 2), d2};
  };
  sys.potential = [](const VectorXd&) { return 0.0; };
  sys.potential_grad = [](const VectorXd&) -> VectorXd { return VectorXd::Zero(2); };
  MatrixXd damping = MatrixXd::Zero(2, 2);
  damping.diagonal() << c.d1, c.d2;
  sys.damping = [damping](const VectorXd&, const VectorXd&) { return damping; };
  sys.input_gains = VectorXd(2);
  sys.input_gains << c.g1, c.g2;
  sys.offset = offset;
  check_structure(sys);
  return sys;
}

inline VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

inline MatrixXd diag2(double a, double b) { return vec2(a, b).asDiagonal(); }

/// PI-PBC / PIDZ gains shared by the setpoint comparison.
inline PbcGains table1_gains(const VectorXd& q_star) {
  PbcGains g;
  g.K_P = diag2(1.5, 1.0);
  g.K_I = diag2(5.0, 3.0);
  g.K_Z = vec2(0.13, 0.35);
  g.mu = vec2(10.0, 10.0);
  g.beta_comp = VectorXd::Zero(2);
  g.q_star = q_star;
  return g;
}

enum class CompensationCase { I, II, III };

inline std::string to_string(CompensationCase c) {
  switch (c) {
    case CompensationCase::I: return "I";
    case CompensationCase::II: return "II";
    case CompensationCase::III: return "III";
  }
  return "?";
}

/// Case I: nominal widths, symmetric assumption. Case II: overestimated K_Z.
/// Case III: nominal widths with the actuator offset characterised.
inline PbcGains compensation_case_gains(CompensationCase c, const VectorXd& q_star = vec2(0.6, 0.8)) {
  PbcGains g = table1_gains(q_star);
  if (c == CompensationCase::II) g.K_Z = vec2(0.7, 1.0);
  if (c == CompensationCase::III) g.beta_comp = vec2(-0.016, -0.2);
  return g;
}

/// Plant dead-zone used by the suites: half-widths equal to the nominal K_Z,
/// offset equal to the Case III estimate.
inline DeadZone manipulator_dead_zone() {
  return DeadZone::symmetric(vec2(0.13, 0.35), vec2(-0.016, -0.2));
}

struct SetpointCase {
  std::string name;
  VectorXd q_star;
};

inline std::vector<SetpointCase> table2_setpoints() {
  return {{"a", vec2(0.6, 0.8)},
          {"b", vec2(-0.6, -0.8)},
          {"c", vec2(-0.4, 0.7)},
          {"d", vec2(0.4, -0.7)},
          {"e", vec2(0.5, -0.5)}};
}

/// Serializable description of a plant: a builtin name or constant matrices.
struct SystemDescription {
  std::string builtin;  // "planar2dof" or empty for inline
  VectorXd offset;
  // inline only
  MatrixXd mass;
  MatrixXd damping;
  VectorXd input_gains;
  MatrixXd potential_stiffness;

  Eigen::Index dim() const { return builtin.empty() ? mass.rows() : 2; }
};

inline MechanicalSystem build_system(const SystemDescription& d) {
  if (d.builtin == "planar2dof") {
    const VectorXd beta = d.offset.size() ? d.offset : VectorXd::Zero(2);
    detail::require_dim(beta, 2, "system.offset");
    return planar_manipulator_2dof(beta);
  }
  if (!d.builtin.empty()) throw ModelError("system.builtin: unknown system '" + d.builtin + "'");
  const Eigen::Index n = d.mass.rows();
  const VectorXd beta = d.offset.size() ? d.offset : VectorXd::Zero(n);
  const MatrixXd k = d.potential_stiffness.size() ? d.potential_stiffness : MatrixXd::Zero(n, n);
  MechanicalSystem sys = linear_system(d.mass, d.damping, d.input_gains, beta, k);
  validate_at(sys, GeneralizedState::zero(n));
  return sys;
}

struct Scenario {
  std::string label;
  SystemDescription system;
  std::optional<DeadZone> dead_zone;
  PbcGains gains;
  SimConfig sim;

  MechanicalSystem build() const { return build_system(system); }
};

inline Scenario manipulator_scenario(std::string label, PbcGains gains, ControllerKind controller) {
  Scenario s;
  s.label = std::move(label);
  s.system.builtin = "planar2dof";
  s.system.offset = VectorXd::Zero(2);
  s.dead_zone = manipulator_dead_zone();
  s.gains = std::move(gains);
  s.sim.initial_state = GeneralizedState::zero(2);
  s.sim.wiring = Wiring::physical;
  s.sim.controller = controller;
  return s;
}

/// Five setpoints x {pi, pidz} with the shared gains, then Cases I-III at (0.6, 0.8).
inline std::vector<Scenario> table_suites() {
  std::vector<Scenario> out;
  for (const auto& c : table2_setpoints()) {
    out.push_back(manipulator_scenario("table2_" + c.name + "_pi", table1_gains(c.q_star),
                                       ControllerKind::pi));
    out.push_back(manipulator_scenario("table2_" + c.name + "_pidz", table1_gains(c.q_star),
                                       ControllerKind::pidz));
  }
  for (auto c : {CompensationCase::I, CompensationCase::II, CompensationCase::III})
    out.push_back(manipulator_scenario("table4_case_" + to_string(c), compensation_case_gains(c),
                                       ControllerKind::pidz));
  return out;
}

/// Model validation for a scenario: structure, gains, SPD mass over a sweep
/// of the configuration space, PSD damping.
inline void validate_scenario(const Scenario& s) {
  const MechanicalSystem sys = s.build();
  check_structure(sys);
  validate(s.gains, sys.n, s.sim.controller == ControllerKind::none ? ControllerKind::pi
                                                                    : s.sim.controller);
  s.sim.validate(sys.n);
  if (s.sim.wiring == Wiring::physical && !s.dead_zone)
    throw ModelError("dead_zone: required for physical wiring");
  if (s.dead_zone) detail::require_dim(s.dead_zone->right_break, sys.n, "dead_zone.r_b");
  for (int k = 0; k <= 64; ++k) {
    const double angle = -std::numbers::pi + 2.0 * std::numbers::pi * k / 64.0;
    validate_at(sys, GeneralizedState(VectorXd::Constant(sys.n, angle), VectorXd::Zero(sys.n)));
  }
}

}  // namespace pidz
