#pragma once

#include "pidz/control.hpp"
#include "pidz/plant.hpp"

#include <string>
#include <vector>

namespace pidz {

enum class Wiring { ideal, physical };

inline std::string to_string(Wiring w) { return w == Wiring::ideal ? "ideal" : "physical"; }

inline Wiring parse_wiring(const std::string& s) {
  if (s == "ideal") return Wiring::ideal;
  if (s == "physical") return Wiring::physical;
  throw ModelError("unknown wiring '" + s + "' (expected ideal or physical)");
}

/// Recorded samples of one simulation run. All sequences share one length.
struct Trajectory {
  std::vector<double> times;
  std::vector<GeneralizedState> states;
  std::vector<VectorXd> velocities;  // qdot = M^{-1} p
  std::vector<VectorXd> commands;    // v
  std::vector<VectorXd> torques;     // force delivered to the mechanics
  std::vector<double> energies;      // H_d

  std::string label;
  Wiring wiring = Wiring::ideal;
  ControllerKind controller = ControllerKind::pidz;
  PbcGains gains;
  double dt = 0.0;
  double horizon = 0.0;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  Eigen::Index dim() const { return states.empty() ? 0 : states.front().dim(); }
};

}  // namespace pidz
