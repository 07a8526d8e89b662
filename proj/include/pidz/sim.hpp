#pragma once

// Closed-loop simulation.
//
// Two wirings of controller and plant are available:
//
//  ideal     The structure-preserving closed loop
//              x' = [0 I; -I -(D + K_P)] grad H_d(x),
//            i.e. the actuator delivers G u + beta exactly and the
//            compensator's beta estimate is assumed correct.
//
//  physical  The command v passes through the dead-zone before reaching the
//            mechanics: p' = -dH/dq - D dH/dp + dz(G v). The actuator
//            offset is carried by the dead-zone only, the plant's own
//            offset is not added a second time.

#include "pidz/actuator.hpp"
#include "pidz/control.hpp"
#include "pidz/plant.hpp"
#include "pidz/trajectory.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pidz {

/// Thrown when an integration run diverges or produces non-finite values.
class SimulationAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  double dt = 1e-3;
  double horizon = 10.0;
  GeneralizedState initial_state;
  Wiring wiring = Wiring::physical;
  ControllerKind controller = ControllerKind::pidz;
  int record_stride = 10;

  void validate(Eigen::Index n) const {
    if (!(dt > 0.0)) throw ModelError("sim.dt: must be > 0");
    if (!(horizon >= dt)) throw ModelError("sim.horizon: must be >= dt");
    if (record_stride < 1) throw ModelError("sim.record_stride: must be >= 1");
    detail::require_dim(initial_state.q, n, "sim.x0.q");
    detail::require_dim(initial_state.p, n, "sim.x0.p");
  }
};

namespace detail {

/// Gains actually in force for a controller kind (plain PI drops K_Z, beta_c).
inline PbcGains effective_gains(ControllerKind kind, const PbcGains& g) {
  return kind == ControllerKind::pidz ? g : g.without_compensation();
}

}  // namespace detail

/// One evaluation of a closed loop: derivative plus the signals worth recording.
struct ClosedLoopSample {
  StateDerivative derivative;
  VectorXd command;
  VectorXd torque;
};

inline ClosedLoopSample closed_loop_sample(const MechanicalSystem& sys, const PbcGains& gains,
                                           const DeadZone* dz, Wiring wiring,
                                           ControllerKind controller, const GeneralizedState& x) {
  ClosedLoopSample s;
  if (wiring == Wiring::physical) {
    if (dz == nullptr) throw ModelError("physical wiring requires a dead_zone");
    detail::require_dim(dz->right_break, sys.n, "dead_zone.r_b");
    s.command = command(controller, sys, gains, x);
    s.torque = apply(*dz, sys.input_gains.cwiseProduct(s.command));
    const HamiltonianGradient h = hamiltonian_gradient(sys, x);
    s.derivative.dq = h.dp;
    s.derivative.dp = -h.dq - sys.damping(x.q, x.p) * h.dp + s.torque;
    return s;
  }
  if (controller == ControllerKind::none) {
    s.command = VectorXd::Zero(sys.n);
    s.torque = sys.offset;
    s.derivative = open_loop_field(sys, x, s.command);
    return s;
  }
  const PbcGains g = detail::effective_gains(controller, gains);
  const HamiltonianGradient hd = desired_hamiltonian_gradient(sys, g, x);
  s.derivative.dq = hd.dp;
  s.derivative.dp = -hd.dq - (sys.damping(x.q, x.p) + g.K_P) * hd.dp;
  s.command = command(controller, sys, g, x);
  s.torque = sys.input_gains.cwiseProduct(s.command) + g.beta_comp;
  return s;
}

inline StateDerivative closed_loop_field(const MechanicalSystem& sys, const PbcGains& gains,
                                         const DeadZone* dz, Wiring wiring,
                                         const GeneralizedState& x,
                                         ControllerKind controller = ControllerKind::pidz) {
  return closed_loop_sample(sys, gains, dz, wiring, controller, x).derivative;
}

inline StateDerivative closed_loop_field(const MechanicalSystem& sys, const PbcGains& gains,
                                         const std::optional<DeadZone>& dz, Wiring wiring,
                                         const GeneralizedState& x,
                                         ControllerKind controller = ControllerKind::pidz) {
  return closed_loop_field(sys, gains, dz ? &*dz : nullptr, wiring, x, controller);
}

/// Classical fixed-step RK4. Records every record_stride-th step, including t = 0.
inline Trajectory integrate(const MechanicalSystem& sys, const PbcGains& gains,
                            const std::optional<DeadZone>& dz, const SimConfig& cfg) {
  check_structure(sys);
  cfg.validate(sys.n);
  if (cfg.controller != ControllerKind::none) validate(gains, sys.n, cfg.controller);
  if (cfg.wiring == Wiring::physical && !dz) throw ModelError("physical wiring requires a dead_zone");
  const DeadZone* dzp = dz ? &*dz : nullptr;
  const PbcGains energy_gains = detail::effective_gains(cfg.controller, gains);

  Trajectory traj;
  traj.wiring = cfg.wiring;
  traj.controller = cfg.controller;
  traj.gains = gains;
  traj.dt = cfg.dt;
  traj.horizon = cfg.horizon;

  const auto steps = static_cast<long>(std::llround(cfg.horizon / cfg.dt));
  const std::size_t expected = static_cast<std::size_t>(steps / cfg.record_stride) + 1;
  traj.times.reserve(expected);
  traj.states.reserve(expected);

  auto field = [&](const VectorXd& x) {
    return closed_loop_sample(sys, gains, dzp, cfg.wiring, cfg.controller,
                              GeneralizedState::from_stacked(x))
        .derivative.stacked();
  };
  auto record = [&](long k, const VectorXd& x) {
    const GeneralizedState s = GeneralizedState::from_stacked(x);
    const ClosedLoopSample cl =
        closed_loop_sample(sys, gains, dzp, cfg.wiring, cfg.controller, s);
    traj.times.push_back(static_cast<double>(k) * cfg.dt);
    traj.velocities.push_back(cl.derivative.dq);
    traj.commands.push_back(cl.command);
    traj.torques.push_back(cl.torque);
    traj.energies.push_back(desired_hamiltonian(sys, energy_gains, s));
    traj.states.push_back(s);
  };

  VectorXd x = cfg.initial_state.stacked();
  record(0, x);
  const double h = cfg.dt;
  for (long k = 1; k <= steps; ++k) {
    const VectorXd k1 = field(x);
    const VectorXd k2 = field(x + 0.5 * h * k1);
    const VectorXd k3 = field(x + 0.5 * h * k2);
    const VectorXd k4 = field(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.norm() > 1e9) {
      std::ostringstream os;
      os << "integration aborted at t = " << static_cast<double>(k) * h
         << (x.allFinite() ? ": state norm exceeded 1e9" : ": non-finite state");
      throw SimulationAborted(os.str());
    }
    if (k % cfg.record_stride == 0) record(k, x);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Steady state.

struct SteadyStateError {
  std::vector<double> value;          // percent of |q*_i|, or radians where q*_i = 0
  std::vector<bool> absolute;         // true where q*_i = 0
  bool settled = false;               // |qdot|_inf < 1e-4 over the trailing 10%
  VectorXd final_q;
};

inline constexpr double kSettleVelocity = 1e-4;
inline constexpr double kSettleWindow = 0.1;

/// True when |qdot|_inf stays below kSettleVelocity over the trailing 10% of samples.
inline bool is_settled(const Trajectory& traj) {
  if (traj.empty()) return false;
  const double t_end = traj.times.back();
  const double t_from = t_end - kSettleWindow * (t_end - traj.times.front());
  for (std::size_t k = traj.size(); k-- > 0;) {
    if (traj.times[k] < t_from) break;
    if (traj.velocities[k].cwiseAbs().maxCoeff() >= kSettleVelocity) return false;
  }
  return true;
}

inline SteadyStateError steady_state_error(const Trajectory& traj, const VectorXd& q_star) {
  if (traj.empty()) throw ModelError("steady_state_error: empty trajectory");
  const Eigen::Index n = traj.dim();
  detail::require_dim(q_star, n, "q_star");
  SteadyStateError out;
  out.final_q = traj.states.back().q;
  out.settled = is_settled(traj);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err = std::abs(out.final_q(i) - q_star(i));
    if (q_star(i) != 0.0) {
      out.value.push_back(100.0 * err / std::abs(q_star(i)));
      out.absolute.push_back(false);
    } else {
      out.value.push_back(err);
      out.absolute.push_back(true);
    }
  }
  return out;
}

inline SteadyStateError steady_state_error(const VectorXd& final_q, const VectorXd& q_star) {
  Trajectory t;
  t.times = {0.0};
  t.states = {GeneralizedState(final_q, VectorXd::Zero(final_q.size()))};
  t.velocities = {VectorXd::Zero(final_q.size())};
  return steady_state_error(t, q_star);
}

// ---------------------------------------------------------------------------
// Residual band: equilibria of the physical loop with p = 0.

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

namespace detail {

/// Delivered torque on channel i at p = 0 as a function of e = q_i - q*_i.
/// Non-increasing in e.
struct ChannelTorque {
  double k_i, k_z, mu, beta_c, gain, r_b, l_b, beta;
  double operator()(double e) const {
    const double v = -(k_i * e + k_z * std::tanh(mu * e) + beta_c) / gain;
    return dead_band(gain * v + beta, r_b, l_b);
  }
};

/// Boundary between {f > 0} (left) and {f <= 0} (right) for non-increasing f.
template <class Pred>
double bisect_boundary(Pred left_side, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (left_side(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Interval of position errors at which the physical loop can rest (p = 0):
/// per channel, the set where the delivered torque vanishes. Requires diagonal
/// K_P, K_I and a potential with zero gradient there (U = 0 plants).
inline std::vector<Interval> residual_band_oracle(const MechanicalSystem& sys,
                                                  const PbcGains& gains, const DeadZone& dz,
                                                  ControllerKind controller) {
  if (controller == ControllerKind::none)
    throw ModelError("residual_band_oracle: requires the pi or pidz controller");
  detail::require_gains(sys, gains);
  detail::require_dim(dz.right_break, sys.n, "dead_zone.r_b");
  if (!detail::is_diagonal(gains.K_I) || !detail::is_diagonal(gains.K_P))
    throw ModelError("residual_band_oracle: non-diagonal gains couple the channels");
  if (sys.potential_grad(gains.q_star).cwiseAbs().maxCoeff() != 0.0)
    throw ModelError("residual_band_oracle: potential gradient must vanish");
  const PbcGains g = detail::effective_gains(controller, gains);

  std::vector<Interval> out;
  for (Eigen::Index i = 0; i < sys.n; ++i) {
    const detail::ChannelTorque f{g.K_I(i, i), g.K_Z(i),      g.mu(i),         g.beta_comp(i),
                                  sys.input_gains(i), dz.right_break(i), dz.left_break(i),
                                  dz.offset(i)};
    // Dense scan for a bracket: f > 0 far left, f < 0 far right.
    double span = 1.0;
    while (!(f(-span) > 0.0 && f(span) < 0.0)) {
      span *= 2.0;
      if (span > 1e12) throw ModelError("residual_band_oracle: no bracket found");
    }
    const int samples = 20001;
    double last_pos = -span, first_neg = span;
    for (int k = 0; k < samples; ++k) {
      const double e = -span + 2.0 * span * k / (samples - 1);
      const double v = f(e);
      if (v > 0.0) last_pos = e;
      if (v < 0.0 && first_neg == span) first_neg = e;
    }
    const double step = 2.0 * span / (samples - 1);
    const double lo = detail::bisect_boundary([&](double e) { return f(e) > 0.0; }, last_pos,
                                              std::min(last_pos + step, span));
    const double hi = detail::bisect_boundary([&](double e) { return !(f(e) < 0.0); },
                                              std::max(first_neg - step, -span), first_neg);
    out.push_back({lo, std::max(lo, hi)});
  }
  return out;
}

}  // namespace pidz
