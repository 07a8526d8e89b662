#pragma once

// PI passivity-based control with smooth dead-zone compensation.
//
//   u_pi   = -G^{-1} (K_P qdot + K_I e - grad U(q)),           e = q - q*
//   u_dz   = -G^{-1} (K_Z tanh(mu e) + beta_c)
//   u_pidz = u_pi + u_dz
//
// The matching closed-loop storage function is
//
//   H_d = 1/2 p^T M^{-1} p + 1/2 e^T K_I e + sum_i k_zi ln cosh(mu_i e_i) / mu_i.

#include "pidz/actuator.hpp"
#include "pidz/plant.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pidz {

enum class ControllerKind { none, pi, pidz };

inline std::string to_string(ControllerKind c) {
  switch (c) {
    case ControllerKind::none: return "none";
    case ControllerKind::pi: return "pi";
    case ControllerKind::pidz: return "pidz";
  }
  return "?";
}

inline ControllerKind parse_controller(const std::string& s) {
  if (s == "none") return ControllerKind::none;
  if (s == "pi") return ControllerKind::pi;
  if (s == "pidz") return ControllerKind::pidz;
  throw ModelError("unknown controller '" + s + "' (expected pi, pidz or none)");
}

struct PbcGains {
  MatrixXd K_P;
  MatrixXd K_I;
  VectorXd K_Z;        // diagonal
  VectorXd mu;         // diagonal
  VectorXd beta_comp;  // compensator's estimate of the actuator offset
  VectorXd q_star;

  Eigen::Index dim() const { return q_star.size(); }

  /// The same gains with the compensation term removed (plain PI-PBC).
  PbcGains without_compensation() const {
    PbcGains g = *this;
    g.K_Z.setZero();
    g.beta_comp.setZero();
    return g;
  }
};

/// Checks dimensions and definiteness. Plain PI-PBC only needs K_P PSD; the
/// compensated law needs K_P PD and positive K_Z, mu.
inline void validate(const PbcGains& g, Eigen::Index n, ControllerKind kind = ControllerKind::pidz) {
  detail::require_dim(g.q_star, n, "gains.q_star");
  detail::require_dim(g.K_P, n, "gains.K_P");
  detail::require_dim(g.K_I, n, "gains.K_I");
  detail::require_dim(g.K_Z, n, "gains.K_Z");
  detail::require_dim(g.mu, n, "gains.mu");
  detail::require_dim(g.beta_comp, n, "gains.beta_comp");
  if (!detail::is_positive_definite(g.K_I))
    throw ModelError("gains.K_I: must be symmetric positive definite");
  if (!detail::is_symmetric(g.K_P)) throw ModelError("gains.K_P: must be symmetric");
  const double kp_min = detail::min_eigenvalue(g.K_P);
  if (kind == ControllerKind::pidz) {
    if (!(kp_min > 0.0)) throw ModelError("gains.K_P: must be positive definite");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(g.K_Z(i) > 0.0)) throw ModelError("gains.K_Z: entries must be > 0");
      if (!(g.mu(i) > 0.0)) throw ModelError("gains.mu: entries must be > 0");
    }
  } else if (kp_min < -1e-12 * std::max(1.0, g.K_P.norm())) {
    throw ModelError("gains.K_P: must be positive semi-definite");
  }
}

namespace detail {

inline void require_gains(const MechanicalSystem& sys, const PbcGains& g) {
  require_dim(g.q_star, sys.n, "gains.q_star");
  require_dim(g.K_P, sys.n, "gains.K_P");
  require_dim(g.K_I, sys.n, "gains.K_I");
  require_dim(g.K_Z, sys.n, "gains.K_Z");
  require_dim(g.mu, sys.n, "gains.mu");
  require_dim(g.beta_comp, sys.n, "gains.beta_comp");
}

/// ln(cosh(z)) without overflow.
inline double log_cosh(double z) {
  const double a = std::abs(z);
  if (a > 20.0) return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
  return std::log(std::cosh(z));
}

}  // namespace detail

inline VectorXd u_pi(const MechanicalSystem& sys, const PbcGains& g, const GeneralizedState& x) {
  detail::require_state(sys, x);
  detail::require_gains(sys, g);
  const VectorXd qdot = detail::factor_mass(sys, x.q).solve(x.p);
  const VectorXd force = g.K_P * qdot + g.K_I * (x.q - g.q_star) - sys.potential_grad(x.q);
  return -force.cwiseQuotient(sys.input_gains);
}

inline VectorXd u_dz(const MechanicalSystem& sys, const PbcGains& g, const VectorXd& q) {
  detail::require_gains(sys, g);
  detail::require_dim(q, sys.n, "state.q");
  const VectorXd force = smooth_inverse_term(g.K_Z, g.mu, q - g.q_star) + g.beta_comp;
  return -force.cwiseQuotient(sys.input_gains);
}

inline VectorXd u_pidz(const MechanicalSystem& sys, const PbcGains& g, const GeneralizedState& x) {
  return u_pi(sys, g, x) + u_dz(sys, g, x.q);
}

inline VectorXd command(ControllerKind kind, const MechanicalSystem& sys, const PbcGains& g,
                        const GeneralizedState& x) {
  switch (kind) {
    case ControllerKind::pi: return u_pi(sys, g, x);
    case ControllerKind::pidz: return u_pidz(sys, g, x);
    case ControllerKind::none: break;
  }
  return VectorXd::Zero(sys.n);
}

inline double desired_hamiltonian(const MechanicalSystem& sys, const PbcGains& g,
                                  const GeneralizedState& x) {
  detail::require_state(sys, x);
  detail::require_gains(sys, g);
  const VectorXd e = x.q - g.q_star;
  double h = 0.5 * x.p.dot(detail::factor_mass(sys, x.q).solve(x.p)) + 0.5 * e.dot(g.K_I * e);
  for (Eigen::Index i = 0; i < sys.n; ++i)
    h += g.K_Z(i) * detail::log_cosh(g.mu(i) * e(i)) / g.mu(i);
  return h;
}

/// (dH_d/dq, dH_d/dp). The potential U does not appear: the controller
/// cancels it.
inline HamiltonianGradient desired_hamiltonian_gradient(const MechanicalSystem& sys,
                                                        const PbcGains& g,
                                                        const GeneralizedState& x) {
  detail::require_state(sys, x);
  detail::require_gains(sys, g);
  VectorXd dp = detail::factor_mass(sys, x.q).solve(x.p);
  const VectorXd e = x.q - g.q_star;
  VectorXd dq = detail::kinetic_q_gradient(sys, x.q, x.p, dp) + g.K_I * e +
                smooth_inverse_term(g.K_Z, g.mu, e);
  return {std::move(dq), std::move(dp)};
}

}  // namespace pidz
