#pragma once

// Per-channel actuator dead-zone.
//
// A channel with break points l_b < 0 < r_b and asymmetry offset beta maps a
// command s to the delivered torque
//
//   tau = dz(s + beta),   dz(w) = w - r_b  (w > r_b)
//                                 0        (l_b <= w <= r_b)
//                                 w - l_b  (w < l_b)
//
// so beta displaces the zero band to [l_b - beta, r_b - beta] while the
// sloped branches are lifted by beta. With beta = 0 this is the plain
// symmetric/asymmetric break-point model. The same beta is the constant
// force a plant sees when its actuator is modelled as the ideal map
// G u + beta; see sim.hpp for how the two wirings use it.

#include "pidz/plant.hpp"

#include <cmath>

namespace pidz {

struct DeadZone {
  VectorXd right_break;  // r_b > 0
  VectorXd left_break;   // l_b < 0
  VectorXd offset;       // beta

  DeadZone() = default;
  DeadZone(VectorXd r_b, VectorXd l_b, VectorXd beta)
      : right_break(std::move(r_b)), left_break(std::move(l_b)), offset(std::move(beta)) {
    const Eigen::Index n = right_break.size();
    if (n < 1) throw ModelError("dead_zone: empty break vectors");
    detail::require_dim(left_break, n, "dead_zone.l_b");
    detail::require_dim(offset, n, "dead_zone.beta");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(right_break(i) > 0.0)) throw ModelError("dead_zone.r_b: entries must be > 0");
      if (!(left_break(i) < 0.0)) throw ModelError("dead_zone.l_b: entries must be < 0");
    }
  }

  /// Symmetric band of half-width k around zero.
  static DeadZone symmetric(const VectorXd& half_width, const VectorXd& beta) {
    return {half_width, -half_width, beta};
  }
  static DeadZone symmetric(const VectorXd& half_width) {
    return symmetric(half_width, VectorXd::Zero(half_width.size()));
  }

  Eigen::Index dim() const { return right_break.size(); }

  /// k_i = (r_bi - l_bi) / 2.
  VectorXd half_width() const { return 0.5 * (right_break - left_break); }
};

namespace detail {

inline double dead_band(double w, double r, double l) {
  if (w > r) return w - r;
  if (w < l) return w - l;
  return 0.0;
}

}  // namespace detail

inline VectorXd apply(const DeadZone& dz, const VectorXd& v) {
  detail::require_dim(v, dz.dim(), "dead-zone input");
  VectorXd tau(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    tau(i) = detail::dead_band(v(i) + dz.offset(i), dz.right_break(i), dz.left_break(i));
  return tau;
}

/// Exact right inverse of apply() away from tau = 0. A zero request maps to
/// the command that cancels the offset, which lies inside the band.
inline VectorXd hard_inverse(const DeadZone& dz, const VectorXd& tau_des) {
  detail::require_dim(tau_des, dz.dim(), "dead-zone inverse input");
  VectorXd v(tau_des.size());
  for (Eigen::Index i = 0; i < tau_des.size(); ++i) {
    const double t = tau_des(i);
    double w = 0.0;
    if (t > 0.0)
      w = t + dz.right_break(i);
    else if (t < 0.0)
      w = t + dz.left_break(i);
    v(i) = w - dz.offset(i);
  }
  return v;
}

/// k_i tanh(mu_i e_i) with k the dead-zone half-widths: the smooth stand-in
/// for the jump of hard_inverse().
inline VectorXd smooth_inverse_term(const VectorXd& half_width, const VectorXd& mu,
                                    const VectorXd& error) {
  const Eigen::Index n = half_width.size();
  detail::require_dim(mu, n, "mu");
  detail::require_dim(error, n, "position error");
  VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(mu(i) > 0.0)) throw ModelError("mu: entries must be > 0");
    out(i) = half_width(i) * std::tanh(mu(i) * error(i));
  }
  return out;
}

inline VectorXd smooth_inverse_term(const DeadZone& dz, const VectorXd& mu, const VectorXd& error) {
  return smooth_inverse_term(dz.half_width(), mu, error);
}

}  // namespace pidz
