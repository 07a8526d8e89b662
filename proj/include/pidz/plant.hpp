#pragma once

// Fully-actuated port-Hamiltonian mechanical plant:
//
//   q' =  dH/dp
//   p' = -dH/dq - D(q,p) dH/dp + G u + beta
//   y  =  G^T M(q)^{-1} p
//
// with H(q,p) = 1/2 p^T M(q)^{-1} p + U(q).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pidz {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thrown when a model, gain set or state violates its declared invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require_dim(const VectorXd& v, Eigen::Index n, const std::string& what) {
  if (v.size() != n) {
    throw ModelError(what + ": expected dimension " + std::to_string(n) + ", got " +
                     std::to_string(v.size()));
  }
}

inline void require_dim(const MatrixXd& m, Eigen::Index n, const std::string& what) {
  if (m.rows() != n || m.cols() != n) {
    throw ModelError(what + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                     " matrix, got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
}

inline bool is_symmetric(const MatrixXd& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline bool is_diagonal(const MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline bool is_positive_definite(const MatrixXd& m) {
  if (!is_symmetric(m)) return false;
  Eigen::LLT<MatrixXd> llt(m);
  return llt.info() == Eigen::Success && min_eigenvalue(m) > 0.0;
}

}  // namespace detail

/// x := col(q, p).
struct GeneralizedState {
  VectorXd q;
  VectorXd p;

  GeneralizedState() = default;
  GeneralizedState(VectorXd q_, VectorXd p_) : q(std::move(q_)), p(std::move(p_)) {
    if (q.size() < 1 || q.size() != p.size())
      throw ModelError("GeneralizedState: q and p must share a dimension n >= 1");
    if (!q.allFinite() || !p.allFinite())
      throw ModelError("GeneralizedState: non-finite entries");
  }

  static GeneralizedState zero(Eigen::Index n) {
    return {VectorXd::Zero(n), VectorXd::Zero(n)};
  }

  Eigen::Index dim() const { return q.size(); }

  VectorXd stacked() const {
    VectorXd x(2 * dim());
    x << q, p;
    return x;
  }

  static GeneralizedState from_stacked(const VectorXd& x) {
    const Eigen::Index n = x.size() / 2;
    return {x.head(n), x.tail(n)};
  }
};

/// Time derivative of a GeneralizedState.
struct StateDerivative {
  VectorXd dq;
  VectorXd dp;

  VectorXd stacked() const {
    VectorXd x(dq.size() + dp.size());
    x << dq, dp;
    return x;
  }
};

struct MechanicalSystem {
  using MatrixMap = std::function<MatrixXd(const VectorXd&)>;
  using MatrixStackMap = std::function<std::vector<MatrixXd>(const VectorXd&)>;
  using ScalarMap = std::function<double(const VectorXd&)>;
  using VectorMap = std::function<VectorXd(const VectorXd&)>;
  using DampingMap = std::function<MatrixXd(const VectorXd&, const VectorXd&)>;

  Eigen::Index n = 0;
  MatrixMap mass;
  // dM/dq_j for j = 0..n-1. Empty => central finite differences.
  MatrixStackMap mass_grad;
  ScalarMap potential;
  VectorMap potential_grad;
  DampingMap damping;
  VectorXd input_gains;  // diagonal of G
  VectorXd offset;       // beta

  MatrixXd input_matrix() const { return input_gains.asDiagonal(); }
};

/// Structural checks on a system description (dimensions, G invertible).
inline void check_structure(const MechanicalSystem& sys) {
  if (sys.n < 1) throw ModelError("system: dimension n must be positive");
  if (!sys.mass) throw ModelError("system: mass map missing");
  if (!sys.potential || !sys.potential_grad) throw ModelError("system: potential missing");
  if (!sys.damping) throw ModelError("system: damping map missing");
  detail::require_dim(sys.input_gains, sys.n, "system.input_gains");
  detail::require_dim(sys.offset, sys.n, "system.offset");
  for (Eigen::Index i = 0; i < sys.n; ++i)
    if (sys.input_gains(i) == 0.0 || !std::isfinite(sys.input_gains(i)))
      throw ModelError("system.input_gains: G must be diagonal with nonzero entries");
}

/// Validation-mode check at one state: M(q) SPD, D(q,p) symmetric PSD.
/// Not called by the integrator.
inline void validate_at(const MechanicalSystem& sys, const GeneralizedState& x) {
  check_structure(sys);
  const MatrixXd m = sys.mass(x.q);
  detail::require_dim(m, sys.n, "system.mass");
  if (!detail::is_positive_definite(m))
    throw ModelError("system.mass: M(q) is not symmetric positive definite");
  const MatrixXd d = sys.damping(x.q, x.p);
  detail::require_dim(d, sys.n, "system.damping");
  if (!detail::is_symmetric(d) || detail::min_eigenvalue(d) < -1e-12 * std::max(1.0, d.norm()))
    throw ModelError("system.damping: D(q,p) is not symmetric positive semi-definite");
}

namespace detail {

inline void require_state(const MechanicalSystem& sys, const GeneralizedState& x) {
  require_dim(x.q, sys.n, "state.q");
  require_dim(x.p, sys.n, "state.p");
}

inline Eigen::LLT<MatrixXd> factor_mass(const MechanicalSystem& sys, const VectorXd& q) {
  Eigen::LLT<MatrixXd> llt(sys.mass(q));
  if (llt.info() != Eigen::Success)
    throw ModelError("system.mass: M(q) not invertible (not positive definite) at evaluation point");
  return llt;
}

/// d/dq of 1/2 p^T M(q)^{-1} p.
inline VectorXd kinetic_q_gradient(const MechanicalSystem& sys, const VectorXd& q,
                                   const VectorXd& p, const VectorXd& minv_p) {
  VectorXd grad(sys.n);
  if (sys.mass_grad) {
    const std::vector<MatrixXd> dm = sys.mass_grad(q);
    if (static_cast<Eigen::Index>(dm.size()) != sys.n)
      throw ModelError("system.mass_grad: expected one matrix per coordinate");
    for (Eigen::Index j = 0; j < sys.n; ++j)
      grad(j) = -0.5 * minv_p.dot(dm[static_cast<std::size_t>(j)] * minv_p);
    return grad;
  }
  for (Eigen::Index j = 0; j < sys.n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(q(j)));
    VectorXd qp = q, qm = q;
    qp(j) += h;
    qm(j) -= h;
    const double kp = 0.5 * p.dot(factor_mass(sys, qp).solve(p));
    const double km = 0.5 * p.dot(factor_mass(sys, qm).solve(p));
    grad(j) = (kp - km) / (qp(j) - qm(j));
  }
  return grad;
}

}  // namespace detail

inline double hamiltonian(const MechanicalSystem& sys, const GeneralizedState& x) {
  detail::require_state(sys, x);
  const VectorXd minv_p = detail::factor_mass(sys, x.q).solve(x.p);
  return 0.5 * x.p.dot(minv_p) + sys.potential(x.q);
}

struct HamiltonianGradient {
  VectorXd dq;
  VectorXd dp;
};

inline HamiltonianGradient hamiltonian_gradient(const MechanicalSystem& sys,
                                                const GeneralizedState& x) {
  detail::require_state(sys, x);
  VectorXd dp = detail::factor_mass(sys, x.q).solve(x.p);
  VectorXd dq = detail::kinetic_q_gradient(sys, x.q, x.p, dp) + sys.potential_grad(x.q);
  return {std::move(dq), std::move(dp)};
}

inline StateDerivative open_loop_field(const MechanicalSystem& sys, const GeneralizedState& x,
                                       const VectorXd& u) {
  detail::require_state(sys, x);
  detail::require_dim(u, sys.n, "input u");
  const HamiltonianGradient g = hamiltonian_gradient(sys, x);
  VectorXd dp = -g.dq - sys.damping(x.q, x.p) * g.dp + sys.input_gains.cwiseProduct(u) + sys.offset;
  return {g.dp, std::move(dp)};
}

/// y = G^T M(q)^{-1} p (G diagonal).
inline VectorXd passive_output(const MechanicalSystem& sys, const GeneralizedState& x) {
  detail::require_state(sys, x);
  return sys.input_gains.cwiseProduct(detail::factor_mass(sys, x.q).solve(x.p));
}

/// Constant-coefficient system with quadratic potential 1/2 q^T K q.
inline MechanicalSystem linear_system(const MatrixXd& mass, const MatrixXd& damping,
                                      const VectorXd& input_gains, const VectorXd& offset,
                                      const MatrixXd& stiffness) {
  MechanicalSystem sys;
  sys.n = mass.rows();
  detail::require_dim(mass, sys.n, "system.mass");
  detail::require_dim(damping, sys.n, "system.damping");
  detail::require_dim(stiffness, sys.n, "system.potential_stiffness");
  sys.mass = [mass](const VectorXd&) { return mass; };
  sys.mass_grad = [n = sys.n](const VectorXd&) {
    return std::vector<MatrixXd>(static_cast<std::size_t>(n), MatrixXd::Zero(n, n));
  };
  sys.potential = [stiffness](const VectorXd& q) { return 0.5 * q.dot(stiffness * q); };
  sys.potential_grad = [stiffness](const VectorXd& q) -> VectorXd {
    return 0.5 * (stiffness + stiffness.transpose()) * q;
  };
  sys.damping = [damping](const VectorXd&, const VectorXd&) { return damping; };
  sys.input_gains = input_gains;
  sys.offset = offset;
  check_structure(sys);
  return sys;
}

inline MechanicalSystem linear_system(const MatrixXd& mass, const MatrixXd& damping,
                                      const VectorXd& input_gains) {
  const Eigen::Index n = mass.rows();
  return linear_system(mass, damping, input_gains, VectorXd::Zero(n), MatrixXd::Zero(n, n));
}

}  // namespace pidz
