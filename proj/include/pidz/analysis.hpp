#pragma once

// Behaviour of the ideal closed loop near x* = (q*, 0).
//
// Linearising the structure-preserving closed loop at x* gives
//
//   xhat' = A xhat,   A = -[ 0        -M*^{-1}   ]
//                          [ P        R M*^{-1}  ],   R = D* + K_P,  P = K_I + mu K_Z.
//
// With upper-triangular factors M*^{-1} = phi_M^T phi_M and P = phi_P^T phi_P,
// T = [0 phi_M; phi_P 0] turns -A into the saddle-point matrix
//
//   N = [ phi_M R phi_M^T    phi_M phi_P^T ]
//       [ -phi_P phi_M^T     0             ].
//
// Every eigenpair (lambda, col(w1, w2)) of N satisfies
//   lambda^2 - a lambda + b = 0,
//   a = w1^* phi_M R phi_M^T w1 / |w1|^2,  b = w1^* phi_M P phi_M^T w1 / |w1|^2,
// and 4 lmax(P) lmax(M*) <= lmin(R)^2 is sufficient for a real positive spectrum.

#include "pidz/control.hpp"
#include "pidz/plant.hpp"
#include "pidz/trajectory.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

namespace pidz {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// P = K_I + mu K_Z, the position block of the Hessian of H_d at x*.
inline MatrixXd stiffness_matrix(const PbcGains& g) {
  return g.K_I + MatrixXd(g.mu.cwiseProduct(g.K_Z).asDiagonal());
}

inline MatrixXd mass_at_setpoint(const MechanicalSystem& sys, const PbcGains& g) {
  return sys.mass(g.q_star);
}

/// R = D(q*, 0) + K_P.
inline MatrixXd dissipation_matrix(const MechanicalSystem& sys, const PbcGains& g) {
  return sys.damping(g.q_star, VectorXd::Zero(sys.n)) + g.K_P;
}

inline MatrixXd linearize(const MechanicalSystem& sys, const PbcGains& g) {
  detail::require_gains(sys, g);
  const Eigen::Index n = sys.n;
  Eigen::LLT<MatrixXd> llt(mass_at_setpoint(sys, g));
  if (llt.info() != Eigen::Success) throw ModelError("linearize: M(q*) is singular or indefinite");
  const MatrixXd m_inv = llt.solve(MatrixXd::Identity(n, n));
  MatrixXd a = MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = m_inv;
  a.bottomLeftCorner(n, n) = -stiffness_matrix(g);
  a.bottomRightCorner(n, n) = -dissipation_matrix(sys, g) * m_inv;
  return a;
}

struct SaddleDecomposition {
  MatrixXd M_star;
  MatrixXd R;
  MatrixXd P;
  MatrixXd phi_M;  // upper triangular, M*^{-1} = phi_M^T phi_M
  MatrixXd phi_P;  // upper triangular, P = phi_P^T phi_P
  MatrixXd N;
  VectorXcd eigenvalues;
  MatrixXcd eigenvectors;  // columns

  Eigen::Index dim() const { return M_star.rows(); }
};

namespace detail {

/// Upper-triangular U with M = U U^T, via Cholesky of the index-reversed matrix.
inline MatrixXd upper_lower_factor(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m.reverse());
  if (llt.info() != Eigen::Success)
    throw ModelError(std::string(what) + ": Cholesky failed, matrix is not positive definite");
  return MatrixXd(llt.matrixL()).reverse();
}

inline MatrixXd upper_cholesky(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw ModelError(std::string(what) + ": Cholesky failed, matrix is not positive definite");
  return llt.matrixU();
}

}  // namespace detail

inline SaddleDecomposition saddle_decompose(const MatrixXd& m_star, const MatrixXd& r,
                                            const MatrixXd& p) {
  const Eigen::Index n = m_star.rows();
  detail::require_dim(m_star, n, "M*");
  detail::require_dim(r, n, "R");
  detail::require_dim(p, n, "P");
  if (!detail::is_symmetric(m_star)) throw ModelError("M*: not symmetric");
  if (!detail::is_symmetric(p)) throw ModelError("P = K_I + mu K_Z: not symmetric");

  SaddleDecomposition d;
  d.M_star = m_star;
  d.R = r;
  d.P = p;
  // M* = U U^T  =>  M*^{-1} = U^{-T} U^{-1}, and U^{-1} is upper triangular.
  const MatrixXd u = detail::upper_lower_factor(m_star, "M*");
  d.phi_M = u.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n, n));
  d.phi_P = detail::upper_cholesky(p, "P = K_I + mu K_Z");

  d.N.resize(2 * n, 2 * n);
  d.N.topLeftCorner(n, n) = d.phi_M * r * d.phi_M.transpose();
  d.N.topRightCorner(n, n) = d.phi_M * d.phi_P.transpose();
  d.N.bottomLeftCorner(n, n) = -d.phi_P * d.phi_M.transpose();
  d.N.bottomRightCorner(n, n).setZero();

  Eigen::EigenSolver<MatrixXd> es(d.N, true);
  if (es.info() != Eigen::Success) throw ModelError("saddle_decompose: eigensolver did not converge");
  d.eigenvalues = es.eigenvalues();
  d.eigenvectors = es.eigenvectors();
  return d;
}

inline SaddleDecomposition saddle_decompose(const MechanicalSystem& sys, const PbcGains& g) {
  detail::require_gains(sys, g);
  return saddle_decompose(mass_at_setpoint(sys, g), dissipation_matrix(sys, g),
                          stiffness_matrix(g));
}

/// |lambda^2 - a lambda + b| for the Rayleigh quotients a, b of w1.
/// Empty when w1 vanishes (degenerate eigenvector).
inline std::optional<double> eigen_quadratic_residual(const SaddleDecomposition& d,
                                                      std::complex<double> lambda,
                                                      const VectorXcd& w1) {
  detail::require_dim(w1.real().eval(), d.dim(), "w1");
  const double norm2 = w1.squaredNorm();
  if (!(norm2 > 0.0)) return std::nullopt;
  const MatrixXcd m_r = (d.phi_M * d.R * d.phi_M.transpose()).cast<std::complex<double>>();
  const MatrixXcd m_p = (d.phi_M * d.P * d.phi_M.transpose()).cast<std::complex<double>>();
  const std::complex<double> a = w1.dot(m_r * w1) / norm2;
  const std::complex<double> b = w1.dot(m_p * w1) / norm2;
  return std::abs(lambda * lambda - a * lambda + b);
}

/// Residuals for every computed eigenpair of N, in eigensolver order.
inline std::vector<std::optional<double>> eigen_quadratic_residuals(const SaddleDecomposition& d) {
  std::vector<std::optional<double>> out;
  const Eigen::Index n = d.dim();
  for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k)
    out.push_back(eigen_quadratic_residual(d, d.eigenvalues(k), d.eigenvectors.col(k).head(n)));
  return out;
}

/// Both roots of lambda^2 - a lambda + b = 0, (a +- sqrt(a^2 - 4b)) / 2.
inline std::pair<std::complex<double>, std::complex<double>> quadratic_roots(
    std::complex<double> a, std::complex<double> b) {
  const std::complex<double> disc = std::sqrt(a * a - 4.0 * b);
  return {0.5 * (a + disc), 0.5 * (a - disc)};
}

inline double spectral_radius(const VectorXcd& ev) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::max(r, std::abs(ev(i)));
  return r;
}

/// Greedy nearest-neighbour pairing of two spectra; returns the largest
/// pairing distance (infinity on size mismatch).
inline double spectrum_distance(const VectorXcd& a, const VectorXcd& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (used[uj]) continue;
      const double dist = std::abs(a(i) - b(j));
      if (dist < best) {
        best = dist;
        best_j = uj;
      }
    }
    used[best_j] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

struct TuningReport {
  double lhs = 0.0;  // 4 lmax(P) lmax(M*)
  double rhs = 0.0;  // lmin(R)^2
  bool satisfied = false;
  double max_im = 0.0;
  double min_re = 0.0;
  double spectral_radius = 0.0;
  bool real_spectrum = false;  // max |Im| <= 1e-9 rho(N)
  VectorXd q_star;             // where M* was evaluated
  VectorXcd spectrum;
  std::vector<std::optional<double>> residuals;

  /// Smallest alpha >= 1 (up to a 1e-10 relative margin) such that alpha R satisfies the rule.
  double dissipation_scaling() const;
};

inline constexpr double kRealSpectrumTolerance = 1e-9;

inline double TuningReport::dissipation_scaling() const {
  if (satisfied) return 1.0;
  const double lmin = std::sqrt(rhs);
  // The relative margin absorbs eigensolver rounding when alpha R is re-checked.
  double alpha = std::sqrt(lhs) / lmin * (1.0 + 1e-10);
  while ((alpha * lmin) * (alpha * lmin) < lhs)
    alpha = std::nextafter(alpha, std::numeric_limits<double>::infinity());
  return std::max(alpha, 1.0);
}

inline TuningReport tuning_check(const MatrixXd& m_star, const MatrixXd& r, const MatrixXd& p) {
  if (!detail::is_symmetric(m_star) || !detail::is_symmetric(r) || !detail::is_symmetric(p))
    throw ModelError("tuning_check: M*, R and P must be symmetric");
  TuningReport rep;
  rep.lhs = 4.0 * detail::max_eigenvalue(p) * detail::max_eigenvalue(m_star);
  const double rmin = detail::min_eigenvalue(r);
  rep.rhs = rmin * rmin;
  rep.satisfied = rep.lhs <= rep.rhs && rmin > 0.0;

  const SaddleDecomposition d = saddle_decompose(m_star, r, p);
  rep.spectrum = d.eigenvalues;
  rep.spectral_radius = spectral_radius(d.eigenvalues);
  rep.max_im = d.eigenvalues.imag().cwiseAbs().maxCoeff();
  rep.min_re = d.eigenvalues.real().minCoeff();
  rep.real_spectrum = rep.max_im <= kRealSpectrumTolerance * rep.spectral_radius;
  rep.residuals = eigen_quadratic_residuals(d);
  return rep;
}

inline TuningReport tuning_check(const MechanicalSystem& sys, const PbcGains& g) {
  detail::require_gains(sys, g);
  TuningReport rep =
      tuning_check(mass_at_setpoint(sys, g), dissipation_matrix(sys, g), stiffness_matrix(g));
  rep.q_star = g.q_star;
  return rep;
}

inline TuningReport tuning_check(const MechanicalSystem& sys, PbcGains g, const VectorXd& q_star) {
  g.q_star = q_star;
  return tuning_check(sys, g);
}

/// Gains whose dissipation R = D* + K_P is replaced by alpha R.
inline PbcGains rescale_dissipation(const MechanicalSystem& sys, const PbcGains& g, double alpha) {
  PbcGains out = g;
  const MatrixXd d_star = sys.damping(g.q_star, VectorXd::Zero(sys.n));
  out.K_P = alpha * (d_star + g.K_P) - d_star;
  return out;
}

// ---------------------------------------------------------------------------
// Transient response.

struct TransientMetrics {
  std::vector<double> overshoot;                    // fraction of |e_i(0)|
  std::vector<std::optional<double>> settling_time; // 2% band, per channel
  std::vector<int> oscillations;                    // sign changes of e_i
  std::optional<double> overall_settling_time() const {
    double t = 0.0;
    for (const auto& s : settling_time) {
      if (!s) return std::nullopt;
      t = std::max(t, *s);
    }
    return t;
  }
};

inline TransientMetrics transient_metrics(const Trajectory& traj, const VectorXd& q_star) {
  if (traj.empty()) throw ModelError("transient_metrics: empty trajectory");
  const Eigen::Index n = traj.dim();
  detail::require_dim(q_star, n, "q_star");
  TransientMetrics m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e0 = traj.states.front().q(i) - q_star(i);
    const double scale = e0 != 0.0 ? std::abs(e0) : 1.0;
    const double toward = e0 >= 0.0 ? -1.0 : 1.0;  // direction of travel

    double over = 0.0;
    int crossings = 0;
    int last_sign = 0;
    std::optional<std::size_t> last_outside;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double e = traj.states[k].q(i) - q_star(i);
      if (e0 != 0.0) over = std::max(over, toward * e);
      const int s = (e > 0.0) - (e < 0.0);
      if (s != 0) {
        if (last_sign != 0 && s != last_sign) ++crossings;
        last_sign = s;
      }
      if (std::abs(e) > 0.02 * scale) last_outside = k;
    }
    m.overshoot.push_back(over / scale);
    m.oscillations.push_back(crossings);
    if (!last_outside)
      m.settling_time.emplace_back(traj.times.front());
    else if (*last_outside + 1 < traj.size())
      m.settling_time.emplace_back(traj.times[*last_outside + 1]);
    else
      m.settling_time.emplace_back(std::nullopt);
  }
  return m;
}

}  // namespace pidz
