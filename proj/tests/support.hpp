#pragma once

// Shared helpers for the test suites: random SPD draws and finite differences.

#include "pidz/pidz.hpp"

#include <functional>
#include <random>

namespace pidz::test {

inline MatrixXd random_spd(std::mt19937& rng, Eigen::Index n, double min_eig = 0.1,
                           double max_eig = 10.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> eig(min_eig, max_eig);
  MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng);
  const Eigen::HouseholderQR<MatrixXd> qr(a);
  const MatrixXd q = qr.householderQ();
  VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = eig(rng);
  MatrixXd m = q * d.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

inline VectorXd random_vector(std::mt19937& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

/// Central-difference gradient of a scalar function.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-6) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector field.
inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-6) {
  const VectorXd f0 = f(x);
  MatrixXd j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

/// 1-DoF plant with constant mass, damping, unit input gain and zero potential.
inline MechanicalSystem scalar_system(double mass, double damping, double gain = 1.0) {
  return linear_system(MatrixXd::Constant(1, 1, mass), MatrixXd::Constant(1, 1, damping),
                       VectorXd::Constant(1, gain));
}

inline PbcGains scalar_gains(double k_p, double k_i, double k_z, double mu, double q_star,
                             double beta_c = 0.0) {
  PbcGains g;
  g.K_P = MatrixXd::Constant(1, 1, k_p);
  g.K_I = MatrixXd::Constant(1, 1, k_i);
  g.K_Z = VectorXd::Constant(1, k_z);
  g.mu = VectorXd::Constant(1, mu);
  g.beta_comp = VectorXd::Constant(1, beta_c);
  g.q_star = VectorXd::Constant(1, q_star);
  return g;
}

}  // namespace pidz::test
