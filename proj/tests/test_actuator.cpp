#include <catch_amalgamated.hpp>

#include "support.hpp"

#include <cmath>
#include <random>

using namespace pidz;
using Catch::Approx;

namespace {

VectorXd one(double v) { return VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("apply: branches of the break-point model", "[actuator]") {
  const DeadZone dz(one(0.3), one(-0.2), one(0.0));
  REQUIRE(apply(dz, one(0.0))(0) == 0.0);
  REQUIRE(apply(dz, one(0.3 + 1.0))(0) == Approx(1.0));
  REQUIRE(apply(dz, one(-0.2 - 0.5))(0) == Approx(-0.5));

  const auto sym = DeadZone::symmetric(one(0.13));
  REQUIRE(apply(sym, one(-0.2))(0) == Approx(-0.07).epsilon(1e-12));
}

TEST_CASE("apply: zero on the band when beta = 0 (grid)", "[actuator]") {
  const DeadZone dz(vec2(0.13, 0.55), vec2(-0.4, -0.15), vec2(0, 0));
  for (int k = 0; k <= 10000; ++k) {
    const double t = k / 10000.0;
    const VectorXd v = dz.left_break + t * (dz.right_break - dz.left_break);
    REQUIRE(apply(dz, v).norm() == 0.0);
  }
}

TEST_CASE("apply: continuous, monotone, slopes 0 and 1", "[actuator]") {
  const auto dz = DeadZone::symmetric(one(0.35), one(-0.2));
  double prev = apply(dz, one(-3.0))(0);
  const double h = 1e-4;
  for (double v = -3.0 + h; v <= 3.0; v += h) {
    const double t = apply(dz, one(v))(0);
    REQUIRE(t >= prev);
    REQUIRE(t - prev <= h * (1 + 1e-9));  // Lipschitz 1, hence continuous
    prev = t;
  }
  // Offset displaces the band: zero torque exactly on [l_b - beta, r_b - beta].
  REQUIRE(apply(dz, one(0.549))(0) == 0.0);
  REQUIRE(apply(dz, one(-0.149))(0) == 0.0);
  REQUIRE(apply(dz, one(-0.151))(0) < 0.0);
  REQUIRE(apply(dz, one(0.65))(0) == Approx(0.1));
}

TEST_CASE("apply: dimension mismatch", "[actuator]") {
  REQUIRE_THROWS_AS(apply(DeadZone::symmetric(vec2(0.1, 0.1)), one(0.0)), ModelError);
  REQUIRE_THROWS_AS(DeadZone(one(-0.1), one(-0.2), one(0)), ModelError);
  REQUIRE_THROWS_AS(DeadZone(one(0.1), one(0.2), one(0)), ModelError);
}

TEST_CASE("hard_inverse: branch formula and zero request", "[actuator]") {
  const auto dz = DeadZone::symmetric(one(0.13));
  REQUIRE(hard_inverse(dz, one(0.0))(0) == 0.0);
  REQUIRE(hard_inverse(dz, one(0.5))(0) == Approx(0.63));
  REQUIRE(hard_inverse(dz, one(-0.5))(0) == Approx(-0.63));
  // Zero request with an offset lands inside the displaced band.
  const auto shifted = DeadZone::symmetric(one(0.13), one(-0.2));
  REQUIRE(apply(shifted, hard_inverse(shifted, one(0.0)))(0) == 0.0);
}

TEST_CASE("hard_inverse: exact right inverse of apply", "[actuator]") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> mag(1e-9, 5.0);
  std::bernoulli_distribution sign;
  for (int k = 0; k < 2000; ++k) {
    const DeadZone dz(test::random_vector(rng, 3, 0.01, 1.0), test::random_vector(rng, 3, -1.0, -0.01),
                      test::random_vector(rng, 3, -0.5, 0.5));
    VectorXd tau(3);
    for (int i = 0; i < 3; ++i) tau(i) = (sign(rng) ? 1 : -1) * mag(rng);
    const VectorXd back = apply(dz, hard_inverse(dz, tau));
    REQUIRE((back - tau).cwiseAbs().maxCoeff() <= 4 * std::numeric_limits<double>::epsilon() * 8.0);
  }
}

TEST_CASE("smooth_inverse_term: values, bounds, slope", "[actuator]") {
  const auto dz = DeadZone::symmetric(one(0.13));
  REQUIRE(smooth_inverse_term(dz, one(10), one(0.0))(0) == 0.0);
  REQUIRE(smooth_inverse_term(dz, one(10), one(1e6))(0) == Approx(0.13));
  REQUIRE(smooth_inverse_term(dz, one(10), one(0.3))(0) == Approx(0.12935711797927496).epsilon(1e-14));
  // odd
  REQUIRE(smooth_inverse_term(dz, one(10), one(-0.3))(0) == -smooth_inverse_term(dz, one(10), one(0.3))(0));
  // slope at zero k * mu
  const double h = 1e-7;
  const double slope = (smooth_inverse_term(dz, one(10), one(h))(0) -
                        smooth_inverse_term(dz, one(10), one(-h))(0)) / (2 * h);
  REQUIRE(slope == Approx(1.3).epsilon(1e-8));
  REQUIRE_THROWS_AS(smooth_inverse_term(dz, one(0.0), one(0.1)), ModelError);
  REQUIRE_THROWS_AS(smooth_inverse_term(dz, one(-1.0), one(0.1)), ModelError);
}

TEST_CASE("smooth_inverse_term: large mu approaches the hard jump", "[actuator]") {
  const double k = 0.13, mu = 1e4;
  const auto dz = DeadZone::symmetric(one(k));
  const double bound = 1e-8 * k + k * (1 - std::tanh(mu * 0.01));
  for (double e = 0.01; e < 10.0; e *= 1.05) {
    REQUIRE(std::abs(smooth_inverse_term(dz, one(mu), one(e))(0) - k) <= bound);
    REQUIRE(std::abs(smooth_inverse_term(dz, one(mu), one(-e))(0) + k) <= bound);
  }
  // The hard inverse jumps by 2k at zero; the smooth term covers the same span.
  const double jump = hard_inverse(dz, one(1e-12))(0) - hard_inverse(dz, one(-1e-12))(0);
  REQUIRE(jump == Approx(2 * k).epsilon(1e-9));
}
