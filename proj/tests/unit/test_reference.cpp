#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlfp/models.hpp"
#include "nlfp/reference.hpp"

using namespace nlfp;

namespace {

constexpr double pi = std::numbers::pi;

// Power series sum_m (a/2)^(2m+n) / (m! (m+n)!).
double bessel_series(int n, double a) {
  double term = std::pow(0.5 * a, n) / std::tgamma(n + 1.0);
  double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= (0.25 * a * a) / (m * static_cast<double>(m + n));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

TEST(Reference, BesselMatchesPowerSeries) {
  for (int n : {0, 1})
    for (double a : {0.0, 0.1, 1.0, 2.5, 7.0, 15.0})
      EXPECT_NEAR(bessel_I(n, a), bessel_series(n, a), 1e-13 * std::max(1.0, bessel_series(n, a))) << n << " " << a;
}

TEST(Reference, BesselRatioStableForLargeArguments) {
  EXPECT_NEAR(bessel_ratio(2.0), bessel_series(1, 2.0) / bessel_series(0, 2.0), 1e-14);
  const double r = bessel_ratio(800.0);
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_NEAR(r, 1.0 - 1.0 / 1600.0, 1e-6);
}

TEST(Reference, KuramotoBelowThresholdIsHomogeneous) {
  const KuramotoState s = kuramoto_reference(2.4, 1, GridSpec::torus(201, pi));
  EXPECT_FALSE(s.nontrivial);
  EXPECT_LE(distance(s.u, homogeneous(s.u.grid), NormKind::linf), 1e-15);
}

TEST(Reference, KuramotoStateIsFixedPoint) {
  const GridSpec g = GridSpec::torus(2001, pi);
  const KuramotoState s = kuramoto_reference(3.0, 1, g);
  ASSERT_TRUE(s.nontrivial);
  EXPECT_LE(s.residual, 1e-12);
  MV1D p;
  p.kappa = 3.0;
  p.kernel = CosineModes{{Mode{1.0, 1}}};
  p.grid = g;
  EXPECT_LE(distance(apply_T(p, s.u), s.u, NormKind::linf), 1e-10);
  EXPECT_NEAR(integrate(s.u), 1.0, 1e-12);
}

TEST(Reference, CuckerSmaleZeroRootAlwaysExists) {
  for (double alpha : {0.1, 1.0, 5.0})
    for (double sigma : {0.1, 0.5, 1.2}) EXPECT_NEAR(cs_velocity_equation(alpha, sigma, 4.0, 0.0, 4001), 0.0, 1e-14);
}

TEST(Reference, CuckerSmaleSkewedPairIsSymmetric) {
  const VelocityRoot plus = cs_reference_velocity(1.0, 0.2, 4.0, +1, 20001);
  const VelocityRoot minus = cs_reference_velocity(1.0, 0.2, 4.0, -1, 20001);
  ASSERT_TRUE(plus.found && minus.found);
  EXPECT_GT(plus.ubar, 0.5);
  EXPECT_NEAR(plus.ubar, -minus.ubar, 1e-12);
  EXPECT_NEAR(cs_velocity_equation(1.0, 0.2, 4.0, plus.ubar, 20001), 0.0, 1e-12);
}

TEST(Reference, LargeNoiseHasOnlyZeroRoot) {
  EXPECT_FALSE(cs_reference_velocity(1.0, 2.0, 8.0, +1, 8001).found);
}

TEST(Reference, ErrorVsReferenceIsZeroOnReferenceGrid) {
  const KuramotoState s = kuramoto_reference(3.0, 1, GridSpec::torus(401, pi));
  EXPECT_EQ(error_vs_reference(s.u, s.u), 0.0);
}
