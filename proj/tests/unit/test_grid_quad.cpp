#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlfp/error.hpp"
#include "nlfp/grid.hpp"
#include "nlfp/spline.hpp"

using namespace nlfp;

TEST(Grid, TorusStoresBothEndpoints) {
  const GridSpec g = GridSpec::torus(9, std::numbers::pi);
  const Axis& a = g.axis(0);
  EXPECT_EQ(a.n, 9u);
  EXPECT_EQ(a.independent(), 8u);
  EXPECT_DOUBLE_EQ(a.lower, -std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(a.upper, std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(a.spacing(), std::numbers::pi / 8);
  EXPECT_TRUE(a.symmetric());
}

TEST(Grid, RejectsDegenerateAxes) {
  EXPECT_THROW(GridSpec::interval(2, 0.0, 1.0), Error);
  EXPECT_THROW(GridSpec::interval(5, 1.0, 1.0), Error);
}

TEST(Grid, HomogeneousHasUnitMass) {
  const Field u = homogeneous(GridSpec::torus(101, std::numbers::pi));
  EXPECT_NEAR(integrate(u), 1.0, 1e-14);
  const Field v = homogeneous(GridSpec::torus2d(33, std::numbers::pi));
  EXPECT_NEAR(integrate(v), 1.0, 1e-14);
}

// Composite Simpson integrates cubics exactly.
TEST(Quadrature, SimpsonExactOnCubics) {
  for (std::size_t n : {3u, 5u, 11u, 101u}) {
    const GridSpec g = GridSpec::interval(n, -0.7, 1.9);
    Field f(g);
    const auto x = coordinates(g.axis(0));
    for (std::size_t i = 0; i < n; ++i) f[i] = 2.0 * x[i] * x[i] * x[i] - x[i] * x[i] + 3.0 * x[i] - 0.5;
    auto F = [](double t) { return 0.5 * t * t * t * t - t * t * t / 3.0 + 1.5 * t * t - 0.5 * t; };
    EXPECT_NEAR(integrate(f), F(1.9) - F(-0.7), 1e-13) << "n=" << n;
  }
}

TEST(Quadrature, SimpsonTensorExactOnBicubics) {
  const GridSpec g(Axis{7, 0.0, 1.0, Topology::truncated}, Axis{9, -1.0, 2.0, Topology::truncated});
  Field f(g);
  const auto x = coordinates(g.axis(0));
  const auto y = coordinates(g.axis(1));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) f.at(i, j) = x[i] * x[i] * x[i] * y[j] * y[j];
  EXPECT_NEAR(integrate(f), 0.25 * 3.0, 1e-13);
}

TEST(Quadrature, SimpsonRejectsEvenCounts) {
  const GridSpec g = GridSpec::interval(10, 0.0, 1.0);
  EXPECT_THROW(integrate(Field(g, 1.0)), Error);
}

TEST(Quadrature, SimpsonFourthOrder) {
  double prev = 0.0;
  for (std::size_t n : {17u, 33u, 65u}) {
    const GridSpec g = GridSpec::interval(n, 0.0, 1.0);
    Field f(g);
    const auto x = coordinates(g.axis(0));
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(x[i]);
    const double err = std::abs(integrate(f) - (std::exp(1.0) - 1.0));
    if (prev > 0.0) EXPECT_NEAR(prev / err, 16.0, 1.0);
    prev = err;
  }
}

TEST(Spline, NotAKnotReproducesCubics) {
  std::vector<double> y;
  auto p = [](double t) { return t * t * t - 2.0 * t + 1.0; };
  for (int i = 0; i < 12; ++i) y.push_back(p(0.1 * i));
  const CubicSpline s(0.0, 0.1, y, false);
  for (double t : {0.05, 0.33, 0.71, 1.07}) EXPECT_NEAR(s(t), p(t), 1e-12);
}

TEST(Spline, PeriodicInterpolatesSmoothData) {
  const std::size_t n = 65;
  const double L = std::numbers::pi, dx = L / (n - 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::cos(2.0 * (-L / 2 + i * dx));
  const CubicSpline s(-L / 2, dx, y, true);
  for (double t : {-1.4, -0.2, 0.9, 1.55}) EXPECT_NEAR(s(t), std::cos(2.0 * t), 1e-5);
}

TEST(Spline, CyclicTridiagonalMatchesDirectProduct) {
  const std::vector<double> sub{1.0, -0.5, 0.25, 0.4, -1.0}, diag{4.0, 5.0, 4.5, 6.0, 5.5},
      super{0.3, 1.0, -0.7, 0.2, 0.9}, x{1.0, -2.0, 0.5, 3.0, -1.5};
  const std::size_t n = x.size();
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i)
    b[i] = sub[i] * x[(i + n - 1) % n] + diag[i] * x[i] + super[i] * x[(i + 1) % n];
  solve_cyclic_tridiagonal(sub, diag, super, b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b[i], x[i], 1e-13);
}

TEST(Upsample, PeriodicSplineFourthOrder) {
  const double L = std::numbers::pi;
  const GridSpec fine = GridSpec::torus(2001, L);
  Field exact(fine);
  const auto xf = coordinates(fine.axis(0));
  for (std::size_t i = 0; i < xf.size(); ++i) exact[i] = std::exp(std::cos(2.0 * xf[i]));
  double prev = 0.0;
  for (std::size_t n : {51u, 101u, 201u}) {
    const GridSpec g = GridSpec::torus(n, L);
    Field f(g);
    const auto x = coordinates(g.axis(0));
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(std::cos(2.0 * x[i]));
    const double err = distance(upsample(f, fine), exact, NormKind::linf);
    if (prev > 0.0) EXPECT_GT(prev / err, 12.0);
    prev = err;
  }
}

TEST(Norms, WeightedL2UsesCellMeasure) {
  const GridSpec g = GridSpec::torus(5, 2.0);
  const Field f(g, 2.0);
  EXPECT_DOUBLE_EQ(norm(f, NormKind::linf), 2.0);
  EXPECT_NEAR(norm(f, NormKind::l2, true), std::sqrt(5 * 4.0 * 0.5), 1e-14);
}
