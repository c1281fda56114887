#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlfp/error.hpp"
#include "nlfp/reference.hpp"
#include "nlfp/stability.hpp"

using namespace nlfp;

namespace {

constexpr double pi = std::numbers::pi;

double block_mass(const Field& u) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) s += u[i];
  return s;
}

KappaFamily kuramoto(std::size_t n) {
  MVParams p;
  p.kernel = CosineModes{{Mode{1.0, 1}}};
  p.grid = GridSpec::torus(n, pi);
  return KappaFamily(p);
}

}  // namespace

TEST(Perturb, PreservesMassAndHitsLevel) {
  const GridSpec g = GridSpec::torus(201, pi);
  const Field u = cosine_guess(g, 1, 0.2);
  for (double level : {1e-2, 1e-5, 1e-8}) {
    const Field v = perturb(u, level, 42);
    EXPECT_NEAR(block_mass(v), block_mass(u), 1e-14 * block_mass(u));
    double d2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
      d2 += (v[i] - u[i]) * (v[i] - u[i]);
      n2 += u[i] * u[i];
    }
    EXPECT_NEAR(std::sqrt(d2 / n2), level, 1e-6 * level);
  }
  EXPECT_EQ(perturb(u, 1e-3, 7).values, perturb(u, 1e-3, 7).values);
}

TEST(Evolve, HomogeneousIsExactEquilibrium) {
  const auto fam = kuramoto(201);
  const auto s = evolve(*fam.at(2.0), fam.homogeneous_state(), EvolveConfig{});
  EXPECT_EQ(s.steps, 140u);
  for (double d : s.distance) EXPECT_LE(d, 1e-10);
}

TEST(Evolve, ConvergedProfileIsNearEquilibrium) {
  const auto fam = kuramoto(401);
  const auto map = fam.at(3.0);
  const auto r = newton_solve(*map, cosine_guess(fam.grid(), 1, 1.0));
  ASSERT_TRUE(r.converged);
  EvolveConfig cfg;
  cfg.t_final = cfg.dt;
  const auto s = evolve(*map, r.solution, cfg);
  EXPECT_LE(s.distance.front(), 1e-6);
}

// Above threshold a small even perturbation of u_inf grows and settles on the
// analytic Kuramoto state.
TEST(Evolve, KuramotoInstabilityReachesBranch) {
  const auto fam = kuramoto(401);
  Field u0 = fam.homogeneous_state();
  const auto x = coordinates(u0.grid.axis(0));
  for (std::size_t i = 0; i < x.size(); ++i) u0[i] += 1e-3 * std::cos(2 * x[i]);
  EvolveConfig cfg;
  cfg.t_final = 40.0;
  const auto s = evolve(*fam.at(3.0), u0, cfg);
  EXPECT_LE(s.max_mass_drift, 1e-12);
  EXPECT_GE(s.min_density, 0.0);
  const KuramotoState ref = kuramoto_reference(3.0, 1, u0.grid);
  EXPECT_LE(relative_shift_l2(s.final_state, ref.u), 1e-3);
  EXPECT_EQ(s.energy_increases, 0u);
}

// Linearised growth of mode 1 over one step: (1 + dt a) / (1 + dt b) with
// b = 4 sigma and a = b kappa / kappa*.
TEST(Evolve, LinearGrowthFactorOfSemiImplicitStep) {
  const auto fam = kuramoto(801);
  const double kappa = 3.0, eps = 1e-9;
  Field u0 = fam.homogeneous_state();
  const auto x = coordinates(u0.grid.axis(0));
  for (std::size_t i = 0; i < x.size(); ++i) u0[i] += eps * std::cos(2 * x[i]);
  EvolveConfig cfg;
  cfg.t_final = cfg.dt;
  const auto s = evolve(*fam.at(kappa), u0, cfg);
  const double b = 4.0, a = b * kappa / std::sqrt(2 * pi);
  const double expected = (1 + cfg.dt * a) / (1 + cfg.dt * b);
  const double got = mode_amplitude(s.final_state, 1) / mode_amplitude(u0, 1);
  EXPECT_NEAR(got, expected, 2e-3);
}

TEST(Evolve, RejectsBadConfig) {
  const auto fam = kuramoto(101);
  EvolveConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(evolve(*fam.at(2.0), fam.homogeneous_state(), cfg), Error);
}

TEST(Classify, HomogeneousTriangleAroundFirstThreshold) {
  MVParams p;
  p.kernel = Triangle{pi / 12};
  p.grid = GridSpec::torus(201, pi);
  const KappaFamily fam(p);
  Branch hom;
  for (double k : {5.5, 7.5}) hom.records.push_back(BranchRecord{k, fam.homogeneous_state()});
  const auto labels = classify_stability(fam, hom, {5.5, 7.5}, {1e-2, 1e-5}, EvolveConfig{});
  ASSERT_EQ(labels.size(), 4u);
  EXPECT_TRUE(labels[0].stable);
  EXPECT_TRUE(labels[1].stable);
  EXPECT_FALSE(labels[2].stable);
  EXPECT_FALSE(labels[3].stable);
}

TEST(RelativeShift, ZeroForShiftedCopy) {
  const GridSpec g = GridSpec::torus(101, pi);
  const Field u = cosine_guess(g, 1, 0.2);
  Field v(g);
  for (std::size_t i = 0; i < 100; ++i) v[i] = u[(i + 13) % 100];
  enforce_periodicity(v);
  EXPECT_LE(relative_shift_l2(u, v), 1e-15);
}
