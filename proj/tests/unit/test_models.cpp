#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "nlfp/models.hpp"

using namespace nlfp;

namespace {

constexpr double pi = std::numbers::pi;

Field smooth_positive(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.3, 0.3);
  const double c1 = unif(rng), c2 = unif(rng), s1 = unif(rng);
  Field u(g);
  const auto x = coordinates(g.axis(0));
  for (std::size_t i = 0; i < x.size(); ++i)
    u[i] = 1.0 + c1 * std::cos(2 * x[i]) + c2 * std::cos(4 * x[i]) + s1 * std::sin(2 * x[i]);
  return u;
}

// Dense Jacobian of T over the independent nodes of a 1D periodic grid: a
// unit direction at node 0 also sets the duplicated endpoint.
Eigen::MatrixXd columns(const GridSpec& g, const std::function<Field(const Field&)>& action) {
  const std::size_t m = g.axis(0).independent();
  Eigen::MatrixXd J(m, m);
  for (std::size_t c = 0; c < m; ++c) {
    Field e(g);
    e[c] = 1.0;
    if (g.axis(0).periodic()) enforce_periodicity(e);
    const Field col = action(e);
    for (std::size_t r = 0; r < m; ++r) J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
  }
  return J;
}

}  // namespace

TEST(Models, HomogeneousIsFixedPointOfMcKeanVlasov) {
  for (std::size_t n : {101u, 501u}) {
    MV1D p;
    p.kappa = 7.0;
    p.kernel = Triangle{pi / 12};
    p.grid = GridSpec::torus(n, pi);
    const Field u = homogeneous(p.grid);
    EXPECT_LE(distance(apply_T(p, u), u, NormKind::linf), 1e-13);
  }
  MV2D q;
  q.kappa = 10.0;
  q.kernel = Separable2D{{SeparableTerm{1.0, CosineModes{{Mode{1.0, 1}}}, Constant{1.0}}}};
  q.grid = GridSpec::torus2d(33, pi);
  const Field v = homogeneous(q.grid);
  EXPECT_LE(distance(apply_T(q, v), v, NormKind::linf), 1e-13);
}

TEST(Models, OutputHasUnitMass) {
  MV1D p;
  p.kappa = 4.0;
  p.kernel = CosineModes{{Mode{1.0, 1}}};
  p.grid = GridSpec::torus(201, pi);
  EXPECT_NEAR(integrate(apply_T(p, smooth_positive(p.grid, 7))), 1.0, 1e-13);
}

TEST(Models, FrechetAnnihilatesConstants) {
  MV1D p;
  p.kappa = 4.0;
  p.kernel = TopHat{pi / 12};
  p.grid = GridSpec::torus(129, pi);
  const auto map = make_map(p);
  const Field u = smooth_positive(p.grid, 3);
  const Field d = map->frechet(u, map->apply(u), Field(p.grid, 1.0));
  EXPECT_LE(norm(d, NormKind::linf), 1e-12);
}

TEST(Models, FrechetRangeIsMeanZero) {
  MV1D p;
  p.kappa = 4.0;
  p.kernel = Triangle{pi / 12};
  p.grid = GridSpec::torus(129, pi);
  const auto map = make_map(p);
  const Field u = smooth_positive(p.grid, 4);
  const Field d = map->frechet(u, map->apply(u), smooth_positive(p.grid, 5));
  EXPECT_LE(std::abs(integrate(d)), 1e-13 * norm(d, NormKind::linf));
}

// Analytic Jacobian assembled column by column against central differences.
TEST(Models, DenseJacobianMatchesCentralDifferences) {
  MV1D p;
  p.kappa = 5.0;
  p.kernel = CosineModes{{Mode{1.0, 1}, Mode{0.7, 2}}};
  p.grid = GridSpec::torus(33, pi);
  const auto map = make_map(p);
  const Field u = smooth_positive(p.grid, 9);
  const Field Tu = map->apply(u);
  const double h = 1e-5;
  const Eigen::MatrixXd Ja = columns(p.grid, [&](const Field& e) { return map->frechet(u, Tu, e); });
  const Eigen::MatrixXd Jd = columns(p.grid, [&](const Field& e) {
    Field up = u, dn = u;
    for (std::size_t i = 0; i < u.size(); ++i) {
      up[i] += h * e[i];
      dn[i] -= h * e[i];
    }
    const Field a = map->apply(up), b = map->apply(dn);
    Field out(p.grid);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = (a[i] - b[i]) / (2 * h);
    return out;
  });
  EXPECT_LE((Ja - Jd).cwiseAbs().maxCoeff() / Ja.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Models, CuckerSmaleProfileIsNormalisedAndSelfConsistent) {
  CS p;
  p.alpha = 1.0;
  p.sigma = 0.2;
  p.grid = GridSpec::interval(801, -4.0, 4.0);
  const CuckerSmaleMap map(p);
  const Field u = map.profile(0.3);
  EXPECT_NEAR(integrate(u), 1.0, 1e-13);
  // T depends on u only through its first moment.
  Field v(p.grid);
  const auto x = coordinates(p.grid.axis(0));
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::exp(-(x[i] - 0.3) * (x[i] - 0.3) / 0.1);
  const double m = integrate(v);
  for (double& s : v.values) s /= m;
  EXPECT_LE(distance(map.apply(v), map.profile(map.velocity(v)), NormKind::linf), 1e-12);
}

TEST(Models, NeuralMapIsNormalisedPerAngle) {
  NFP p;
  p.sigma = 0.44;
  p.B = 3.0;
  p.activation = SmoothedReLU{};
  p.kernel = CosineNFP{{CosineTerm{-3.0, 0.0}, CosineTerm{3.0, 2.0}, CosineTerm{3.3, 8.0}}};
  p.grid = GridSpec(Axis{65, -pi / 2, pi / 2, Topology::periodic}, Axis{501, 0.0, 10.0, Topology::truncated});
  const NeuralMap map(p);
  Field u(p.grid);
  const auto x = coordinates(p.grid.axis(0));
  const auto y = coordinates(p.grid.axis(1));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      u.at(i, j) = (1.0 + 0.1 * std::cos(2 * x[i])) * std::exp(-(y[j] - 2.0) * (y[j] - 2.0));
  const Field Tu = map.apply(u);
  const std::size_t ny = y.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mass = simpson(std::span<const double>(Tu.values).subspan(i * ny, ny), p.grid.axis(1).spacing());
    EXPECT_NEAR(mass, 1.0 / pi, 1e-8) << i;
  }
}

TEST(Models, NeuralResidualIgnoresUnderflowedTails) {
  NFP p;
  p.sigma = 0.44;
  p.B = 3.0;
  p.activation = SmoothedReLU{};
  p.kernel = CosineNFP{{CosineTerm{-3.0, 0.0}, CosineTerm{3.0, 2.0}, CosineTerm{3.3, 8.0}}};
  // y_max = 35 puts the far tail below the smallest double.
  p.grid = GridSpec(Axis{33, -pi / 2, pi / 2, Topology::periodic}, Axis{1401, 0.0, 35.0, Topology::truncated});
  const NeuralMap map(p);
  const Field u = map.apply(map.homogeneous_state());
  EXPECT_EQ(u.values.back(), 0.0);
  EXPECT_LE(map.steady_state_residual(u), 1e-10);
}

TEST(Models, DiffusionInverses) {
  EXPECT_DOUBLE_EQ(invert_h_prime(LinearDiffusion{0.5}, 1.0), std::exp(2.0));
  EXPECT_NEAR(invert_h_prime(PorousFast{1.0, 2.0}, 4.0), 2.0, 1e-15);
  EXPECT_NEAR(invert_h_prime(FermiDirac{}, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(invert_h_prime(BoseEinstein{}, -std::log(2.0)), 1.0, 1e-15);
}

TEST(Models, SmoothedReluDerivative) {
  const SmoothedReLU f{0.1};
  for (double x : {0.2, 1.0, 3.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(activate_derivative(f, x), (activate(f, x + h) - activate(f, x - h)) / (2 * h), 1e-8);
  }
  EXPECT_EQ(activate(f, -1.0), 0.0);
}
