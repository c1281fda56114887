#pragma once

#include <memory>
#include <variant>

#include "nlfp/convolution.hpp"
#include "nlfp/grid.hpp"
#include "nlfp/kernels.hpp"

namespace nlfp {

// Inverse of H' for the supported diffusion laws.

/// exp(s / sigma).
struct LinearDiffusion {
  double sigma = 1.0;
};
/// (s / (nu m))^(1 / (m - 1)); needs s / (nu m) > 0 and m != 1.
struct PorousFast {
  double nu = 1.0;
  double m = 2.0;
};
/// 1 / (1 + exp(-s)).
struct FermiDirac {};
/// -1 / (1 - exp(-s)); positive only for s < 0.
struct BoseEinstein {};

using DiffusionInverse = std::variant<LinearDiffusion, PorousFast, FermiDirac, BoseEinstein>;

double invert_h_prime(const DiffusionInverse& d, double s);

// Activation functions for the neural model.

struct Identity {};
/// x^2 / sqrt(x^2 + eps) for x >= 0, 0 otherwise.
struct SmoothedReLU {
  double eps = 0.1;
};

using Activation = std::variant<Identity, SmoothedReLU>;

double activate(const Activation& f, double x);
double activate_derivative(const Activation& f, double x);

// Problem variants.

struct MVParams {
  double kappa = 0.0;
  double sigma = 1.0;
  KernelSpec kernel;
  GridSpec grid;
};
/// McKean-Vlasov on a periodic interval.
struct MV1D : MVParams {};
/// McKean-Vlasov on a periodic square.
struct MV2D : MVParams {};

/// Cucker-Smale on the truncated line [-X, X] with confinement
/// alpha (x^4/4 - x^2/2) and interaction |x|^2/2.
struct CS {
  double alpha = 1.0;
  double sigma = 1.0;
  GridSpec grid;
};

/// Neural model on (periodic angle) x (truncated activity [0, y_max]).
/// The kernel is one-dimensional and acts along the angle.
struct NFP {
  double sigma = 1.0;
  double B = 0.0;
  KernelSpec kernel;
  Activation activation = Identity{};
  GridSpec grid;
};

using ProblemSpec = std::variant<MV1D, MV2D, CS, NFP>;

const GridSpec& problem_grid(const ProblemSpec& p);

/// A fixed-point map T with its Frechet derivative. Implementations are
/// immutable and safe to share across threads.
class FixedPointMap {
 public:
  virtual ~FixedPointMap() = default;

  virtual const GridSpec& grid() const = 0;
  virtual Field apply(const Field& u) const = 0;
  /// DT[u](phi); Tu must equal apply(u).
  virtual Field frechet(const Field& u, const Field& Tu, const Field& phi) const = 0;
  /// max |xi - mean xi| of sigma log u + Phi[u] + V over the effective support.
  virtual double steady_state_residual(const Field& u) const = 0;
};

/// exp(-kappa/sigma W*u) / Z(u), in one or two dimensions.
class McKeanVlasovMap final : public FixedPointMap {
 public:
  explicit McKeanVlasovMap(const MVParams& p);
  McKeanVlasovMap(double kappa, double sigma, std::shared_ptr<const ConvPlan> plan,
                  std::shared_ptr<const Spectrum> kernel);

  const GridSpec& grid() const override { return plan_->grid(); }
  Field apply(const Field& u) const override;
  Field frechet(const Field& u, const Field& Tu, const Field& phi) const override;
  double steady_state_residual(const Field& u) const override;

  double kappa() const { return kappa_; }
  double sigma() const { return sigma_; }
  /// W * u.
  Field interaction(const Field& u) const;
  /// Same kernel and grid at another interaction strength; shares the FFT state.
  std::shared_ptr<McKeanVlasovMap> with_kappa(double kappa) const;

 private:
  double kappa_;
  double sigma_;
  std::shared_ptr<const ConvPlan> plan_;
  std::shared_ptr<const Spectrum> kernel_;
};

/// Mean-velocity parametrised map; the quadratic interaction is expanded
/// analytically, so W*u enters as x^2/2 - ubar x up to a constant.
class CuckerSmaleMap final : public FixedPointMap {
 public:
  explicit CuckerSmaleMap(const CS& p);

  const GridSpec& grid() const override { return p_.grid; }
  Field apply(const Field& u) const override;
  Field frechet(const Field& u, const Field& Tu, const Field& phi) const override;
  double steady_state_residual(const Field& u) const override;

  /// First moment of u.
  double velocity(const Field& u) const;
  /// Normalised profile for a given mean velocity.
  Field profile(double ubar) const;

 private:
  CS p_;
  std::vector<double> x_;
};

/// Per-angle Gaussian in the activity variable centred at F(W*ubar + B).
class NeuralMap final : public FixedPointMap {
 public:
  explicit NeuralMap(const NFP& p);

  const GridSpec& grid() const override { return p_.grid; }
  Field apply(const Field& u) const override;
  Field frechet(const Field& u, const Field& Tu, const Field& phi) const override;
  double steady_state_residual(const Field& u) const override;

  /// Per-angle first moment in the activity variable (length nx).
  std::vector<double> first_moment(const Field& u) const;
  /// Per-angle Gaussian centres F0(x) for the state u.
  std::vector<double> centres(const Field& u) const;
  /// Angle-independent profile with every centre at f0.
  Field profile(double f0) const;
  /// Angle-independent fixed point, solved as a scalar problem for F0.
  Field homogeneous_state() const;

 private:
  Field row_gaussians(const std::vector<double>& f0) const;

  NFP p_;
  GridSpec angle_grid_;
  std::vector<double> y_;
  std::shared_ptr<const ConvPlan> plan_;
  std::shared_ptr<const Spectrum> kernel_;
};

std::shared_ptr<const FixedPointMap> make_map(const ProblemSpec& p);

/// Convenience wrappers that build the map on each call.
Field apply_T(const ProblemSpec& p, const Field& u);
Field frechet_T(const ProblemSpec& p, const Field& u, const Field& Tu, const Field& phi);

}  // namespace nlfp
