#pragma once

#include <cstddef>

#include "nlfp/grid.hpp"

namespace nlfp {

/// Modified Bessel function I_n(a), n in {0, 1}, a >= 0, from the periodic
/// integral representation with the trapezoidal rule.
double bessel_I(int n, double a);
/// I_1(a) / I_0(a) without overflow.
double bessel_ratio(double a);

struct KuramotoState {
  Field u;
  /// Amplitude a with u = exp(a cos(2 pi k x / L)) / (L I_0(a)).
  double a = 0.0;
  /// False when only the homogeneous root exists (kappa <= kappa*).
  bool nontrivial = false;
  /// |M(a) - a| at the returned amplitude.
  double residual = 0.0;
};

/// Stationary state of the single-mode kernel W = -w_k on a periodic grid,
/// found by scalar Newton on a = (kappa / sigma) sqrt(2/L) I_1(a) / I_0(a).
KuramotoState kuramoto_reference(double kappa, int k, const GridSpec& grid, double sigma = 1.0);

/// g(ubar) = int x T[ubar] dx - ubar for the Cucker-Smale map on [-X, X],
/// by Simpson's rule on n points.
double cs_velocity_equation(double alpha, double sigma, double X, double ubar, std::size_t n = 200001);

struct VelocityRoot {
  double ubar = 0.0;
  bool found = false;
};

/// Root of g with the requested sign (-1, 0, +1). Nonzero roots are located by a
/// sign scan of g on (0, ubar_max] followed by bisection; the largest is returned.
VelocityRoot cs_reference_velocity(double alpha, double sigma, double X, int sign_hint,
                                   std::size_t n = 200001, double ubar_max = 3.0, std::size_t scan = 400);

/// Upsamples u_n to the reference grid and returns the l^p distance.
double error_vs_reference(const Field& u_n, const Field& u_ref, NormKind p = NormKind::linf);

}  // namespace nlfp
