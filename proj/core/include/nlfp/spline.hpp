#pragma once

#include <span>
#include <vector>

namespace nlfp {

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// sub[0] and super[n-1] are ignored.
void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs);

/// Solves a cyclic tridiagonal system: row i couples i-1, i, i+1 modulo n.
/// sub[0] couples row 0 to row n-1 and super[n-1] couples row n-1 to row 0.
void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> super, std::span<double> rhs);

/// Interpolating cubic spline on uniformly spaced nodes.
class CubicSpline {
 public:
  /// Periodic splines expect y.back() == y.front() (endpoint duplicate).
  CubicSpline(double x0, double dx, std::vector<double> y, bool periodic);

  double operator()(double x) const;

 private:
  double x0_;
  double dx_;
  bool periodic_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
};

}  // namespace nlfp
