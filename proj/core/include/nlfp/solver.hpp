#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nlfp/grid.hpp"
#include "nlfp/models.hpp"

namespace nlfp {

/// y = A x for vectors of equal length.
using LinearAction = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  std::size_t max_krylov_dim = 200;
  /// Restart length; 0 keeps one Krylov space of up to max_krylov_dim vectors.
  std::size_t restart = 0;
};

struct GmresResult {
  std::vector<double> x;
  /// Achieved ||A x - b||_2 (from the Arnoldi recurrence).
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Unpreconditioned GMRES from x0 = 0 with modified Gram-Schmidt Arnoldi and
/// Givens rotations. Stops once ||A x - b|| <= max(rel_tol ||b||, abs_tol).
GmresResult gmres_solve(const LinearAction& A, std::span<const double> b, const GmresConfig& cfg = {});

enum class JvpMode { analytic, central_difference };

struct NewtonConfig {
  std::size_t n_iters = 20;
  double tol = 1e-7;
  NormKind p = NormKind::linf;
  JvpMode jvp = JvpMode::analytic;
  /// Central-difference step (DF mode only), applied to the direction scaled
  /// to unit max-norm.
  double h = 1e-5;
  GmresConfig gmres;
};

struct NewtonStep {
  std::size_t iteration = 0;
  double residual = 0.0;  // ||F(u)||_p before the step
  double step = 0.0;      // ||du||_p of the step taken
  std::size_t gmres_iterations = 0;
  double gmres_residual = 0.0;
};

struct NewtonResult {
  Field solution;
  bool converged = false;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double final_step = 0.0;
  std::vector<NewtonStep> history;
  /// Empty unless the iteration aborted.
  std::string failure;
};

/// (F(u + h phi) - F(u - h phi)) / (2h).
Field central_difference_jvp(const std::function<Field(const Field&)>& F, const Field& u, const Field& phi,
                             double h);

/// Newton-Krylov on F(u) = T u - u. The stopping test ||du|| + ||F(u)|| <= tol
/// is evaluated before every step, and once more after the last one.
NewtonResult newton_solve(const FixedPointMap& map, const Field& u0, const NewtonConfig& cfg = {});
NewtonResult newton_solve(const ProblemSpec& problem, const Field& u0, const NewtonConfig& cfg = {});

}  // namespace nlfp
