#pragma once

#include <cstdint>
#include <vector>

#include "nlfp/continuation.hpp"
#include "nlfp/models.hpp"

namespace nlfp {

struct EvolveConfig {
  double dt = 0.1;
  double t_final = 14.0;
  /// Relative l2 size of the initial perturbation.
  double noise_level = 1e-3;
  /// Relative l2 distance (modulo shifts) beyond which a run has left the
  /// profile; 0 selects 10 x noise_level.
  double departure_threshold = 0.0;
  std::uint64_t seed = 0;
};

struct EvolveSummary {
  Field final_state;
  std::size_t steps = 0;
  /// Largest per-step relative change of the discrete mass.
  double max_mass_drift = 0.0;
  double min_density = 0.0;
  /// Relative l2 distance to the initial state after each step.
  std::vector<double> distance;
  /// Free energy sigma int u log u + (kappa/2) int u W*u after each step.
  std::vector<double> energy;
  std::size_t energy_increases = 0;
};

/// Implicit finite-volume stepping of u_t = (u (sigma log u + kappa W*u)_x)_x
/// on the periodic grid. Fluxes use exponential (Scharfetter-Gummel) upwinding
/// with the interaction potential frozen at the start of each step, so every
/// step is a cyclic M-matrix solve: mass is conserved, positivity kept, and
/// exp(-kappa W*u / sigma) is an exact discrete equilibrium. Throws if a step
/// loses positivity beyond -1e-12 or drifts mass by more than 1e-10.
EvolveSummary evolve(const McKeanVlasovMap& map, const Field& u0, const EvolveConfig& cfg);

/// Mass-preserving multiplicative noise: u (1 + eta) projected to zero mean
/// and scaled to the requested relative l2 size.
Field perturb(const Field& u, double level, std::uint64_t seed);

/// min over circular shifts of ||u - shift(v)||_2 / ||v||_2 on the independent block.
double relative_shift_l2(const Field& u, const Field& v);

struct StabilityLabel {
  double kappa = 0.0;
  double noise_level = 0.0;
  bool stable = false;
  double final_distance = 0.0;
  double max_mass_drift = 0.0;
  double min_density = 0.0;
  std::size_t energy_increases = 0;
  /// Branch id nearest to the final state when a diagram is supplied, else 0.
  int approached_branch = 0;
};

/// Perturb-and-evolve classification of the records of `branch` nearest to
/// each requested kappa, at each noise tier.
std::vector<StabilityLabel> classify_stability(const KappaFamily& family, const Branch& branch,
                                               const std::vector<double>& kappas,
                                               const std::vector<double>& noise_levels, const EvolveConfig& cfg,
                                               const Diagram* diagram = nullptr, std::size_t workers = 1);

}  // namespace nlfp
