#include "nlfp/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nlfp/error.hpp"
#include "nlfp/parallel.hpp"
#include "nlfp/spline.hpp"

namespace nlfp {

namespace {

// Bernoulli function z / (e^z - 1).
double bernoulli(double z) {
  if (std::abs(z) < 1e-10) return 1.0 - 0.5 * z;
  return z / std::expm1(z);
}

double block_sum(const Field& u, std::size_t m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += u[i];
  return s;
}

double block_l2(const std::vector<double>& v) { return norm(v, NormKind::l2); }

double free_energy(const McKeanVlasovMap& map, const Field& u) {
  const Field c = map.interaction(u);
  Field e(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i)
    e[i] = map.sigma() * u[i] * std::log(std::max(u[i], 1e-300)) + 0.5 * map.kappa() * u[i] * c[i];
  return integrate(e);
}

}  // namespace

double relative_shift_l2(const Field& u, const Field& v) {
  require(u.grid == v.grid && u.grid.dim() == 1 && u.grid.axis(0).periodic(),
          "relative_shift_l2: needs matching 1D periodic fields");
  const std::size_t m = u.grid.axis(0).n - 1;
  double vn = 0.0;
  for (std::size_t i = 0; i < m; ++i) vn += v[i] * v[i];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < m; ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m && acc < best; ++i) {
      const double d = u[i] - v[(i + s) % m];
      acc += d * d;
    }
    best = std::min(best, acc);
  }
  return std::sqrt(best / vn);
}

Field perturb(const Field& u, double level, std::uint64_t seed) {
  require(u.grid.dim() == 1 && u.grid.axis(0).periodic(), "perturb: needs a 1D periodic field");
  const std::size_t m = u.grid.axis(0).n - 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> psi(m), base(u.values.begin(), u.values.begin() + static_cast<std::ptrdiff_t>(m));
  for (std::size_t i = 0; i < m; ++i) psi[i] = u[i] * normal(rng);
  double mean = 0.0;
  for (double p : psi) mean += p;
  mean /= static_cast<double>(m);
  for (double& p : psi) p -= mean;
  const double scale = level * block_l2(base) / block_l2(psi);
  Field out = u;
  for (std::size_t i = 0; i < m; ++i) out[i] = u[i] + scale * psi[i];
  enforce_periodicity(out);
  return out;
}

EvolveSummary evolve(const McKeanVlasovMap& map, const Field& u0, const EvolveConfig& cfg) {
  require(cfg.dt > 0.0 && cfg.t_final > 0.0, "evolve: dt and t_final must be positive");
  const GridSpec& grid = map.grid();
  require(u0.grid == grid && grid.dim() == 1, "evolve: initial state must be on the 1D problem grid");
  const std::size_t m = grid.axis(0).n - 1;
  const double dx = grid.axis(0).spacing();
  const double sigma = map.sigma();
  const double r = sigma * cfg.dt / (dx * dx);

  EvolveSummary out;
  Field u = u0;
  out.min_density = *std::min_element(u.values.begin(), u.values.end());
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
  std::vector<double> sub(m), diag(m), super(m), rhs(m), delta(m), flux(m);
  double prev_energy = free_energy(map, u);
  for (std::size_t n = 0; n < steps; ++n) {
    const double mass0 = block_sum(u, m);
    const Field c = map.interaction(u);
    for (std::size_t j = 0; j < m; ++j) delta[j] = map.kappa() * (c[(j + 1) % m] - c[j]) / sigma;
    // flux[j] is the scaled outflow through the face between cells j and j+1.
    for (std::size_t j = 0; j < m; ++j)
      flux[j] = r * (bernoulli(delta[j]) * u[j] - bernoulli(-delta[j]) * u[(j + 1) % m]);
    for (std::size_t j = 0; j < m; ++j) {
      const double right = delta[j];
      const double left = delta[(j + m - 1) % m];
      diag[j] = 1.0 + r * (bernoulli(right) + bernoulli(-left));
      super[j] = -r * bernoulli(-right);
      sub[j] = -r * bernoulli(left);
      rhs[j] = flux[(j + m - 1) % m] - flux[j];
    }
    // Increment form: A (u1 - u0) = u0 - A u0, whose right side telescopes to
    // zero mass, so roundoff scales with the increment instead of the state.
    solve_cyclic_tridiagonal(sub, diag, super, rhs);
    for (std::size_t j = 0; j < m; ++j) u[j] += rhs[j];
    enforce_periodicity(u);

    const double mass1 = block_sum(u, m);
    const double drift = std::abs(mass1 - mass0) / std::abs(mass0);
    out.max_mass_drift = std::max(out.max_mass_drift, drift);
    const double lowest = *std::min_element(u.values.begin(), u.values.end());
    out.min_density = std::min(out.min_density, lowest);
    require(lowest >= -1e-12, "evolve: density became negative at step " + std::to_string(n + 1));
    require(drift <= 1e-10, "evolve: mass drift exceeded 1e-10 at step " + std::to_string(n + 1));

    double d2 = 0.0, n2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      d2 += (u[j] - u0[j]) * (u[j] - u0[j]);
      n2 += u0[j] * u0[j];
    }
    out.distance.push_back(std::sqrt(d2 / n2));
    const double e = free_energy(map, u);
    if (e > prev_energy + 1e-12 * std::max(1.0, std::abs(prev_energy))) ++out.energy_increases;
    out.energy.push_back(e);
    prev_energy = e;
  }
  out.steps = steps;
  out.final_state = std::move(u);
  return out;
}

std::vector<StabilityLabel> classify_stability(const KappaFamily& family, const Branch& branch,
                                               const std::vector<double>& kappas,
                                               const std::vector<double>& noise_levels, const EvolveConfig& cfg,
                                               const Diagram* diagram, std::size_t workers) {
  require(!branch.records.empty(), "classify_stability: branch has no records");
  // Nearest record per requested kappa.
  std::vector<const BranchRecord*> picks;
  for (double k : kappas) {
    const BranchRecord* best = &branch.records.front();
    for (const auto& rec : branch.records)
      if (std::abs(rec.kappa - k) < std::abs(best->kappa - k)) best = &rec;
    picks.push_back(best);
  }
  const std::size_t total = picks.size() * noise_levels.size();
  std::vector<StabilityLabel> out(total);
  parallel_for(total, workers, [&](std::size_t idx) {
    const BranchRecord& rec = *picks[idx / noise_levels.size()];
    const double level = noise_levels[idx % noise_levels.size()];
    EvolveConfig c = cfg;
    c.noise_level = level;
    const double threshold = c.departure_threshold > 0.0 ? c.departure_threshold : 10.0 * level;
    const auto map = family.at(rec.kappa);
    const Field start = perturb(rec.profile, level, cfg.seed + idx);
    const EvolveSummary s = evolve(*map, start, c);
    StabilityLabel lab;
    lab.kappa = rec.kappa;
    lab.noise_level = level;
    lab.final_distance = relative_shift_l2(s.final_state, rec.profile);
    lab.stable = lab.final_distance <= threshold;
    lab.max_mass_drift = s.max_mass_drift;
    lab.min_density = s.min_density;
    lab.energy_increases = s.energy_increases;
    if (diagram) {
      double best = std::numeric_limits<double>::infinity();
      for (const Branch& b : diagram->branches) {
        const BranchRecord* br = b.at(rec.kappa, 1e-9);
        if (!br) continue;
        const double d = aligned_shift_distance(s.final_state, br->profile, true);
        if (d < best) {
          best = d;
          lab.approached_branch = b.id;
        }
      }
    }
    out[idx] = lab;
  });
  return out;
}

}  // namespace nlfp
