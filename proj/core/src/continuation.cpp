#include "nlfp/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlfp/error.hpp"
#include "nlfp/parallel.hpp"
#include "nlfp/reference.hpp"
#include "nlfp/spline.hpp"

namespace nlfp {

namespace {

double deviation(const Field& u) {
  const double c = 1.0 / u.grid.volume();
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v - c));
  return m;
}

double deviation_l2(const Field& u) {
  Field d = u;
  const double c = 1.0 / u.grid.volume();
  for (double& v : d.values) v -= c;
  return norm(d, NormKind::l2, true);
}

double shift_distance_1d(const Field& u, const std::vector<double>& v, std::size_t m, double best) {
  for (std::size_t s = 0; s < m; ++s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m && worst < best; ++i)
      worst = std::max(worst, std::abs(u[i] - v[(i + s) % m]));
    best = std::min(best, worst);
  }
  return best;
}

double shift_distance_2d(const Field& u, const std::vector<double>& v, std::size_t m0, std::size_t m1,
                         std::size_t ny, double best) {
  for (std::size_t s0 = 0; s0 < m0; ++s0)
    for (std::size_t s1 = 0; s1 < m1; ++s1) {
      double worst = 0.0;
      for (std::size_t i = 0; i < m0 && worst < best; ++i) {
        const std::size_t vi = ((i + s0) % m0) * ny;
        for (std::size_t j = 0; j < m1; ++j)
          worst = std::max(worst, std::abs(u.values[i * ny + j] - v[vi + (j + s1) % m1]));
      }
      best = std::min(best, worst);
    }
  return best;
}

// Best grid shift of v against u, then a continuous offset within one spacing
// either side on the periodic cubic spline of v (golden-section on the linf gap).
double aligned_distance_1d(const Field& u, const std::vector<double>& v, std::size_t m, double dx) {
  double grid_best = std::numeric_limits<double>::infinity();
  std::size_t shift = 0;
  for (std::size_t s = 0; s < m; ++s) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m && worst < grid_best; ++i) worst = std::max(worst, std::abs(u[i] - v[(i + s) % m]));
    if (worst < grid_best) {
      grid_best = worst;
      shift = s;
    }
  }
  std::vector<double> y(v.begin(), v.end());
  y.push_back(v.front());
  const CubicSpline spline(0.0, dx, std::move(y), true);
  auto gap = [&](double tau) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      worst = std::max(worst, std::abs(u[i] - spline(static_cast<double>(i + shift) * dx + tau)));
    return worst;
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -dx, b = dx;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = gap(c), fd = gap(d);
  for (int it = 0; it < 48; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = gap(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = gap(d);
    }
  }
  return std::min({grid_best, fc, fd});
}

BranchRecord make_record(const McKeanVlasovMap& map, double kappa, const NewtonResult& r) {
  BranchRecord rec;
  rec.kappa = kappa;
  rec.profile = r.solution;
  rec.linf_distance = deviation(r.solution);
  rec.l2_distance = deviation_l2(r.solution);
  rec.fixed_point_residual = r.final_residual;
  rec.steady_state_residual = map.steady_state_residual(r.solution);
  rec.newton_iterations = r.iterations;
  return rec;
}

bool same_state(const Field& a, const Field& b, double tol, bool reflections) {
  if (std::abs(deviation(a) - deviation(b)) > tol) return false;
  return aligned_shift_distance(a, b, reflections) <= tol;
}

}  // namespace

// Guesses

Field cosine_guess(const GridSpec& grid, double k, double b) {
  require(grid.dim() == 1, "cosine_guess: needs a 1D grid");
  const Axis& a = grid.axis(0);
  Field f(grid);
  for (std::size_t i = 0; i < a.n; ++i)
    f[i] = 1.0 / a.length() + b * std::cos(2.0 * std::numbers::pi * k * a.coord(i) / a.length());
  return f;
}

Field legacy_guess(const GridSpec& grid, double z, double amplitude) {
  require(grid.dim() == 1, "legacy_guess: needs a 1D grid");
  const Axis& a = grid.axis(0);
  Field f(grid);
  for (std::size_t i = 0; i < a.n; ++i) f[i] = 1.0 / a.length() + amplitude * std::cos((1.0 + 0.1 * z) * a.coord(i));
  return f;
}

Field gaussian_guess(const GridSpec& grid) {
  require(grid.dim() == 1, "gaussian_guess: needs a 1D grid");
  const Axis& a = grid.axis(0);
  Field f(grid);
  for (std::size_t i = 0; i < a.n; ++i) {
    const double x = a.coord(i);
    f[i] = std::exp(-x * x / 2.0);
  }
  return f;
}

std::vector<Field> make_guesses(const GuessSuite& suite, const GridSpec& grid) {
  std::vector<Field> out;
  if (const auto* c = std::get_if<CosineFamily>(&suite.family)) {
    for (double k : c->ks) out.push_back(cosine_guess(grid, k, c->b));
  } else {
    const auto& l = std::get<LegacySweep>(suite.family);
    for (int z = l.z_min; z <= l.z_max; ++z) out.push_back(legacy_guess(grid, z, l.amplitude));
  }
  if (suite.include_homogeneous) out.push_back(homogeneous(grid));
  return out;
}

// Shift equivalence

double shift_distance(const Field& u, const Field& v, bool reflections) {
  require(u.grid == v.grid, "shift_distance: grid mismatch");
  const GridSpec& g = u.grid;
  for (std::size_t d = 0; d < g.dim(); ++d)
    require(g.axis(d).periodic(), "shift_distance: needs periodic axes");
  const double inf = std::numeric_limits<double>::infinity();
  if (g.dim() == 1) {
    const std::size_t m = g.axis(0).n - 1;
    std::vector<double> vv(v.values.begin(), v.values.begin() + static_cast<std::ptrdiff_t>(m));
    double best = shift_distance_1d(u, vv, m, inf);
    if (reflections) {
      std::vector<double> r(m);
      for (std::size_t i = 0; i < m; ++i) r[i] = vv[(m - i) % m];
      best = shift_distance_1d(u, r, m, best);
    }
    return best;
  }
  const std::size_t m0 = g.axis(0).n - 1, m1 = g.axis(1).n - 1, ny = g.axis(1).n;
  double best = shift_distance_2d(u, v.values, m0, m1, ny, inf);
  if (reflections) {
    std::vector<double> r(v.values.size());
    for (std::size_t i = 0; i < m0; ++i)
      for (std::size_t j = 0; j < m1; ++j) r[i * ny + j] = v.values[((m0 - i) % m0) * ny + (m1 - j) % m1];
    best = shift_distance_2d(u, r, m0, m1, ny, best);
  }
  return best;
}

double aligned_shift_distance(const Field& u, const Field& v, bool reflections) {
  const GridSpec& g = u.grid;
  if (g.dim() != 1) return shift_distance(u, v, reflections);
  require(u.grid == v.grid && g.axis(0).periodic(), "aligned_shift_distance: needs matching periodic grids");
  const std::size_t m = g.axis(0).n - 1;
  const double dx = g.axis(0).spacing();
  std::vector<double> vv(v.values.begin(), v.values.begin() + static_cast<std::ptrdiff_t>(m));
  double best = aligned_distance_1d(u, vv, m, dx);
  if (reflections) {
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = vv[(m - i) % m];
    best = std::min(best, aligned_distance_1d(u, r, m, dx));
  }
  return best;
}

// Families and sweeps

KappaFamily::KappaFamily(const MVParams& base) : base_(std::make_shared<McKeanVlasovMap>(base)) {
  require(base.grid.dim() == 1, "KappaFamily: continuation is one-dimensional");
}

std::shared_ptr<const McKeanVlasovMap> KappaFamily::at(double kappa) const { return base_->with_kappa(kappa); }

std::vector<Field> dedup_states(const std::vector<Field>& states, double tol, bool reflections) {
  std::vector<Field> out;
  for (const Field& s : states) {
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Field& o) { return same_state(s, o, tol, reflections); });
    if (!dup) out.push_back(s);
  }
  return out;
}

SweepResult sweep_guesses(const KappaFamily& family, double kappa, const std::vector<Field>& guesses,
                          const ContinuationConfig& cfg) {
  const auto map = family.at(kappa);
  std::vector<NewtonResult> results(guesses.size());
  parallel_for(guesses.size(), cfg.workers,
               [&](std::size_t i) { results[i] = newton_solve(*map, guesses[i], cfg.newton); });
  SweepResult out;
  out.attempted = guesses.size();
  std::vector<Field> converged;
  for (const auto& r : results) {
    if (r.converged)
      converged.push_back(r.solution);
    else
      ++out.failed;
  }
  out.states = dedup_states(converged, cfg.dedup_tol, cfg.quotient_reflections);
  return out;
}

// Branches

double Branch::amplitude() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.linf_distance);
  return m;
}

bool Branch::homogeneous(double tol) const { return amplitude() <= tol; }

double Branch::onset() const {
  require(!records.empty(), "branch has no records");
  auto it = std::min_element(records.begin(), records.end(), [](const BranchRecord& a, const BranchRecord& b) {
    return a.linf_distance < b.linf_distance;
  });
  return it->kappa;
}

const BranchRecord* Branch::at(double kappa, double tol) const {
  auto it = std::lower_bound(records.begin(), records.end(), kappa - tol,
                             [](const BranchRecord& r, double k) { return r.kappa < k; });
  if (it != records.end() && std::abs(it->kappa - kappa) <= tol) return &*it;
  return nullptr;
}

const BranchRecord& Branch::snapshot() const {
  require(!records.empty(), "branch has no records");
  if (end_high != "fold") return records.back();
  return *std::max_element(records.begin(), records.end(), [](const BranchRecord& a, const BranchRecord& b) {
    return a.linf_distance < b.linf_distance;
  });
}

double KappaGrid::at(std::size_t j) const {
  if (j + 1 == samples) return kappa_max;
  return kappa_min + static_cast<double>(j) * step();
}

double KappaGrid::step() const {
  require(samples >= 2 && kappa_max > kappa_min, "kappa grid: need at least 2 samples and max > min");
  return (kappa_max - kappa_min) / static_cast<double>(samples - 1);
}

std::size_t KappaGrid::nearest(double kappa) const {
  const double j = std::round((kappa - kappa_min) / step());
  return static_cast<std::size_t>(std::clamp(j, 0.0, static_cast<double>(samples - 1)));
}

Branch trace_branch(const KappaFamily& family, std::size_t seed_index, const Field& seed, const KappaGrid& kappas,
                    const ContinuationConfig& cfg) {
  require(seed_index < kappas.samples, "trace_branch: seed index outside the kappa grid");
  Branch br;
  const double k0 = kappas.at(seed_index);
  const auto map0 = family.at(k0);
  const NewtonResult r0 = newton_solve(*map0, seed, cfg.newton);
  require(r0.converged, "trace_branch: seed does not converge at kappa = " + std::to_string(k0));
  const BranchRecord seed_rec = make_record(*map0, k0, r0);
  const bool homogeneous_seed = seed_rec.linf_distance <= cfg.homogeneity_tol;

  std::vector<BranchRecord> down, up;
  for (int dir : {-1, +1}) {
    auto& out = dir < 0 ? down : up;
    std::string& end = dir < 0 ? br.end_low : br.end_high;
    end = "range";
    Field prev = seed_rec.profile;
    double prev_amp = seed_rec.linf_distance;
    double prev_change = 0.0;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(seed_index) + dir;
         j >= 0 && j < static_cast<std::ptrdiff_t>(kappas.samples); j += dir) {
      const double kappa = kappas.at(static_cast<std::size_t>(j));
      const auto map = family.at(kappa);
      const NewtonResult r = newton_solve(*map, prev, cfg.newton);
      if (!r.converged) {
        end = "fold";
        break;
      }
      const double amp = deviation(r.solution);
      if (!homogeneous_seed && amp <= cfg.homogeneity_tol) {
        end = "homogeneous";
        break;
      }
      const double change = distance(r.solution, prev, NormKind::linf);
      if (!homogeneous_seed && prev_change > 0.0 && change > cfg.jump_fraction * prev_amp &&
          change > cfg.jump_ratio * prev_change) {
        end = "fold";
        break;
      }
      out.push_back(make_record(*map, kappa, r));
      prev = r.solution;
      prev_amp = amp;
      prev_change = change;
    }
  }
  std::reverse(down.begin(), down.end());
  br.records = std::move(down);
  br.records.push_back(seed_rec);
  br.records.insert(br.records.end(), std::make_move_iterator(up.begin()), std::make_move_iterator(up.end()));
  return br;
}

namespace {

// Shift- and reflection-invariant moduli of the first modes of u - u_inf,
// scaled so that for any circular shift S the discrete Parseval identity gives
// ||u - S v||_inf >= sqrt(sum_k (a_k(u) - a_k(v))^2 / L).
constexpr int kSignatureModes = 16;

std::vector<double> signature(const Field& u) {
  const Axis& ax = u.grid.axis(0);
  const std::size_t m = ax.n - 1;
  const double dx = ax.spacing();
  std::vector<double> out(kSignatureModes, 0.0);
  for (int k = 1; k <= kSignatureModes && static_cast<std::size_t>(2 * k) < m; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(i) / static_cast<double>(m);
      re += u[i] * std::cos(t);
      im += u[i] * std::sin(t);
    }
    out[static_cast<std::size_t>(k - 1)] = std::sqrt(2.0 * dx / static_cast<double>(m)) * std::hypot(re, im);
  }
  return out;
}

std::vector<std::vector<double>> signatures(const Branch& b) {
  std::vector<std::vector<double>> out;
  out.reserve(b.records.size());
  for (const auto& r : b.records) out.push_back(signature(r.profile));
  return out;
}

double signature_bound(const std::vector<double>& a, const std::vector<double>& b, double length) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc / length);
}

// Smallest aligned distance between two branches over common kappa values.
// Records are skipped when a shift-invariant lower bound already exceeds
// `limit`; the spectral bound is halved to absorb the sub-grid refinement.
std::pair<double, double> closest_approach(const Branch& a, const Branch& b, const std::vector<std::vector<double>>& sa,
                                           const std::vector<std::vector<double>>& sb, double limit,
                                           bool reflections, double stop_below) {
  double best = std::numeric_limits<double>::infinity();
  double where = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    while (j < b.records.size() && b.records[j].kappa < ra.kappa - 1e-12) ++j;
    if (j == b.records.size()) break;
    const auto& rb = b.records[j];
    if (std::abs(rb.kappa - ra.kappa) > 1e-12) continue;
    if (std::abs(ra.linf_distance - rb.linf_distance) > limit) continue;
    if (0.5 * signature_bound(sa[i], sb[j], ra.profile.grid.volume()) > limit) continue;
    const double d = aligned_shift_distance(ra.profile, rb.profile, reflections);
    if (d < best) {
      best = d;
      where = ra.kappa;
      if (best <= stop_below) break;
    }
  }
  return {best, where};
}

void merge_into(Branch& a, Branch&& b) {
  std::vector<BranchRecord> merged;
  merged.reserve(a.records.size() + b.records.size());
  std::size_t i = 0, j = 0;
  while (i < a.records.size() || j < b.records.size()) {
    if (j == b.records.size() || (i < a.records.size() && a.records[i].kappa < b.records[j].kappa - 1e-12)) {
      merged.push_back(std::move(a.records[i++]));
    } else if (i == a.records.size() || b.records[j].kappa < a.records[i].kappa - 1e-12) {
      merged.push_back(std::move(b.records[j++]));
    } else {
      merged.push_back(std::move(a.records[i++]));
      ++j;
    }
  }
  if (!b.records.empty() && (a.records.empty() || b.records.front().kappa < a.records.front().kappa))
    a.end_low = b.end_low;
  if (!b.records.empty() && (a.records.empty() || b.records.back().kappa > a.records.back().kappa))
    a.end_high = b.end_high;
  a.records = std::move(merged);
}

bool on_branch(const Branch& br, double kappa, const Field& u, double tol, bool reflections) {
  const BranchRecord* r = br.at(kappa, 1e-9);
  return r && same_state(r->profile, u, tol, reflections);
}

// Extrapolated guesses for the far sheet at every fold end of `br`, paired
// with the kappa-grid index at which to solve. The fold is placed one kappa
// step beyond the last record.
std::vector<std::pair<std::size_t, Field>> fold_partners(const Branch& br, const KappaGrid& kg) {
  std::vector<std::pair<std::size_t, Field>> out;
  const std::size_t n = br.records.size();
  for (int side : {-1, +1}) {
    if ((side < 0 ? br.end_low : br.end_high) != "fold") continue;
    const double kappa_f = (side < 0 ? br.records.front().kappa : br.records.back().kappa) + side * kg.step();
    for (auto [i1, i2] : {std::pair<std::size_t, std::size_t>{0, 3}, {3, 15}, {15, 63}}) {
      if (i2 >= n) break;
      const BranchRecord& r1 = side < 0 ? br.records[i1] : br.records[n - 1 - i1];
      const BranchRecord& r2 = side < 0 ? br.records[i2] : br.records[n - 1 - i2];
      const double s1 = std::sqrt(std::abs(r1.kappa - kappa_f));
      const double s2 = std::sqrt(std::abs(r2.kappa - kappa_f));
      const double c = 2.0 * s1 / (s2 - s1);
      Field g = r1.profile;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= c * (r2.profile[i] - r1.profile[i]);
      out.emplace_back(kg.nearest(r1.kappa), std::move(g));
    }
  }
  return out;
}

}  // namespace

Diagram build_diagram(const KappaFamily& family, const DiagramConfig& cfg) {
  const ContinuationConfig& cc = cfg.continuation;
  const KappaGrid& kg = cfg.kappas;
  Diagram dg;
  dg.kappas = kg;
  dg.dedup_tol = cc.dedup_tol;

  std::vector<std::size_t> seeds;
  if (cfg.seeding == Seeding::endpoint) {
    seeds.push_back(kg.samples - 1);
  } else if (!cfg.seed_kappas.empty()) {
    for (double k : cfg.seed_kappas) seeds.push_back(kg.nearest(k));
  } else {
    for (int i = 4; i >= 0; --i) seeds.push_back(kg.nearest(kg.kappa_min + (kg.kappa_max - kg.kappa_min) * (i + 1) / 5.0));
  }

  const std::vector<Field> guesses = make_guesses(cfg.suite, family.grid());
  std::vector<Branch> branches;
  for (std::size_t seed : seeds) {
    const double kappa = kg.at(seed);
    SweepResult sw = sweep_guesses(family, kappa, guesses, cc);
    dg.failed_guesses += sw.failed;
    std::vector<Field> fresh;
    for (Field& s : sw.states) {
      const bool known = std::any_of(branches.begin(), branches.end(), [&](const Branch& b) {
        return on_branch(b, kappa, s, cc.dedup_tol, cc.quotient_reflections);
      });
      if (!known) fresh.push_back(std::move(s));
    }
    std::vector<Branch> traced(fresh.size());
    parallel_for(fresh.size(), cc.workers,
                 [&](std::size_t i) { traced[i] = trace_branch(family, seed, fresh[i], kg, cc); });
    for (auto& b : traced) branches.push_back(std::move(b));
  }

  // Far sheets of folds. Each round only revisits branches traced in the last one.
  std::size_t fresh_from = 0;
  for (std::size_t round = 0; cfg.fold_reseeding && round < cfg.fold_rounds; ++round) {
    const std::size_t fresh_to = branches.size();
    std::vector<std::pair<std::size_t, Field>> candidates;
    for (std::size_t b = fresh_from; b < fresh_to; ++b) {
      for (const auto& [idx, guess] : fold_partners(branches[b], kg)) {
        const NewtonResult r = newton_solve(*family.at(kg.at(idx)), guess, cc.newton);
        if (!r.converged || deviation(r.solution) <= cc.homogeneity_tol) continue;
        candidates.emplace_back(idx, r.solution);
      }
    }
    std::vector<std::pair<std::size_t, Field>> fresh;
    for (auto& [idx, s] : candidates) {
      const double kappa = kg.at(idx);
      const auto known = [&](const Branch& b) { return on_branch(b, kappa, s, cc.dedup_tol, cc.quotient_reflections); };
      if (std::any_of(branches.begin(), branches.end(), known)) continue;
      const bool repeated = std::any_of(fresh.begin(), fresh.end(), [&](const auto& f) {
        return f.first == idx && same_state(f.second, s, cc.dedup_tol, cc.quotient_reflections);
      });
      if (!repeated) fresh.emplace_back(idx, std::move(s));
    }
    if (fresh.empty()) break;
    std::vector<Branch> traced(fresh.size());
    parallel_for(fresh.size(), cc.workers, [&](std::size_t i) {
      traced[i] = trace_branch(family, fresh[i].first, fresh[i].second, kg, cc);
    });
    for (auto& b : traced) branches.push_back(std::move(b));
    fresh_from = fresh_to;
  }

  // Global merge of shift-equivalent branches, repeated until no pair merges.
  std::vector<std::vector<std::vector<double>>> sig(branches.size());
  parallel_for(branches.size(), cc.workers, [&](std::size_t i) { sig[i] = signatures(branches[i]); });
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      for (std::size_t j = i + 1; j < branches.size();) {
        const auto [d, k] = closest_approach(branches[i], branches[j], sig[i], sig[j], cc.dedup_tol,
                                             cc.quotient_reflections, cc.dedup_tol);
        if (d <= cc.dedup_tol) {
          merge_into(branches[i], std::move(branches[j]));
          branches.erase(branches.begin() + static_cast<std::ptrdiff_t>(j));
          sig.erase(sig.begin() + static_cast<std::ptrdiff_t>(j));
          sig[i] = signatures(branches[i]);
          merged = true;
        } else {
          ++j;
        }
      }
    }
  }

  std::vector<std::size_t> order(branches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return branches[a].amplitude() > branches[b].amplitude();
  });
  {
    std::vector<Branch> sorted;
    std::vector<std::vector<std::vector<double>>> sorted_sig;
    for (std::size_t i : order) {
      sorted.push_back(std::move(branches[i]));
      sorted_sig.push_back(std::move(sig[i]));
    }
    branches = std::move(sorted);
    sig = std::move(sorted_sig);
  }
  for (std::size_t i = 0; i < branches.size(); ++i) branches[i].id = static_cast<int>(i + 1);

  const double limit = 10.0 * cc.dedup_tol;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < branches.size(); ++i)
    for (std::size_t j = i + 1; j < branches.size(); ++j) pairs.emplace_back(i, j);
  std::vector<std::pair<double, double>> approach(pairs.size());
  parallel_for(pairs.size(), cc.workers, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    approach[p] = closest_approach(branches[i], branches[j], sig[i], sig[j], limit, cc.quotient_reflections, 0.0);
  });
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (approach[p].first <= limit)
      dg.near_pairs.push_back({branches[pairs[p].first].id, branches[pairs[p].second].id, approach[p].second,
                               approach[p].first});
  dg.branches = std::move(branches);
  return dg;
}

// Modes

double mode_amplitude(const Field& u, int k) {
  require(u.grid.dim() == 1, "mode_amplitude: needs a 1D field");
  const Axis& a = u.grid.axis(0);
  const double c0 = 1.0 / a.length();
  const double scale = std::sqrt(2.0 / a.length());
  Field fc(u.grid), fs(u.grid);
  for (std::size_t i = 0; i < a.n; ++i) {
    const double t = 2.0 * std::numbers::pi * k * a.coord(i) / a.length();
    fc[i] = (u[i] - c0) * scale * std::cos(t);
    fs[i] = (u[i] - c0) * scale * std::sin(t);
  }
  return std::hypot(integrate(fc), integrate(fs));
}

int dominant_mode(const Field& u, int k_max) {
  int best = 1;
  double amp = -1.0;
  for (int k = 1; k <= k_max; ++k) {
    const double m = mode_amplitude(u, k);
    if (m > amp) {
      amp = m;
      best = k;
    }
  }
  return best;
}

// Critical threshold

double find_critical_kappa(const KappaFamily& family, double kappa_lo, double kappa_hi, const Field& guess,
                           double tol_kappa, const ContinuationConfig& cfg) {
  require(kappa_hi > kappa_lo && tol_kappa > 0.0, "find_critical_kappa: invalid bracket");
  // Classified by the final iterate: near the threshold the approach to the
  // homogeneous state is only linear, so the iteration budget may run out first.
  auto measure = [&](double kappa) {
    const NewtonResult r = newton_solve(*family.at(kappa), guess, cfg.newton);
    return r.failure.empty() ? deviation(r.solution) : 0.0;
  };
  const double amp_lo = measure(kappa_lo), amp_hi = measure(kappa_hi);
  if (amp_lo > cfg.homogeneity_tol || amp_hi <= cfg.homogeneity_tol) {
    std::ostringstream os;
    os << "find_critical_kappa: bracket does not straddle the threshold (||u - u_inf||_inf = " << amp_lo
       << " at kappa = " << kappa_lo << ", " << amp_hi << " at kappa = " << kappa_hi << ")";
    throw Error(os.str());
  }
  double lo = kappa_lo, hi = kappa_hi;
  while (hi - lo > tol_kappa) {
    const double mid = 0.5 * (lo + hi);
    (measure(mid) > cfg.homogeneity_tol ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Basins

BasinScan basin_scan(const KappaFamily& family, double kappa, const std::vector<double>& ks,
                     const std::vector<double>& bs, const std::vector<Field>& catalogue,
                     const ContinuationConfig& cfg) {
  BasinScan out;
  out.ks = ks;
  out.bs = bs;
  out.catalogue = catalogue;
  out.input_catalogue_size = catalogue.size();
  const auto map = family.at(kappa);
  const std::size_t total = ks.size() * bs.size();
  std::vector<NewtonResult> results(total);
  parallel_for(total, cfg.workers, [&](std::size_t idx) {
    const double k = ks[idx / bs.size()], b = bs[idx % bs.size()];
    results[idx] = newton_solve(*map, cosine_guess(family.grid(), k, b), cfg.newton);
  });
  out.labels.assign(total, -1);
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (!results[idx].converged) continue;
    const Field& u = results[idx].solution;
    int label = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < out.catalogue.size(); ++c) {
      if (std::abs(deviation(u) - deviation(out.catalogue[c])) > cfg.dedup_tol) continue;
      const double d = aligned_shift_distance(u, out.catalogue[c], cfg.quotient_reflections);
      if (d < best) {
        best = d;
        label = static_cast<int>(c);
      }
    }
    if (label < 0 || best > cfg.dedup_tol) {
      out.catalogue.push_back(u);
      label = static_cast<int>(out.catalogue.size() - 1);
    }
    out.labels[idx] = label;
  }
  return out;
}

// Cucker-Smale region

bool cs_has_nonzero_velocity(double alpha, double sigma, const CSRegionConfig& cfg) {
  const std::size_t n = cfg.quadrature_points;
  require(n >= 3 && n % 2 == 1, "cs region: quadrature needs an odd point count");
  const double h = 2.0 * cfg.X / static_cast<double>(n - 1);
  // g'(0) = <x^2>_0 / sigma - 1 for the symmetric profile.
  double z = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -cfg.X + static_cast<double>(i) * h;
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double x2 = x * x;
    const double e = std::exp(-(alpha * x2 * x2 / 4.0 + (1.0 - alpha) * x2 / 2.0) / sigma);
    z += w * e;
    m2 += w * x2 * e;
  }
  if (m2 / z / sigma - 1.0 > 0.0) return true;
  const double du = cfg.ubar_max / static_cast<double>(cfg.scan_points);
  double prev = cs_velocity_equation(alpha, sigma, cfg.X, du, n);
  for (std::size_t s = 2; s <= cfg.scan_points; ++s) {
    const double g = cs_velocity_equation(alpha, sigma, cfg.X, du * static_cast<double>(s), n);
    if ((g > 0.0) != (prev > 0.0)) return true;
    prev = g;
  }
  return false;
}

CSRegion cs_region_scan(const CSRegionConfig& cfg) {
  CSRegion out;
  out.alphas = cfg.alphas;
  out.sigma_c.assign(cfg.alphas.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(cfg.alphas.size(), cfg.workers, [&](std::size_t i) {
    const double a = cfg.alphas[i];
    double lo = cfg.sigma_lo, hi = cfg.sigma_hi;
    if (!cs_has_nonzero_velocity(a, lo, cfg) || cs_has_nonzero_velocity(a, hi, cfg)) return;
    while (hi - lo > cfg.sigma_tol) {
      const double mid = 0.5 * (lo + hi);
      (cs_has_nonzero_velocity(a, mid, cfg) ? lo : hi) = mid;
    }
    out.sigma_c[i] = 0.5 * (lo + hi);
  });
  // Least squares of log(sigma_c - limit) on log(alpha).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < out.alphas.size(); ++i) {
    const double a = out.alphas[i], s = out.sigma_c[i];
    if (!(a > 0.0) || a > cfg.fit_alpha_max || !std::isfinite(s) || s <= cfg.fit_limit) continue;
    const double lx = std::log(a), ly = std::log(s - cfg.fit_limit);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  out.fit_points = n;
  if (n >= 2) {
    const double dn = static_cast<double>(n);
    const double den = dn * sxx - sx * sx;
    if (den != 0.0) {
      out.exponent = (dn * sxy - sx * sy) / den;
      out.prefactor = std::exp((sy - out.exponent * sx) / dn);
    }
  }
  return out;
}

}  // namespace nlfp
