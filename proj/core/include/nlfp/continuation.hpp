#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nlfp/grid.hpp"
#include "nlfp/models.hpp"
#include "nlfp/solver.hpp"

namespace nlfp {

// Initial guesses.

/// f_{k,b}(x) = 1/L + b cos(2 pi k x / L) for every listed k.
struct CosineFamily {
  double b = 0.5;
  std::vector<double> ks;
};

/// u(x; z) = 1/L + amplitude cos((1 + 0.1 z) x) for integer z in [z_min, z_max].
struct LegacySweep {
  int z_min = 0;
  int z_max = 90;
  double amplitude = 0.5;
};

struct GuessSuite {
  std::variant<CosineFamily, LegacySweep> family;
  bool include_homogeneous = true;
};

Field cosine_guess(const GridSpec& grid, double k, double b);
Field legacy_guess(const GridSpec& grid, double z, double amplitude = 0.5);
/// exp(-x^2 / 2) on a 1D grid.
Field gaussian_guess(const GridSpec& grid);
std::vector<Field> make_guesses(const GuessSuite& suite, const GridSpec& grid);

// Shift equivalence.

/// min over circular shifts s of ||u - shift(v, s)||_inf on the independent
/// block of a periodic grid; with reflections, v(-x) is also tried.
double shift_distance(const Field& u, const Field& v, bool reflections = false);

/// shift_distance refined by a continuous offset of up to one spacing about the
/// best grid shift (periodic cubic spline of v). Translation invariance lets
/// Newton land on sub-grid shifts of one state; duplicate filtering uses this
/// distance so such copies are recognised. 2D falls back to shift_distance.
double aligned_shift_distance(const Field& u, const Field& v, bool reflections = false);

struct ContinuationConfig {
  NewtonConfig newton;
  /// ||u - u_inf||_inf at or below this is the homogeneous state.
  double homogeneity_tol = 1e-4;
  /// States within this shift distance are the same state.
  double dedup_tol = 1e-4;
  bool quotient_reflections = true;
  std::size_t workers = 1;
  /// A step is a jump to another branch if it changes the profile by more than
  /// jump_fraction of the amplitude and jump_ratio times the previous change.
  double jump_fraction = 0.25;
  double jump_ratio = 20.0;
};

/// McKean-Vlasov maps over kappa sharing one kernel transform.
class KappaFamily {
 public:
  explicit KappaFamily(const MVParams& base);

  std::shared_ptr<const McKeanVlasovMap> at(double kappa) const;
  const GridSpec& grid() const { return base_->grid(); }
  double sigma() const { return base_->sigma(); }
  Field homogeneous_state() const { return homogeneous(grid()); }

 private:
  std::shared_ptr<McKeanVlasovMap> base_;
};

/// Distinct converged states from every guess at one kappa.
struct SweepResult {
  std::vector<Field> states;
  std::size_t attempted = 0;
  std::size_t failed = 0;
};

SweepResult sweep_guesses(const KappaFamily& family, double kappa, const std::vector<Field>& guesses,
                          const ContinuationConfig& cfg);

/// Removes shift-equivalent duplicates, keeping the first occurrence.
std::vector<Field> dedup_states(const std::vector<Field>& states, double tol, bool reflections);

struct BranchRecord {
  double kappa = 0.0;
  Field profile;
  double l2_distance = 0.0;    // weighted ||u - u_inf||_2
  double linf_distance = 0.0;  // ||u - u_inf||_inf
  double fixed_point_residual = 0.0;
  double steady_state_residual = 0.0;
  std::size_t newton_iterations = 0;
};

struct Branch {
  int id = 0;
  std::vector<BranchRecord> records;  // ascending in kappa
  std::string end_low;                // why tracing stopped going down
  std::string end_high;               // why tracing stopped going up

  double amplitude() const;
  bool homogeneous(double tol) const;
  /// kappa of the smallest-amplitude record.
  double onset() const;
  const BranchRecord* at(double kappa, double tol = 1e-12) const;
  /// Largest-kappa record unless the branch folds, in which case the record
  /// of largest amplitude.
  const BranchRecord& snapshot() const;
};

/// Uniform kappa grid: kappa_min + j (kappa_max - kappa_min) / (samples - 1).
struct KappaGrid {
  double kappa_min = 0.0;
  double kappa_max = 1.0;
  std::size_t samples = 2001;

  double at(std::size_t j) const;
  double step() const;
  std::size_t nearest(double kappa) const;
};

/// Natural continuation in both directions from a state converged at
/// kappas.at(seed_index).
Branch trace_branch(const KappaFamily& family, std::size_t seed_index, const Field& seed,
                    const KappaGrid& kappas, const ContinuationConfig& cfg);

enum class Seeding { endpoint, multi_kappa };

struct DiagramConfig {
  KappaGrid kappas;
  GuessSuite suite;
  Seeding seeding = Seeding::endpoint;
  /// Seed kappas for multi-kappa seeding; empty means five evenly spaced values.
  std::vector<double> seed_kappas;
  /// After tracing, restart on the far sheet of every fold. Near a fold
  /// kappa - kappa_f ~ s^2, so the partner of a record at s is extrapolated as
  /// u(-s) ~ u(s) - 2 s u'(s) from two records on the traced sheet.
  bool fold_reseeding = true;
  std::size_t fold_rounds = 1;
  ContinuationConfig continuation;
};

/// Pairs of branches whose closest approach lies between the dedup threshold
/// and ten times it.
struct NearPair {
  int a = 0;
  int b = 0;
  double kappa = 0.0;
  double distance = 0.0;
};

struct Diagram {
  std::vector<Branch> branches;  // ordered by max ||u - u_inf||_inf, descending
  KappaGrid kappas;
  double dedup_tol = 0.0;
  std::vector<NearPair> near_pairs;
  std::size_t failed_guesses = 0;
};

Diagram build_diagram(const KappaFamily& family, const DiagramConfig& cfg);

/// Amplitude of mode k: sqrt(c_k^2 + s_k^2) of u - u_inf against the
/// orthonormal cosine and sine bases.
double mode_amplitude(const Field& u, int k);
/// argmax over 1 <= k <= k_max of mode_amplitude.
int dominant_mode(const Field& u, int k_max);

/// Bisection on "Newton from guess converges to an inhomogeneous state".
double find_critical_kappa(const KappaFamily& family, double kappa_lo, double kappa_hi, const Field& guess,
                           double tol_kappa, const ContinuationConfig& cfg);

struct BasinScan {
  std::vector<double> ks;
  std::vector<double> bs;
  /// labels[i * bs.size() + j] for (ks[i], bs[j]); -1 marks non-convergence.
  std::vector<int> labels;
  /// Catalogue extended with any unmatched states; new labels index past the input.
  std::vector<Field> catalogue;
  std::size_t input_catalogue_size = 0;
};

BasinScan basin_scan(const KappaFamily& family, double kappa, const std::vector<double>& ks,
                     const std::vector<double>& bs, const std::vector<Field>& catalogue,
                     const ContinuationConfig& cfg);

// Cucker-Smale (alpha, sigma) region.

struct CSRegionConfig {
  std::vector<double> alphas;
  double sigma_lo = 0.05;
  double sigma_hi = 1.5;
  double X = 8.0;
  std::size_t quadrature_points = 8001;
  double ubar_max = 3.0;
  std::size_t scan_points = 400;
  double sigma_tol = 1e-6;
  /// Boundary samples with alpha <= fit_alpha_max enter the power-law fit.
  double fit_alpha_max = 0.5;
  /// Limit of sigma_c as alpha -> 0; the fit is log(sigma_c - limit) on log alpha.
  double fit_limit = 1.0 / 3.0;
  std::size_t workers = 1;
};

/// True if a nonzero mean-velocity root exists: either the zero root is
/// unstable (g'(0) > 0) or g changes sign on (0, ubar_max].
bool cs_has_nonzero_velocity(double alpha, double sigma, const CSRegionConfig& cfg);

struct CSRegion {
  std::vector<double> alphas;
  std::vector<double> sigma_c;
  double exponent = 0.0;
  double prefactor = 0.0;
  std::size_t fit_points = 0;
};

CSRegion cs_region_scan(const CSRegionConfig& cfg);

}  // namespace nlfp
