#include "studies.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "nlfp/continuation.hpp"
#include "nlfp/error.hpp"
#include "nlfp/io.hpp"
#include "nlfp/kernels.hpp"
#include "nlfp/reference.hpp"
#include "nlfp/stability.hpp"

namespace nlfp::cli {

namespace fs = std::filesystem;

namespace {

// Shortest decimal that reads back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    require(cells.size() == width_, "csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }

  void write(const fs::path& path) const {
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), "cannot open " + path.string());
    f << text_;
  }

 private:
  std::size_t width_;
  std::string text_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "cannot open " + path.string());
  f << j.dump(2) << '\n';
}

double fixed_point_residual(const FixedPointMap& map, const Field& u) {
  return distance(map.apply(u), u, NormKind::linf);
}

/// Writes u next to `stem` (CSV in 1D, raw f64 plus sidecar in 2D) and returns
/// the record describing it. Paths in the record are relative to `root`.
json profile_record(const FixedPointMap& map, const Field& u, const fs::path& root, const fs::path& stem) {
  const fs::path rel = stem.string() + (u.grid.dim() == 1 ? ".csv" : ".f64");
  fs::create_directories((root / rel).parent_path());
  write_field(u, root / rel);
  return json{{"file", rel.generic_string()},
              {"fixed_point_residual", fixed_point_residual(map, u)},
              {"steady_state_residual", map.steady_state_residual(u)}};
}

json trace_json(const NewtonResult& r) {
  json trace = json::array();
  for (const NewtonStep& s : r.history)
    trace.push_back({{"iteration", s.iteration},
                     {"residual", s.residual},
                     {"step", s.step},
                     {"gmres_iterations", s.gmres_iterations},
                     {"gmres_residual", s.gmres_residual}});
  return trace;
}

const MV1D& require_mv1d(const RunConfig& cfg) {
  const auto* p = std::get_if<MV1D>(&cfg.problem);
  if (!p) throw ConfigError("problem.variant", "study '" + cfg.study + "' needs variant mv1d");
  return *p;
}

Field guess_or(const Reader& study, const ProblemSpec& problem, const json& fallback) {
  if (study.has("guess")) return parse_guess(study.child("guess"), problem);
  return parse_guess(Reader(fallback, study.key_path("guess")), problem);
}

// Keys shared by the studies that build a diagram.
#define NLFP_DIAGRAM_KEYS                                                                                   \
  "kappa_min", "kappa_max", "samples", "suite", "seeding", "seed_kappas", "fold_reseeding", "fold_rounds", \
      "homogeneity_tol", "dedup_tol", "quotient_reflections"

json write_diagram(const Diagram& d, const KappaFamily& family, const fs::path& root) {
  json branches = json::array();
  for (const Branch& b : d.branches) {
    const std::string name = "branch_" + std::to_string(b.id);
    Csv csv({"kappa", "l2_distance", "linf_distance", "fixed_point_residual", "steady_state_residual",
             "newton_iterations"});
    for (const BranchRecord& r : b.records)
      csv.row({num(r.kappa), num(r.l2_distance), num(r.linf_distance), num(r.fixed_point_residual),
               num(r.steady_state_residual), std::to_string(r.newton_iterations)});
    fs::create_directories(root / "branches");
    csv.write(root / "branches" / (name + ".csv"));
    const BranchRecord& snap = b.snapshot();
    json snapshot = profile_record(*family.at(snap.kappa), snap.profile, root, fs::path("branches") / (name + "_snapshot"));
    snapshot["kappa"] = snap.kappa;
    branches.push_back({{"id", b.id},
                        {"records", b.records.size()},
                        {"kappa_low", b.records.front().kappa},
                        {"kappa_high", b.records.back().kappa},
                        {"end_low", b.end_low},
                        {"end_high", b.end_high},
                        {"onset", b.onset()},
                        {"amplitude", b.amplitude()},
                        {"dominant_mode", dominant_mode(snap.profile, 32)},
                        {"table", "branches/" + name + ".csv"},
                        {"snapshot", snapshot}});
  }
  json pairs = json::array();
  for (const NearPair& p : d.near_pairs)
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"kappa", p.kappa}, {"distance", p.distance}});
  return json{{"kappa_min", d.kappas.kappa_min},
              {"kappa_max", d.kappas.kappa_max},
              {"samples", d.kappas.samples},
              {"dedup_tol", d.dedup_tol},
              {"failed_guesses", d.failed_guesses},
              {"near_pairs", pairs},
              {"branches", branches}};
}

json critical_list(const MV1D& p, double kappa_max, int k_max) {
  json out = json::array();
  for (const CriticalKappa& c : critical_kappas(p.kernel, p.grid, k_max, p.sigma))
    if (c.kappa <= kappa_max) out.push_back({{"k", c.k}, {"kappa", c.kappa}});
  return out;
}

// ---------------------------------------------------------------------------

void study_solve(const RunConfig& cfg, const Reader& s, json& meta, bool nfp_extras) {
  s.allow_only({"guess"});
  const auto map = make_map(cfg.problem);
  const Field u0 = guess_or(s, cfg.problem, json{{"type", "homogeneous"}});
  const NewtonResult r = newton_solve(*map, u0, cfg.newton);
  if (!r.converged) {
    json trace = trace_json(r);
    throw SolveFailure(r.failure.empty() ? "Newton did not reach the tolerance" : r.failure, trace);
  }
  meta["converged"] = true;
  meta["iterations"] = r.iterations;
  meta["final_residual"] = r.final_residual;
  meta["final_step"] = r.final_step;
  meta["trace"] = trace_json(r);
  meta["profile"] = profile_record(*map, r.solution, cfg.output, "profile");
  if (!nfp_extras) return;
  const auto& nfp = std::get<NFP>(cfg.problem);
  const NeuralMap nm(nfp);
  const Axis& ax = nfp.grid.axis(0);
  const Axis& ay = nfp.grid.axis(1);
  const auto x = coordinates(ax);
  const auto moment = nm.first_moment(r.solution);
  const auto centre = nm.centres(r.solution);
  Csv csv({"x", "mass", "first_moment", "centre"});
  double worst = 0.0;
  for (std::size_t i = 0; i < ax.n; ++i) {
    const double mass = simpson(std::span<const double>(r.solution.values).subspan(i * ay.n, ay.n), ay.spacing());
    worst = std::max(worst, std::abs(mass - 1.0 / ax.length()));
    csv.row({num(x[i]), num(mass), num(moment[i]), num(centre[i])});
  }
  csv.write(cfg.output / "moments.csv");
  double spread = 0.0;
  for (double m : moment) spread = std::max(spread, std::abs(m - moment.front()));
  meta["moments"] = "moments.csv";
  meta["max_angle_mass_error"] = worst;
  meta["first_moment_range"] = spread;
}

void study_convergence(const RunConfig& cfg, const Reader& s, json& meta) {
  s.allow_only({"ns", "hs", "reference_n", "guess"});
  const MV1D& base = require_mv1d(cfg);
  const auto* modes = std::get_if<CosineModes>(&std::get<Kernel1D>(base.kernel.form));
  if (!modes || modes->modes.size() != 1 || modes->modes[0].a <= 0.0)
    throw ConfigError("problem.kernel", "convergence needs a single cosine mode with positive weight");
  const Mode mode = modes->modes[0];
  const double length = base.grid.axis(0).length();
  const std::size_t ref_n = s.count("reference_n", 20001);
  if (ref_n % 2 == 0) s.fail("reference_n", "must be odd");
  const KuramotoState ref = kuramoto_reference(base.kappa * mode.a, mode.k, GridSpec::torus(ref_n, length), base.sigma);
  const std::vector<double> ns = s.numbers("ns");
  if (ns.size() < 2) s.fail("ns", "needs at least two grid sizes");
  const std::vector<double> hs = s.numbers("hs", {1e-5});

  std::vector<std::string> header{"n", "af"};
  for (double h : hs) {
    header.push_back("df_h" + num(h));
    header.push_back("af_df_h" + num(h));
  }
  Csv csv(header);
  std::vector<double> log_n, log_af;
  std::vector<std::vector<double>> log_df(hs.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto n = static_cast<std::size_t>(ns[i]);
    const std::string key = "ns[" + std::to_string(i) + "]";
    if (static_cast<double>(n) != ns[i] || n < 3 || n % 2 == 0)
      throw ConfigError(s.key_path(key), "grid sizes must be odd integers of at least 3");
    MV1D p = base;
    p.grid = GridSpec::torus(n, length);
    const Field u0 = guess_or(s, p, json{{"type", "cosine"}, {"k", 1}, {"b", 1.0}});
    NewtonConfig af_cfg = cfg.newton;
    af_cfg.jvp = JvpMode::analytic;
    const NewtonResult af = newton_solve(p, u0, af_cfg);
    const double e_af = af.converged ? error_vs_reference(af.solution, ref.u) : std::nan("");
    std::vector<std::string> row{std::to_string(n), num(e_af)};
    if (af.converged) {
      log_n.push_back(std::log(static_cast<double>(n)));
      log_af.push_back(std::log(e_af));
    }
    for (std::size_t j = 0; j < hs.size(); ++j) {
      NewtonConfig df_cfg = cfg.newton;
      df_cfg.jvp = JvpMode::central_difference;
      df_cfg.h = hs[j];
      const NewtonResult df = newton_solve(p, u0, df_cfg);
      const double e_df = df.converged ? error_vs_reference(df.solution, ref.u) : std::nan("");
      const double gap = (df.converged && af.converged) ? distance(af.solution, df.solution, NormKind::linf)
                                                        : std::nan("");
      row.push_back(num(e_df));
      row.push_back(num(gap));
      if (df.converged && af.converged) log_df[j].push_back(std::log(e_df));
    }
    csv.row(row);
  }
  csv.write(cfg.output / "convergence.csv");

  // Least-squares slope of log error on log n.
  auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || x.size() != y.size()) return std::nan("");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
  };
  meta["table"] = "convergence.csv";
  meta["reference_n"] = ref_n;
  meta["reference_amplitude"] = ref.a;
  meta["af_slope"] = slope(log_n, log_af);
  json df = json::array();
  for (std::size_t j = 0; j < hs.size(); ++j) df.push_back({{"h", hs[j]}, {"slope", slope(log_n, log_df[j])}});
  meta["df_slopes"] = df;
}

void study_diagram(const RunConfig& cfg, const Reader& s, json& meta) {
  s.allow_only({NLFP_DIAGRAM_KEYS});
  const MV1D& p = require_mv1d(cfg);
  const DiagramConfig dc = parse_diagram(s, cfg.newton, cfg.workers);
  const KappaFamily family(p);
  const Diagram d = build_diagram(family, dc);
  meta["diagram"] = write_diagram(d, family, cfg.output);
  meta["critical_kappas"] = critical_list(p, dc.kappas.kappa_max, 64);
}

void study_critical(const RunConfig& cfg, const Reader& s, json& meta) {
  s.allow_only({"kappa_lo", "kappa_hi", "tol", "guess", "k_max", "homogeneity_tol", "dedup_tol",
                "quotient_reflections"});
  const MV1D& p = require_mv1d(cfg);
  const double lo = s.number("kappa_lo"), hi = s.number("kappa_hi");
  if (hi <= lo) s.fail("kappa_hi", "must exceed kappa_lo");
  const double tol = s.number("tol", 1e-7);
  if (tol <= 0.0) s.fail("tol", "must be positive");
  const long k_max = s.integer("k_max", 16);
  if (k_max < 1) s.fail("k_max", "must be at least 1");
  const KappaFamily family(p);
  const ContinuationConfig cc = parse_continuation(s, cfg.newton, cfg.workers);
  const Field guess = guess_or(s, p, json{{"type", "cosine"}, {"k", 1}, {"b", 1.0}});
  const double kc = find_critical_kappa(family, lo, hi, guess, tol, cc);
  meta["bisection"] = kc;
  const json formula = critical_list(p, std::numeric_limits<double>::infinity(), static_cast<int>(k_max));
  meta["formula"] = formula;
  if (!formula.empty()) {
    const double k1 = formula.front().at("kappa").get<double>();
    meta["relative_difference"] = std::abs(kc - k1) / k1;
  }
}

std::vector<Field> read_catalogue(const Reader& s, const fs::path& base_dir, const GridSpec& grid) {
  std::vector<Field> out;
  const json& files = s.raw().at("catalogue");
  if (!files.is_array()) s.fail("catalogue", "expected an array of file paths");
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string key = s.key_path("catalogue") + "[" + std::to_string(i) + "]";
    if (!files[i].is_string()) throw ConfigError(key, "expected a file path");
    fs::path path = files[i].get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    if (!fs::exists(path)) throw ConfigError(key, "file not found: " + path.string());
    Field f = read_field(path);
    if (!(f.grid == grid)) throw ConfigError(key, "profile grid does not match the problem grid");
    out.push_back(std::move(f));
  }
  return out;
}

void study_basins(const RunConfig& cfg, const Reader& s, const fs::path& base_dir, json& meta) {
  s.allow_only({"kappa", "ks", "bs", "catalogue", "suite", "homogeneity_tol", "dedup_tol", "quotient_reflections"});
  const MV1D& p = require_mv1d(cfg);
  const double kappa = s.number("kappa");
  const std::vector<double> ks = s.numbers("ks"), bs = s.numbers("bs");
  if (ks.empty()) s.fail("ks", "needs at least one value");
  if (bs.empty()) s.fail("bs", "needs at least one value");
  const KappaFamily family(p);
  const ContinuationConfig cc = parse_continuation(s, cfg.newton, cfg.workers);
  std::vector<Field> catalogue;
  if (s.has("catalogue")) {
    if (s.has("suite")) s.fail("suite", "give either catalogue or suite, not both");
    catalogue = read_catalogue(s, base_dir, p.grid);
  } else {
    const GuessSuite suite = parse_suite(s.has("suite") ? s.child("suite") : Reader(json::object(), s.key_path("suite")));
    catalogue = sweep_guesses(family, kappa, make_guesses(suite, p.grid), cc).states;
  }
  const BasinScan scan = basin_scan(family, kappa, ks, bs, catalogue, cc);
  Csv csv({"k", "b", "label"});
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = 0; j < bs.size(); ++j)
      csv.row({num(ks[i]), num(bs[j]), std::to_string(scan.labels[i * bs.size() + j])});
  csv.write(cfg.output / "basins.csv");
  const auto map = family.at(kappa);
  json states = json::array();
  for (std::size_t i = 0; i < scan.catalogue.size(); ++i) {
    json rec = profile_record(*map, scan.catalogue[i], cfg.output, fs::path("catalogue") / ("state_" + std::to_string(i)));
    rec["label"] = i;
    rec["from_input"] = i < scan.input_catalogue_size;
    rec["linf_distance"] = distance(scan.catalogue[i], family.homogeneous_state(), NormKind::linf);
    states.push_back(rec);
  }
  meta["table"] = "basins.csv";
  meta["catalogue"] = states;
}

void study_stability(const RunConfig& cfg, const Reader& s, json& meta) {
  s.allow_only({NLFP_DIAGRAM_KEYS, "kappas", "noise_levels", "dt", "t_final", "departure_threshold"});
  const MV1D& p = require_mv1d(cfg);
  const DiagramConfig dc = parse_diagram(s, cfg.newton, cfg.workers);
  const std::vector<double> kappas = s.numbers("kappas");
  if (kappas.empty()) s.fail("kappas", "needs at least one value");
  const std::vector<double> noise = s.numbers("noise_levels", {1e-3});
  for (std::size_t i = 0; i < noise.size(); ++i)
    if (noise[i] <= 0.0) throw ConfigError(s.key_path("noise_levels") + "[" + std::to_string(i) + "]", "must be positive");
  EvolveConfig ec;
  ec.dt = s.number("dt", ec.dt);
  ec.t_final = s.number("t_final", ec.t_final);
  ec.departure_threshold = s.number("departure_threshold", 0.0);
  ec.seed = cfg.seed;
  if (ec.dt <= 0.0) s.fail("dt", "must be positive");
  if (ec.t_final <= 0.0) s.fail("t_final", "must be positive");

  const KappaFamily family(p);
  const Diagram d = build_diagram(family, dc);
  meta["diagram"] = write_diagram(d, family, cfg.output);
  Csv csv({"branch", "kappa", "noise_level", "stable", "final_distance", "max_mass_drift", "min_density",
           "energy_increases", "approached_branch"});
  for (const Branch& b : d.branches) {
    std::vector<double> inside;
    for (double k : kappas)
      if (k >= b.records.front().kappa - 1e-12 && k <= b.records.back().kappa + 1e-12) inside.push_back(k);
    if (inside.empty()) continue;
    for (const StabilityLabel& l : classify_stability(family, b, inside, noise, ec, &d, cfg.workers))
      csv.row({std::to_string(b.id), num(l.kappa), num(l.noise_level), l.stable ? "1" : "0", num(l.final_distance),
               num(l.max_mass_drift), num(l.min_density), std::to_string(l.energy_increases),
               std::to_string(l.approached_branch)});
  }
  csv.write(cfg.output / "stability.csv");
  meta["table"] = "stability.csv";
}

void study_cs_region(const RunConfig& cfg, const Reader& s, json& meta) {
  s.allow_only({"alphas", "sigma_lo", "sigma_hi", "X", "quadrature_points", "ubar_max", "scan_points", "sigma_tol",
                "fit_alpha_max", "fit_limit"});
  CSRegionConfig rc;
  rc.alphas = s.numbers("alphas");
  if (rc.alphas.empty()) s.fail("alphas", "needs at least one value");
  rc.sigma_lo = s.number("sigma_lo", rc.sigma_lo);
  rc.sigma_hi = s.number("sigma_hi", rc.sigma_hi);
  if (rc.sigma_lo <= 0.0) s.fail("sigma_lo", "must be positive");
  if (rc.sigma_hi <= rc.sigma_lo) s.fail("sigma_hi", "must exceed sigma_lo");
  rc.X = s.number("X", rc.X);
  if (rc.X <= 0.0) s.fail("X", "must be positive");
  rc.quadrature_points = s.count("quadrature_points", rc.quadrature_points);
  if (rc.quadrature_points < 3 || rc.quadrature_points % 2 == 0) s.fail("quadrature_points", "must be odd and at least 3");
  rc.ubar_max = s.number("ubar_max", rc.ubar_max);
  rc.scan_points = s.count("scan_points", rc.scan_points);
  rc.sigma_tol = s.number("sigma_tol", rc.sigma_tol);
  rc.fit_alpha_max = s.number("fit_alpha_max", rc.fit_alpha_max);
  rc.fit_limit = s.number("fit_limit", rc.fit_limit);
  rc.workers = cfg.workers;
  const CSRegion region = cs_region_scan(rc);
  Csv csv({"alpha", "sigma_c"});
  for (std::size_t i = 0; i < region.alphas.size(); ++i) csv.row({num(region.alphas[i]), num(region.sigma_c[i])});
  csv.write(cfg.output / "cs_region.csv");
  meta["table"] = "cs_region.csv";
  meta["exponent"] = region.exponent;
  meta["prefactor"] = region.prefactor;
  meta["fit_points"] = region.fit_points;
}

}  // namespace

void run_study(const RunConfig& cfg, const fs::path& base_dir) {
  const Reader s = study_block(cfg);
  if (cfg.study == "nfp-solve" && !std::holds_alternative<NFP>(cfg.problem))
    throw ConfigError("problem.variant", "study 'nfp-solve' needs variant nfp");
  fs::create_directories(cfg.output);
  json meta{{"study", cfg.study}, {"seed", cfg.seed}, {"config", cfg.document}};
  if (cfg.study == "solve" || cfg.study == "nfp-solve") {
    study_solve(cfg, s, meta, cfg.study == "nfp-solve");
  } else if (cfg.study == "convergence") {
    study_convergence(cfg, s, meta);
  } else if (cfg.study == "diagram") {
    study_diagram(cfg, s, meta);
  } else if (cfg.study == "critical") {
    study_critical(cfg, s, meta);
  } else if (cfg.study == "basins") {
    study_basins(cfg, s, base_dir, meta);
  } else if (cfg.study == "stability") {
    study_stability(cfg, s, meta);
  } else if (cfg.study == "cs-region") {
    study_cs_region(cfg, s, meta);
  } else {
    throw ConfigError("study", "unknown study '" + cfg.study + "'");
  }
  write_json(cfg.output / (cfg.study + ".json"), meta);
}

}  // namespace nlfp::cli
