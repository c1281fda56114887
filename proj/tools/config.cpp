#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlfp/parallel.hpp"

namespace nlfp::cli {

namespace {

constexpr double kPi = std::numbers::pi;

const char* type_name(const json& j) {
  if (j.is_number()) return "number";
  if (j.is_boolean()) return "boolean";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

}  // namespace

Reader::Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
}

std::string Reader::key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool Reader::has(const std::string& key) const { return j_.contains(key); }

void Reader::allow_only(std::initializer_list<const char*> allowed) const {
  for (const auto& [k, v] : j_.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
    if (!ok) fail(k, "unknown key");
  }
}

void Reader::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(key_path(key), message);
}

const json& Reader::at(const std::string& key) const {
  if (!j_.contains(key)) fail(key, "missing required key");
  return j_.at(key);
}

Reader Reader::child(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_object()) fail(key, std::string("expected an object, got ") + type_name(v));
  return Reader(v, key_path(key));
}

std::vector<Reader> Reader::objects(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, std::string("expected an array, got ") + type_name(v));
  std::vector<Reader> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = key_path(key) + "[" + std::to_string(i) + "]";
    if (!v[i].is_object()) throw ConfigError(p, "expected an object");
    out.emplace_back(v[i], p);
  }
  return out;
}

double Reader::number(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_number()) fail(key, std::string("expected a number, got ") + type_name(v));
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, "must be finite");
  return d;
}

double Reader::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Reader::integer(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_number_integer()) fail(key, std::string("expected an integer, got ") + type_name(v));
  return v.get<long>();
}

long Reader::integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

std::size_t Reader::count(const std::string& key, std::size_t fallback) const {
  if (!has(key)) return fallback;
  const long v = integer(key);
  if (v < 0) fail(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

bool Reader::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_boolean()) fail(key, std::string("expected a boolean, got ") + type_name(v));
  return v.get<bool>();
}

std::string Reader::string(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_string()) fail(key, std::string("expected a string, got ") + type_name(v));
  return v.get<std::string>();
}

std::string Reader::string(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::vector<double> Reader::numbers(const std::string& key) const {
  const json& v = at(key);
  if (!v.is_array()) fail(key, std::string("expected an array, got ") + type_name(v));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> Reader::numbers(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

// ---------------------------------------------------------------------------

Kernel1D parse_kernel_1d(const Reader& r) {
  const std::string type = r.string("type");
  auto radius = [&] {
    const double R = r.number("R");
    if (R <= 0.0) r.fail("R", "must be positive");
    return R;
  };
  if (type == "cosine_modes") {
    r.allow_only({"type", "modes"});
    CosineModes k;
    for (const Reader& m : r.objects("modes")) {
      m.allow_only({"a", "k"});
      const long idx = m.integer("k");
      if (idx < 0) m.fail("k", "must be non-negative");
      k.modes.push_back(Mode{m.number("a", 1.0), static_cast<int>(idx)});
    }
    if (k.modes.empty()) r.fail("modes", "needs at least one mode");
    return k;
  }
  if (type == "top_hat") {
    r.allow_only({"type", "R"});
    return TopHat{radius()};
  }
  if (type == "triangle") {
    r.allow_only({"type", "R"});
    return Triangle{radius()};
  }
  if (type == "att_rep_top_hat") {
    r.allow_only({"type", "R"});
    return AttRepTopHat{radius()};
  }
  if (type == "quadratic") {
    r.allow_only({"type"});
    return Quadratic{};
  }
  if (type == "tanh") {
    r.allow_only({"type", "scale", "steepness", "offset"});
    return TanhNFP{r.number("scale"), r.number("steepness"), r.number("offset")};
  }
  if (type == "cosine_series") {
    r.allow_only({"type", "terms"});
    CosineNFP k;
    for (const Reader& t : r.objects("terms")) {
      t.allow_only({"coef", "freq"});
      k.terms.push_back(CosineTerm{t.number("coef"), t.number("freq")});
    }
    return k;
  }
  if (type == "constant") {
    r.allow_only({"type", "value"});
    return Constant{r.number("value")};
  }
  r.fail("type", "unknown kernel type '" + type + "'");
}

KernelSpec parse_kernel(const Reader& r) {
  if (r.string("type") != "separable_2d") return KernelSpec(parse_kernel_1d(r));
  r.allow_only({"type", "terms"});
  Separable2D k;
  for (const Reader& t : r.objects("terms")) {
    t.allow_only({"coef", "x", "y"});
    k.terms.push_back(SeparableTerm{t.number("coef", 1.0), parse_kernel_1d(t.child("x")), parse_kernel_1d(t.child("y"))});
  }
  if (k.terms.empty()) r.fail("terms", "needs at least one term");
  return k;
}

namespace {

std::size_t odd_count(const Reader& r, const std::string& key, std::size_t fallback) {
  const std::size_t n = r.count(key, fallback);
  if (n < 3) r.fail(key, "needs at least 3 nodes");
  if (n % 2 == 0) r.fail(key, "Simpson's rule needs an odd node count, got " + std::to_string(n));
  return n;
}

double positive(const Reader& r, const std::string& key, double fallback) {
  const double v = r.number(key, fallback);
  if (v <= 0.0) r.fail(key, "must be positive");
  return v;
}

Activation parse_activation(const Reader& p) {
  if (!p.has("activation")) return SmoothedReLU{};
  const Reader a = p.child("activation");
  const std::string type = a.string("type");
  if (type == "identity") {
    a.allow_only({"type"});
    return Identity{};
  }
  if (type == "smoothed_relu") {
    a.allow_only({"type", "eps"});
    return SmoothedReLU{positive(a, "eps", 0.1)};
  }
  a.fail("type", "unknown activation '" + type + "'");
}

ProblemSpec parse_problem(const Reader& p, const Reader& g) {
  const std::string variant = p.string("variant");
  if (variant == "mv1d" || variant == "mv2d") {
    p.allow_only({"variant", "kappa", "sigma", "kernel"});
    g.allow_only({"n", "length"});
    MVParams base;
    base.kappa = p.number("kappa", 0.0);
    base.sigma = positive(p, "sigma", 1.0);
    base.kernel = parse_kernel(p.child("kernel"));
    const std::size_t n = odd_count(g, "n", 501);
    const double length = positive(g, "length", kPi);
    if (variant == "mv1d") {
      if (base.kernel.is_2d()) p.fail("kernel", "a separable_2d kernel needs variant mv2d");
      MV1D out;
      static_cast<MVParams&>(out) = base;
      out.grid = GridSpec::torus(n, length);
      return out;
    }
    if (!base.kernel.is_2d()) p.fail("kernel", "variant mv2d needs a separable_2d kernel");
    MV2D out;
    static_cast<MVParams&>(out) = base;
    out.grid = GridSpec::torus2d(n, length);
    return out;
  }
  if (variant == "cs") {
    p.allow_only({"variant", "alpha", "sigma"});
    g.allow_only({"n", "X"});
    CS out;
    out.alpha = positive(p, "alpha", 1.0);
    out.sigma = positive(p, "sigma", 1.0);
    const double X = positive(g, "X", 4.0);
    out.grid = GridSpec::interval(odd_count(g, "n", 801), -X, X);
    return out;
  }
  if (variant == "nfp") {
    p.allow_only({"variant", "sigma", "B", "kernel", "activation"});
    g.allow_only({"nx", "ny", "y_max"});
    NFP out;
    out.sigma = positive(p, "sigma", 1.0);
    out.B = p.number("B", 0.0);
    out.kernel = parse_kernel(p.child("kernel"));
    if (out.kernel.is_2d()) p.fail("kernel", "the neural model takes a 1D kernel");
    out.activation = parse_activation(p);
    out.grid = GridSpec(Axis{odd_count(g, "nx", 101), -kPi / 2, kPi / 2, Topology::periodic},
                        Axis{odd_count(g, "ny", 3501), 0.0, positive(g, "y_max", 35.0), Topology::truncated});
    return out;
  }
  p.fail("variant", "unknown variant '" + variant + "' (expected mv1d, mv2d, cs or nfp)");
}

}  // namespace

NewtonConfig parse_newton(const Reader& r) {
  r.allow_only({"n_iters", "tol", "norm", "jvp", "h", "gmres"});
  NewtonConfig c;
  c.n_iters = r.count("n_iters", c.n_iters);
  c.tol = positive(r, "tol", c.tol);
  const std::string norm = r.string("norm", "linf");
  if (norm == "linf") {
    c.p = NormKind::linf;
  } else if (norm == "l2") {
    c.p = NormKind::l2;
  } else {
    r.fail("norm", "expected 'linf' or 'l2'");
  }
  const std::string jvp = r.string("jvp", "analytic");
  if (jvp == "analytic") {
    c.jvp = JvpMode::analytic;
  } else if (jvp == "central_difference") {
    c.jvp = JvpMode::central_difference;
  } else {
    r.fail("jvp", "expected 'analytic' or 'central_difference'");
  }
  c.h = positive(r, "h", c.h);
  if (r.has("gmres")) {
    const Reader g = r.child("gmres");
    g.allow_only({"rel_tol", "abs_tol", "max_krylov_dim", "restart"});
    c.gmres.rel_tol = positive(g, "rel_tol", c.gmres.rel_tol);
    c.gmres.abs_tol = positive(g, "abs_tol", c.gmres.abs_tol);
    c.gmres.max_krylov_dim = g.count("max_krylov_dim", c.gmres.max_krylov_dim);
    c.gmres.restart = g.count("restart", c.gmres.restart);
  }
  return c;
}

GuessSuite parse_suite(const Reader& r) {
  r.allow_only({"type", "b", "ks", "z_min", "z_max", "amplitude", "include_homogeneous"});
  GuessSuite s;
  s.include_homogeneous = r.boolean("include_homogeneous", true);
  const std::string type = r.string("type", "cosine");
  if (type == "cosine") {
    CosineFamily f;
    f.b = r.number("b", 0.5);
    f.ks = r.numbers("ks", {1, 2, 3, 4, 5, 6, 7, 8});
    s.family = f;
  } else if (type == "legacy") {
    LegacySweep f;
    f.z_min = static_cast<int>(r.integer("z_min", f.z_min));
    f.z_max = static_cast<int>(r.integer("z_max", f.z_max));
    f.amplitude = r.number("amplitude", f.amplitude);
    if (f.z_max < f.z_min) r.fail("z_max", "must not be below z_min");
    s.family = f;
  } else {
    r.fail("type", "expected 'cosine' or 'legacy'");
  }
  return s;
}

ContinuationConfig parse_continuation(const Reader& study, const NewtonConfig& newton, std::size_t workers) {
  ContinuationConfig c;
  c.newton = newton;
  c.workers = workers;
  c.homogeneity_tol = positive(study, "homogeneity_tol", c.homogeneity_tol);
  c.dedup_tol = positive(study, "dedup_tol", c.dedup_tol);
  c.quotient_reflections = study.boolean("quotient_reflections", c.quotient_reflections);
  return c;
}

DiagramConfig parse_diagram(const Reader& study, const NewtonConfig& newton, std::size_t workers) {
  DiagramConfig d;
  d.kappas.kappa_min = study.number("kappa_min");
  d.kappas.kappa_max = study.number("kappa_max");
  if (d.kappas.kappa_max <= d.kappas.kappa_min) study.fail("kappa_max", "must exceed kappa_min");
  d.kappas.samples = study.count("samples", 2001);
  if (d.kappas.samples < 2) study.fail("samples", "needs at least 2 samples");
  if (study.has("suite")) d.suite = parse_suite(study.child("suite"));
  else d.suite = parse_suite(Reader(json::object(), study.key_path("suite")));
  const std::string seeding = study.string("seeding", "endpoint");
  if (seeding == "endpoint") {
    d.seeding = Seeding::endpoint;
  } else if (seeding == "multi_kappa") {
    d.seeding = Seeding::multi_kappa;
  } else {
    study.fail("seeding", "expected 'endpoint' or 'multi_kappa'");
  }
  d.seed_kappas = study.numbers("seed_kappas", {});
  d.fold_reseeding = study.boolean("fold_reseeding", d.fold_reseeding);
  d.fold_rounds = study.count("fold_rounds", d.fold_rounds);
  d.continuation = parse_continuation(study, newton, workers);
  return d;
}

Field parse_guess(const Reader& r, const ProblemSpec& problem) {
  const GridSpec& grid = problem_grid(problem);
  const std::string type = r.string("type");
  if (type == "homogeneous") {
    r.allow_only({"type"});
    if (const auto* nfp = std::get_if<NFP>(&problem)) return NeuralMap(*nfp).homogeneous_state();
    return homogeneous(grid);
  }
  if (type == "cosine") {
    r.allow_only({"type", "k", "b"});
    const double k = r.number("k", 1.0), b = r.number("b", 0.5);
    if (grid.dim() == 1) return cosine_guess(grid, k, b);
    const auto* nfp = std::get_if<NFP>(&problem);
    const Axis& ax = grid.axis(0);
    const double L = ax.length();
    const auto x = coordinates(ax);
    if (nfp) {
      // u_inf(y) + b cos(2 pi k x / L) on the angle axis.
      Field u = NeuralMap(*nfp).homogeneous_state();
      const std::size_t ny = grid.axis(1).n;
      for (std::size_t i = 0; i < u.size(); ++i) u[i] += b * std::cos(2.0 * kPi * k * x[i / ny] / L);
      return u;
    }
    // (1 + b cos(ax) + b cos(ay) + b cos(ax) cos(ay)) / L^2 with a = 2 pi k / L.
    Field u(grid);
    const std::size_t n = ax.n;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double cx = std::cos(2.0 * kPi * k * x[i] / L), cy = std::cos(2.0 * kPi * k * x[j] / L);
        u.at(i, j) = (1.0 + b * cx + b * cy + b * cx * cy) / (L * L);
      }
    return u;
  }
  if (type == "legacy") {
    r.allow_only({"type", "z", "amplitude"});
    if (grid.dim() != 1 || !grid.axis(0).periodic()) r.fail("type", "legacy guesses need a 1D periodic grid");
    return legacy_guess(grid, r.number("z"), r.number("amplitude", 0.5));
  }
  if (type == "gaussian") {
    r.allow_only({"type", "center", "variance"});
    if (grid.dim() != 1) r.fail("type", "gaussian guesses need a 1D grid");
    const double c = r.number("center", 0.0), v = positive(r, "variance", 1.0);
    Field u(grid);
    const auto x = coordinates(grid.axis(0));
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = std::exp(-(x[i] - c) * (x[i] - c) / (2.0 * v));
    return u;
  }
  r.fail("type", "unknown guess type '" + type + "'");
}

Reader study_block(const RunConfig& cfg) {
  return Reader(cfg.document.at("study"), "study").child(cfg.study);
}

RunConfig parse_run_config(const json& doc, const std::string& study) {
  const Reader root(doc, "");
  root.allow_only({"problem", "grid", "solver", "study", "output", "seed", "workers"});
  RunConfig cfg;
  cfg.document = doc;
  cfg.study = study;
  const Reader s = root.child("study");
  if (doc.at("study").size() != 1) throw ConfigError("study", "needs exactly one study block");
  if (!s.has(study))
    throw ConfigError("study", "block is '" + doc.at("study").begin().key() + "' but the subcommand is '" + study + "'");
  s.child(study);
  if (study != "cs-region") {
    cfg.problem = parse_problem(root.child("problem"), root.has("grid") ? root.child("grid") : Reader(json::object(), "grid"));
  } else if (root.has("problem") || root.has("grid")) {
    throw ConfigError(root.has("problem") ? "problem" : "grid", "cs-region takes its parameters from the study block");
  }
  cfg.newton = root.has("solver") ? parse_newton(root.child("solver")) : NewtonConfig{};
  cfg.output = root.string("output", cfg.output.string());
  const long seed = root.integer("seed", 0);
  if (seed < 0) root.fail("seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const long workers = root.integer("workers", 1);
  if (workers < 1) root.fail("workers", "must be at least 1");
  cfg.workers = worker_count(static_cast<std::size_t>(workers));
  return cfg;
}

}  // namespace nlfp::cli
