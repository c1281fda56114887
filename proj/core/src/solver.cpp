#include "nlfp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlfp/error.hpp"

namespace nlfp {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

GmresResult gmres_solve(const LinearAction& A, std::span<const double> b, const GmresConfig& cfg) {
  const std::size_t n = b.size();
  require(cfg.max_krylov_dim >= 1, "gmres: max_krylov_dim must be at least 1");
  GmresResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm(b, NormKind::l2);
  const double target = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);
  if (bnorm <= target) {
    res.residual = bnorm;
    res.converged = true;
    return res;
  }
  const std::size_t cycle = cfg.restart == 0 ? cfg.max_krylov_dim : std::min(cfg.restart, cfg.max_krylov_dim);

  std::vector<double> r(b.begin(), b.end()), w(n);
  double beta = bnorm;
  while (res.iterations < cfg.max_krylov_dim) {
    const std::size_t m = std::min(cycle, cfg.max_krylov_dim - res.iterations);
    std::vector<std::vector<double>> V;
    V.reserve(m + 1);
    V.emplace_back(r);
    for (double& v : V[0]) v /= beta;
    // Column-major Hessenberg, column j holds j + 2 entries.
    std::vector<std::vector<double>> H(m, std::vector<double>(m + 1, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1, 0.0);
    g[0] = beta;
    std::size_t k = 0;
    bool done = false;
    for (; k < m; ++k) {
      A(V[k], w);
      require(all_finite(w), "gmres: operator produced non-finite values");
      for (std::size_t i = 0; i <= k; ++i) {
        H[k][i] = dot(w, V[i]);
        for (std::size_t t = 0; t < n; ++t) w[t] -= H[k][i] * V[i][t];
      }
      const double hnext = norm(w, NormKind::l2);
      H[k][k + 1] = hnext;
      for (std::size_t i = 0; i < k; ++i) {
        const double a = H[k][i], c = H[k][i + 1];
        H[k][i] = cs[i] * a + sn[i] * c;
        H[k][i + 1] = -sn[i] * a + cs[i] * c;
      }
      const double denom = std::hypot(H[k][k], H[k][k + 1]);
      if (denom == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = H[k][k] / denom;
        sn[k] = H[k][k + 1] / denom;
      }
      H[k][k] = denom;
      H[k][k + 1] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++res.iterations;
      const double rnorm = std::abs(g[k + 1]);
      // Lucky breakdown: the Krylov space is invariant, the solve is exact.
      const bool breakdown = hnext <= 1e-14 * bnorm;
      if (rnorm <= target || breakdown) {
        ++k;
        done = true;
        break;
      }
      if (k + 1 < m) {
        V.emplace_back(w);
        for (double& v : V.back()) v /= hnext;
      }
    }
    // Back substitution on the k x k triangle.
    std::vector<double> y(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
      double s = g[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= H[j][i] * y[j];
      require(H[i][i] != 0.0, "gmres: singular Hessenberg matrix");
      y[i] = s / H[i][i];
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t t = 0; t < n; ++t) res.x[t] += y[j] * V[j][t];

    res.residual = std::abs(g[k]);
    if (done) {
      res.converged = true;
      return res;
    }
    // Restart from the true residual.
    A(res.x, w);
    for (std::size_t t = 0; t < n; ++t) r[t] = b[t] - w[t];
    beta = norm(r, NormKind::l2);
    res.residual = beta;
    if (beta <= target) {
      res.converged = true;
      return res;
    }
  }
  res.converged = res.residual <= target;
  return res;
}

Field central_difference_jvp(const std::function<Field(const Field&)>& F, const Field& u, const Field& phi,
                             double h) {
  require(h > 0.0, "central difference: h must be positive");
  require(u.size() == phi.size(), "central difference: size mismatch");
  Field plus = u, minus = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    plus[i] += h * phi[i];
    minus[i] -= h * phi[i];
  }
  const Field fp = F(plus);
  const Field fm = F(minus);
  Field out(fp.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (fp[i] - fm[i]) / (2.0 * h);
  require(all_finite(out.values), "central difference: non-finite output");
  return out;
}

NewtonResult newton_solve(const FixedPointMap& map, const Field& u0, const NewtonConfig& cfg) {
  require(cfg.tol > 0.0, "newton: tol must be positive");
  require(cfg.jvp == JvpMode::analytic || cfg.h > 0.0, "newton: h must be positive");
  require(u0.grid == map.grid(), "newton: initial guess is not on the problem grid");
  NewtonResult res;
  res.solution = u0;
  Field& u = res.solution;
  const GridSpec& grid = map.grid();
  auto residual_map = [&](const Field& v) {
    Field f = map.apply(v);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= v[i];
    return f;
  };

  double step_norm = 0.0;
  for (std::size_t it = 1; it <= cfg.n_iters + 1; ++it) {
    if (!all_finite(u.values)) {
      res.failure = "non-finite iterate";
      return res;
    }
    Field Tu;
    try {
      Tu = map.apply(u);
    } catch (const Error& e) {
      res.failure = e.what();
      return res;
    }
    Field F(grid);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = Tu[i] - u[i];
    const double fnorm = norm(F, cfg.p);
    res.final_residual = fnorm;
    res.final_step = step_norm;
    if (step_norm + fnorm <= cfg.tol) {
      res.converged = true;
      return res;
    }
    if (it > cfg.n_iters) break;

    LinearAction J;
    if (cfg.jvp == JvpMode::analytic) {
      J = [&](std::span<const double> x, std::span<double> y) {
        const Field phi(grid, std::vector<double>(x.begin(), x.end()));
        const Field d = map.frechet(u, Tu, phi);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = d[i] - x[i];
      };
    } else {
      // h perturbs a direction of unit max-norm. Krylov vectors have unit
      // 2-norm, so their entries shrink like N^{-1/2}; differencing them
      // directly would amplify roundoff by sqrt(N) and push the iterate along
      // the translation null direction.
      J = [&](std::span<const double> x, std::span<double> y) {
        const double s = norm(x, NormKind::linf);
        if (s == 0.0) {
          std::fill(y.begin(), y.end(), 0.0);
          return;
        }
        Field phi(grid, std::vector<double>(x.begin(), x.end()));
        for (double& v : phi.values) v /= s;
        const Field d = central_difference_jvp(residual_map, u, phi, cfg.h);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * d[i];
      };
    }
    std::vector<double> rhs(F.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -F[i];
    GmresResult g;
    try {
      g = gmres_solve(J, rhs, cfg.gmres);
    } catch (const Error& e) {
      res.failure = e.what();
      return res;
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += g.x[i];
    step_norm = norm(g.x, cfg.p);
    res.iterations = it;
    res.history.push_back({it, fnorm, step_norm, g.iterations, g.residual});
    if (!g.converged) {
      res.failure = "gmres did not converge within the Krylov dimension";
      res.final_step = step_norm;
      return res;
    }
  }
  return res;
}

NewtonResult newton_solve(const ProblemSpec& problem, const Field& u0, const NewtonConfig& cfg) {
  return newton_solve(*make_map(problem), u0, cfg);
}

}  // namespace nlfp
