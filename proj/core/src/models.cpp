#include "nlfp/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nlfp/error.hpp"

namespace nlfp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void same_grid(const Field& a, const GridSpec& g, const char* what) {
  require(a.grid == g, std::string(what) + ": field grid does not match the problem grid");
}

// exp(e - max e) in place; returns false if anything is non-finite.
bool stable_exp(std::vector<double>& e) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : e) {
    if (!std::isfinite(v)) return false;
    top = std::max(top, v);
  }
  for (double& v : e) v = std::exp(v - top);
  return true;
}

double max_deviation(const std::vector<double>& xi, const std::vector<char>& mask) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (mask[i]) {
      sum += xi[i];
      ++count;
    }
  if (count == 0) return 0.0;
  const double mean = sum / static_cast<double>(count);
  double dev = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (mask[i]) dev = std::max(dev, std::abs(xi[i] - mean));
  return dev;
}

void require_positive(const Field& u, const char* what) {
  for (double v : u.values)
    require(v > 0.0 && std::isfinite(v), std::string(what) + ": density must be positive");
}

}  // namespace

double invert_h_prime(const DiffusionInverse& d, double s) {
  return std::visit(
      overloaded{
          [&](const LinearDiffusion& l) {
            require(l.sigma > 0.0, "linear diffusion: sigma must be positive");
            return std::exp(s / l.sigma);
          },
          [&](const PorousFast& p) {
            require(p.m != 1.0 && p.nu > 0.0 && p.m > 0.0, "porous/fast diffusion: need nu > 0, m > 0, m != 1");
            const double base = s / (p.nu * p.m);
            require(base > 0.0, "porous/fast diffusion: argument must be positive");
            return std::pow(base, 1.0 / (p.m - 1.0));
          },
          [&](const FermiDirac&) { return 1.0 / (1.0 + std::exp(-s)); },
          [&](const BoseEinstein&) {
            require(s < 0.0, "Bose-Einstein: argument must be negative");
            return -1.0 / (1.0 - std::exp(-s));
          },
      },
      d);
}

double activate(const Activation& f, double x) {
  return std::visit(overloaded{[&](const Identity&) { return x; },
                               [&](const SmoothedReLU& r) {
                                 return x > 0.0 ? x * x / std::sqrt(x * x + r.eps) : 0.0;
                               }},
                    f);
}

double activate_derivative(const Activation& f, double x) {
  return std::visit(overloaded{[&](const Identity&) { return 1.0; },
                               [&](const SmoothedReLU& r) {
                                 if (x <= 0.0) return 0.0;
                                 const double q = x * x + r.eps;
                                 return x * (x * x + 2.0 * r.eps) / (q * std::sqrt(q));
                               }},
                    f);
}

const GridSpec& problem_grid(const ProblemSpec& p) {
  return std::visit([](const auto& v) -> const GridSpec& { return v.grid; }, p);
}

// McKean-Vlasov

McKeanVlasovMap::McKeanVlasovMap(const MVParams& p) : kappa_(p.kappa), sigma_(p.sigma) {
  require(p.sigma > 0.0, "McKean-Vlasov: sigma must be positive");
  require(p.kappa >= 0.0, "McKean-Vlasov: kappa must be non-negative");
  require(p.kernel.is_2d() == (p.grid.dim() == 2), "McKean-Vlasov: kernel and grid dimensions differ");
  plan_ = std::make_shared<const ConvPlan>(p.grid);
  kernel_ = std::make_shared<const Spectrum>(plan_->transform(sample(p.kernel, p.grid)));
}

McKeanVlasovMap::McKeanVlasovMap(double kappa, double sigma, std::shared_ptr<const ConvPlan> plan,
                                 std::shared_ptr<const Spectrum> kernel)
    : kappa_(kappa), sigma_(sigma), plan_(std::move(plan)), kernel_(std::move(kernel)) {
  require(sigma_ > 0.0 && kappa_ >= 0.0, "McKean-Vlasov: need sigma > 0 and kappa >= 0");
}

std::shared_ptr<McKeanVlasovMap> McKeanVlasovMap::with_kappa(double kappa) const {
  return std::make_shared<McKeanVlasovMap>(kappa, sigma_, plan_, kernel_);
}

Field McKeanVlasovMap::interaction(const Field& u) const {
  same_grid(u, grid(), "McKean-Vlasov");
  return plan_->convolve(*kernel_, u);
}

Field McKeanVlasovMap::apply(const Field& u) const {
  Field e = interaction(u);
  const double c = -kappa_ / sigma_;
  for (double& v : e.values) v *= c;
  require(stable_exp(e.values), "McKean-Vlasov: non-finite exponent");
  const double z = integrate(e);
  require(std::isfinite(z) && z > 0.0, "McKean-Vlasov: normalisation is not finite");
  for (double& v : e.values) v /= z;
  return e;
}

Field McKeanVlasovMap::frechet(const Field& u, const Field& Tu, const Field& phi) const {
  same_grid(u, grid(), "McKean-Vlasov");
  same_grid(Tu, grid(), "McKean-Vlasov");
  Field c = interaction(phi);
  Field prod(grid());
  for (std::size_t i = 0; i < c.size(); ++i) prod[i] = Tu[i] * c[i];
  const double mean = integrate(prod);
  const double s = -kappa_ / sigma_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = s * Tu[i] * (c[i] - mean);
  return c;
}

double McKeanVlasovMap::steady_state_residual(const Field& u) const {
  require_positive(u, "steady-state residual");
  Field xi = interaction(u);
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = sigma_ * std::log(u[i]) + kappa_ * xi[i];
  const double mean = integrate(xi) / grid().volume();
  double dev = 0.0;
  for (double v : xi.values) dev = std::max(dev, std::abs(v - mean));
  return dev;
}

// Cucker-Smale

CuckerSmaleMap::CuckerSmaleMap(const CS& p) : p_(p) {
  require(p.sigma > 0.0, "Cucker-Smale: sigma must be positive");
  require(p.grid.dim() == 1 && !p.grid.axis(0).periodic(), "Cucker-Smale: needs a truncated 1D grid");
  const Axis& a = p.grid.axis(0);
  require(std::abs(a.lower + a.upper) <= 1e-12 * a.length(), "Cucker-Smale: grid must be symmetric about 0");
  x_ = coordinates(a);
  const double X = a.upper;
  const double confinement = p.alpha * X * X * X * X / 4.0 + (1.0 - p.alpha) * X * X / 2.0;
  require(confinement / p.sigma >= 16.0 * std::log(10.0),
          "Cucker-Smale: truncation too narrow, exp(-V(X)/sigma) exceeds 1e-16");
}

double CuckerSmaleMap::velocity(const Field& u) const {
  same_grid(u, p_.grid, "Cucker-Smale");
  Field xu(p_.grid);
  for (std::size_t i = 0; i < x_.size(); ++i) xu[i] = x_[i] * u[i];
  return integrate(xu);
}

Field CuckerSmaleMap::profile(double ubar) const {
  Field e(p_.grid);
  const double a = p_.alpha;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double x = x_[i];
    const double x2 = x * x;
    e[i] = -(a * x2 * x2 / 4.0 + (1.0 - a) * x2 / 2.0 - ubar * x) / p_.sigma;
  }
  require(stable_exp(e.values), "Cucker-Smale: non-finite exponent");
  const double z = integrate(e);
  require(std::isfinite(z) && z > 0.0, "Cucker-Smale: normalisation is not finite");
  for (double& v : e.values) v /= z;
  return e;
}

Field CuckerSmaleMap::apply(const Field& u) const { return profile(velocity(u)); }

Field CuckerSmaleMap::frechet(const Field& u, const Field& Tu, const Field& phi) const {
  same_grid(u, p_.grid, "Cucker-Smale");
  same_grid(Tu, p_.grid, "Cucker-Smale");
  const double du = velocity(phi);
  const double mean = velocity(Tu);
  Field out(p_.grid);
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = du / p_.sigma * Tu[i] * (x_[i] - mean);
  return out;
}

double CuckerSmaleMap::steady_state_residual(const Field& u) const {
  same_grid(u, p_.grid, "Cucker-Smale");
  const double top = *std::max_element(u.values.begin(), u.values.end());
  require(top > 0.0, "steady-state residual: density must be positive");
  const double ubar = velocity(u);
  const double a = p_.alpha;
  std::vector<double> xi(u.size());
  std::vector<char> mask(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    mask[i] = u[i] >= 1e-6 * top;
    if (!mask[i]) continue;
    const double x = x_[i];
    const double x2 = x * x;
    xi[i] = p_.sigma * std::log(u[i]) + x2 / 2.0 - ubar * x + a * (x2 * x2 / 4.0 - x2 / 2.0);
  }
  return max_deviation(xi, mask);
}

// Neural Fokker-Planck

NeuralMap::NeuralMap(const NFP& p) : p_(p) {
  require(p.sigma > 0.0, "neural model: sigma must be positive");
  require(p.grid.dim() == 2, "neural model: needs a 2D grid");
  const Axis& ax = p.grid.axis(0);
  const Axis& ay = p.grid.axis(1);
  require(ax.periodic(), "neural model: angle axis must be periodic");
  require(!ay.periodic() && ay.lower >= 0.0, "neural model: activity axis must be truncated with y >= 0");
  require(!p.kernel.is_2d(), "neural model: kernel must be one-dimensional");
  angle_grid_ = GridSpec(ax);
  y_ = coordinates(ay);
  plan_ = std::make_shared<const ConvPlan>(angle_grid_);
  kernel_ = std::make_shared<const Spectrum>(plan_->transform(sample(p.kernel, angle_grid_)));
}

std::vector<double> NeuralMap::first_moment(const Field& u) const {
  same_grid(u, p_.grid, "neural model");
  const std::size_t nx = p_.grid.axis(0).n, ny = p_.grid.axis(1).n;
  const double hy = p_.grid.axis(1).spacing();
  std::vector<double> out(nx), row(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) row[j] = y_[j] * u.at(i, j);
    out[i] = simpson(row, hy);
  }
  return out;
}

std::vector<double> NeuralMap::centres(const Field& u) const {
  const Field c = plan_->convolve(*kernel_, Field(angle_grid_, first_moment(u)));
  std::vector<double> f0(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    f0[i] = activate(p_.activation, c[i] + p_.B);
    require(std::isfinite(f0[i]), "neural model: activation returned a non-finite value");
  }
  return f0;
}

Field NeuralMap::row_gaussians(const std::vector<double>& f0) const {
  const std::size_t nx = p_.grid.axis(0).n, ny = p_.grid.axis(1).n;
  const double hy = p_.grid.axis(1).spacing();
  const double length = p_.grid.axis(0).length();
  Field out(p_.grid);
  std::vector<double> row(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double d = y_[j] - f0[i];
      row[j] = -d * d / (2.0 * p_.sigma);
    }
    require(stable_exp(row), "neural model: non-finite exponent");
    const double z = length * simpson(row, hy);
    require(std::isfinite(z) && z > 0.0, "neural model: normalisation is not finite");
    for (std::size_t j = 0; j < ny; ++j) out.at(i, j) = row[j] / z;
  }
  return out;
}

Field NeuralMap::apply(const Field& u) const { return row_gaussians(centres(u)); }

Field NeuralMap::profile(double f0) const {
  return row_gaussians(std::vector<double>(p_.grid.axis(0).n, f0));
}

Field NeuralMap::frechet(const Field& u, const Field& Tu, const Field& phi) const {
  same_grid(Tu, p_.grid, "neural model");
  const std::size_t nx = p_.grid.axis(0).n, ny = p_.grid.axis(1).n;
  const double hy = p_.grid.axis(1).spacing();
  const double length = p_.grid.axis(0).length();
  const Field c = plan_->convolve(*kernel_, Field(angle_grid_, first_moment(u)));
  const Field dc = plan_->convolve(*kernel_, Field(angle_grid_, first_moment(phi)));
  Field out(p_.grid);
  std::vector<double> row(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double f0 = activate(p_.activation, c[i] + p_.B);
    const double df0 = activate_derivative(p_.activation, c[i] + p_.B) * dc[i];
    for (std::size_t j = 0; j < ny; ++j) row[j] = (y_[j] - f0) / p_.sigma * Tu.at(i, j);
    const double m = length * simpson(row, hy);
    for (std::size_t j = 0; j < ny; ++j)
      out.at(i, j) = Tu.at(i, j) * df0 * ((y_[j] - f0) / p_.sigma - m);
  }
  return out;
}

double NeuralMap::steady_state_residual(const Field& u) const {
  same_grid(u, p_.grid, "neural model");
  const std::vector<double> f0 = centres(u);
  const std::size_t nx = p_.grid.axis(0).n, ny = p_.grid.axis(1).n;
  double dev = 0.0;
  std::vector<double> xi(ny, 0.0);
  std::vector<char> mask(ny);
  // Gaussian tails underflow far from the centre, so only the effective
  // support of each row is required to be positive.
  for (std::size_t i = 0; i < nx; ++i) {
    double top = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      require(std::isfinite(u.at(i, j)), "steady-state residual: non-finite density");
      top = std::max(top, u.at(i, j));
    }
    require(top > 0.0, "steady-state residual: density must be positive");
    for (std::size_t j = 0; j < ny; ++j) {
      mask[j] = u.at(i, j) >= 1e-6 * top;
      if (!mask[j]) continue;
      const double d = y_[j] - f0[i];
      xi[j] = p_.sigma * std::log(u.at(i, j)) + d * d / 2.0;
    }
    dev = std::max(dev, max_deviation(xi, mask));
  }
  return dev;
}

Field NeuralMap::homogeneous_state() const {
  const double length = p_.grid.axis(0).length();
  const double hy = p_.grid.axis(1).spacing();
  // W * const = const * (discrete kernel mass), matching the FFT path exactly.
  const Field one_conv = plan_->convolve(*kernel_, Field(angle_grid_, 1.0));
  const double mass = one_conv[0];
  const std::size_t ny = y_.size();
  std::vector<double> row(ny), yrow(ny);
  auto mean_activity = [&](double f0) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double d = y_[j] - f0;
      row[j] = std::exp(-d * d / (2.0 * p_.sigma));
      yrow[j] = y_[j] * row[j];
    }
    return simpson(yrow, hy) / simpson(row, hy);
  };
  auto g = [&](double f0) { return activate(p_.activation, mass * mean_activity(f0) / length + p_.B) - f0; };
  double lo = y_.front(), hi = y_.back();
  double glo = g(lo);
  const double ghi = g(hi);
  double f0 = 0.5 * (lo + hi);
  if ((glo >= 0.0) != (ghi >= 0.0)) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      f0 = 0.5 * (lo + hi);
      const double gm = g(f0);
      if ((gm >= 0.0) == (glo >= 0.0)) {
        lo = f0;
        glo = gm;
      } else {
        hi = f0;
      }
    }
    f0 = 0.5 * (lo + hi);
  } else {
    f0 = activate(p_.activation, p_.B);
    for (int it = 0; it < 10000; ++it) {
      const double next = 0.5 * f0 + 0.5 * (g(f0) + f0);
      if (std::abs(next - f0) <= 1e-15 * std::max(1.0, std::abs(f0))) break;
      f0 = next;
    }
  }
  return profile(f0);
}

std::shared_ptr<const FixedPointMap> make_map(const ProblemSpec& p) {
  return std::visit(overloaded{
                        [](const MV1D& m) -> std::shared_ptr<const FixedPointMap> {
                          require(m.grid.dim() == 1, "MV1D: grid must be 1D");
                          return std::make_shared<McKeanVlasovMap>(m);
                        },
                        [](const MV2D& m) -> std::shared_ptr<const FixedPointMap> {
                          require(m.grid.dim() == 2, "MV2D: grid must be 2D");
                          return std::make_shared<McKeanVlasovMap>(m);
                        },
                        [](const CS& c) -> std::shared_ptr<const FixedPointMap> {
                          return std::make_shared<CuckerSmaleMap>(c);
                        },
                        [](const NFP& n) -> std::shared_ptr<const FixedPointMap> {
                          return std::make_shared<NeuralMap>(n);
                        },
                    },
                    p);
}

Field apply_T(const ProblemSpec& p, const Field& u) { return make_map(p)->apply(u); }

Field frechet_T(const ProblemSpec& p, const Field& u, const Field& Tu, const Field& phi) {
  return make_map(p)->frechet(u, Tu, phi);
}

}  // namespace nlfp
