#include "nlfp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nlfp/error.hpp"

namespace nlfp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Closed support test with a relative guard against rounding in |x|.
bool within(double ax, double r) { return ax <= r * (1.0 + 1e-12); }

void check_radius(double r, const char* name) {
  require(r > 0.0 && std::isfinite(r), std::string(name) + ": R must be positive");
}

// Node coordinate; symmetric axes are measured from the centre node so that
// x_i = -x_{n-1-i} exactly.
double node(const Axis& a, std::size_t i) {
  if (a.symmetric() && a.n % 2 == 1) {
    const double c = static_cast<double>((a.n - 1) / 2);
    return (static_cast<double>(i) - c) * a.spacing() + 0.5 * (a.lower + a.upper);
  }
  return a.coord(i);
}

void validate(const Kernel1D& kernel, const Axis& axis) {
  std::visit(overloaded{[](const TopHat& k) { check_radius(k.R, "TopHat"); },
                        [](const Triangle& k) { check_radius(k.R, "Triangle"); },
                        [&](const AttRepTopHat& k) {
                          check_radius(k.R, "AttRepTopHat");
                          if (axis.periodic())
                            require(2.0 * k.R <= 0.5 * axis.length() * (1.0 + 1e-12),
                                    "AttRepTopHat: support 2R exceeds half the torus");
                        },
                        [](const auto&) {}},
             kernel);
}

}  // namespace

double basis(int k, double x, double length) {
  if (k == 0) return 1.0 / std::sqrt(length);
  return std::sqrt(2.0 / length) * std::cos(2.0 * std::numbers::pi * k * x / length);
}

double evaluate(const Kernel1D& kernel, double x, double length) {
  const double ax = std::abs(x);
  return std::visit(
      overloaded{
          [&](const CosineModes& k) {
            double s = 0.0;
            for (const Mode& m : k.modes) s -= m.a * basis(m.k, x, length);
            return s;
          },
          [&](const TopHat& k) { return within(ax, k.R) ? -0.5 / k.R : 0.0; },
          [&](const Triangle& k) {
            return within(ax, k.R) ? -0.5 / k.R * std::max(0.0, 1.0 - ax / k.R) : 0.0;
          },
          [&](const AttRepTopHat& k) {
            if (within(ax, k.R)) return -0.5 / k.R;
            if (within(ax, 2.0 * k.R)) return 1.0 / k.R;
            return 0.0;
          },
          [&](const Quadratic&) { return 0.5 * x * x; },
          [&](const TanhNFP& k) { return k.scale * (1.0 + std::tanh(k.offset - k.steepness * ax)); },
          [&](const CosineNFP& k) {
            double s = 0.0;
            for (const CosineTerm& t : k.terms) s += t.coef * std::cos(t.freq * x);
            return s;
          },
          [&](const Constant& k) { return k.value; },
      },
      kernel);
}

Field sample(const KernelSpec& spec, const GridSpec& grid) {
  Field out(grid);
  if (const auto* k1 = std::get_if<Kernel1D>(&spec.form)) {
    require(grid.dim() == 1, "sample: 1D kernel needs a 1D grid");
    const Axis& a = grid.axis(0);
    validate(*k1, a);
    for (std::size_t i = 0; i < a.n; ++i) out[i] = evaluate(*k1, node(a, i), a.length());
    enforce_periodicity(out);
    return out;
  }
  const auto& k2 = std::get<Separable2D>(spec.form);
  require(grid.dim() == 2, "sample: 2D kernel needs a 2D grid");
  const Axis& ax = grid.axis(0);
  const Axis& ay = grid.axis(1);
  for (const SeparableTerm& t : k2.terms) {
    validate(t.x, ax);
    validate(t.y, ay);
    std::vector<double> fx(ax.n), fy(ay.n);
    for (std::size_t i = 0; i < ax.n; ++i) fx[i] = evaluate(t.x, node(ax, i), ax.length());
    for (std::size_t j = 0; j < ay.n; ++j) fy[j] = evaluate(t.y, node(ay, j), ay.length());
    for (std::size_t i = 0; i < ax.n; ++i)
      for (std::size_t j = 0; j < ay.n; ++j) out.at(i, j) += t.coef * fx[i] * fy[j];
  }
  enforce_periodicity(out);
  return out;
}

double fourier_mode(const KernelSpec& spec, int k, const GridSpec& grid) {
  require(k >= 0, "fourier_mode: k must be non-negative");
  require(grid.dim() == 1 && grid.axis(0).periodic(), "fourier_mode: needs a 1D periodic grid");
  const Field w = sample(spec, grid);
  const Axis& a = grid.axis(0);
  Field prod(grid);
  for (std::size_t i = 0; i < a.n; ++i) prod[i] = w[i] * basis(k, node(a, i), a.length());
  return integrate(prod);
}

std::vector<CriticalKappa> critical_kappas(const KernelSpec& spec, const GridSpec& grid, int k_max,
                                           double sigma) {
  const double length = grid.axis(0).length();
  std::vector<CriticalKappa> out;
  for (int k = 1; k <= k_max; ++k) {
    const double wk = fourier_mode(spec, k, grid);
    if (wk < -1e-10) out.push_back({k, -sigma * std::sqrt(2.0 * length) / wk});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CriticalKappa& a, const CriticalKappa& b) { return a.kappa < b.kappa; });
  return out;
}

}  // namespace nlfp
