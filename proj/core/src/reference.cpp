#include "nlfp/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlfp/error.hpp"

namespace nlfp {

namespace {

constexpr int kBesselNodes = 256;

// (1/pi) int_0^pi exp(a (cos t - 1)) cos(n t) dt; the integrand is smooth,
// even and periodic, so the trapezoidal rule converges geometrically.
double scaled_bessel(int n, double a) {
  const double h = std::numbers::pi / kBesselNodes;
  double s = 0.5 * (1.0 + std::exp(-2.0 * a) * (n % 2 == 0 ? 1.0 : -1.0));
  for (int j = 1; j < kBesselNodes; ++j) {
    const double t = j * h;
    s += std::exp(a * (std::cos(t) - 1.0)) * std::cos(n * t);
  }
  return s / kBesselNodes;
}

}  // namespace

double bessel_I(int n, double a) {
  require(n == 0 || n == 1, "bessel_I: only orders 0 and 1 are supported");
  require(a >= 0.0 && a <= 700.0, "bessel_I: argument must lie in [0, 700]");
  return std::exp(a) * scaled_bessel(n, a);
}

double bessel_ratio(double a) {
  require(a >= 0.0 && std::isfinite(a), "bessel_ratio: argument must be finite and non-negative");
  return scaled_bessel(1, a) / scaled_bessel(0, a);
}

KuramotoState kuramoto_reference(double kappa, int k, const GridSpec& grid, double sigma) {
  require(grid.dim() == 1 && grid.axis(0).periodic(), "kuramoto_reference: needs a 1D periodic grid");
  require(k >= 1, "kuramoto_reference: k must be positive");
  require(sigma > 0.0 && kappa >= 0.0, "kuramoto_reference: need sigma > 0 and kappa >= 0");
  const Axis& ax = grid.axis(0);
  const double length = ax.length();
  const double c = kappa / sigma * std::sqrt(2.0 / length);

  KuramotoState st;
  // Nontrivial root exists iff the slope of M at 0 (c / 2) exceeds 1.
  if (c > 2.0) {
    const double starts[] = {1.0, 5.0, 20.0, 0.1};
    for (double a : starts) {
      double best = a;
      double best_res = std::abs(c * bessel_ratio(a) - a);
      for (int it = 0; it < 100 && best_res > 1e-15; ++it) {
        const double r = bessel_ratio(a);
        const double f = c * r - a;
        const double df = c * (1.0 - r / a - r * r) - 1.0;
        double next = a - f / df;
        if (!(next > 0.0)) next = 0.5 * a;
        a = next;
        const double res = std::abs(c * bessel_ratio(a) - a);
        if (res < best_res) {
          best_res = res;
          best = a;
        }
      }
      if (best > 1e-8) {
        st.a = best;
        st.residual = best_res;
        st.nontrivial = true;
        break;
      }
    }
  }
  st.u = Field(grid);
  const double norm0 = length * scaled_bessel(0, st.a);
  for (std::size_t i = 0; i < ax.n; ++i) {
    const double x = ax.coord(i);
    st.u[i] = std::exp(st.a * (std::cos(2.0 * std::numbers::pi * k * x / length) - 1.0)) / norm0;
  }
  enforce_periodicity(st.u);
  return st;
}

double cs_velocity_equation(double alpha, double sigma, double X, double ubar, std::size_t n) {
  require(n >= 3 && n % 2 == 1, "cs_velocity_equation: need an odd point count");
  require(sigma > 0.0 && X > 0.0, "cs_velocity_equation: need sigma > 0 and X > 0");
  const double h = 2.0 * X / static_cast<double>(n - 1);
  auto exponent = [&](double x) {
    const double x2 = x * x;
    return -(alpha * x2 * x2 / 4.0 + (1.0 - alpha) * x2 / 2.0 - ubar * x) / sigma;
  };
  double top = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, exponent(-X + static_cast<double>(i) * h));
  double z = 0.0, m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -X + static_cast<double>(i) * h;
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double e = std::exp(exponent(x) - top);
    z += w * e;
    m += w * x * e;
  }
  return m / z - ubar;
}

VelocityRoot cs_reference_velocity(double alpha, double sigma, double X, int sign_hint, std::size_t n,
                                   double ubar_max, std::size_t scan) {
  if (sign_hint == 0) return {0.0, true};
  require(scan >= 2 && ubar_max > 0.0, "cs_reference_velocity: invalid scan");
  auto g = [&](double v) { return cs_velocity_equation(alpha, sigma, X, v, n); };
  // Scan downwards from ubar_max and stop at the first sign change.
  const double du = ubar_max / static_cast<double>(scan);
  double hi = ubar_max;
  double ghi = g(hi);
  for (std::size_t s = scan; s-- > 1;) {
    const double lo = du * static_cast<double>(s);
    const double glo = g(lo);
    if ((glo > 0.0) != (ghi > 0.0) || glo == 0.0) {
      double a = lo, b = hi, ga = glo;
      for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
        const double mid = 0.5 * (a + b);
        const double gm = g(mid);
        if ((gm > 0.0) == (ga > 0.0) && gm != 0.0) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      const double root = 0.5 * (a + b);
      return {sign_hint > 0 ? root : -root, true};
    }
    hi = lo;
    ghi = glo;
  }
  return {0.0, false};
}

double error_vs_reference(const Field& u_n, const Field& u_ref, NormKind p) {
  return distance(upsample(u_n, u_ref.grid), u_ref, p);
}

}  // namespace nlfp
