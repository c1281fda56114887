#include "nlfp/spline.hpp"

#include <cmath>

#include "nlfp/error.hpp"

namespace nlfp {

void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> super, std::span<double> rhs) {
  const std::size_t n = diag.size();
  require(sub.size() == n && super.size() == n && rhs.size() == n, "tridiagonal: size mismatch");
  if (n == 0) return;
  std::vector<double> c(n);
  double beta = diag[0];
  require(beta != 0.0, "tridiagonal: zero pivot");
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = super[i - 1] / beta;
    beta = diag[i] - sub[i] * c[i];
    require(beta != 0.0, "tridiagonal: zero pivot");
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

void solve_cyclic_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> super, std::span<double> rhs) {
  const std::size_t n = diag.size();
  require(n >= 3, "cyclic tridiagonal: need at least 3 unknowns");
  // Sherman-Morrison on the corner entries.
  const double alpha = super[n - 1];  // row n-1, column 0
  const double beta = sub[0];         // row 0, column n-1
  const double gamma = -diag[0];
  std::vector<double> a(sub.begin(), sub.end());
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> c(super.begin(), super.end());
  d[0] -= gamma;
  d[n - 1] -= alpha * beta / gamma;
  a[0] = 0.0;
  c[n - 1] = 0.0;

  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  solve_tridiagonal(a, d, c, rhs);
  solve_tridiagonal(a, d, c, u);
  const double vx = rhs[0] + beta / gamma * rhs[n - 1];
  const double vz = u[0] + beta / gamma * u[n - 1];
  const double factor = vx / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= factor * u[i];
}

CubicSpline::CubicSpline(double x0, double dx, std::vector<double> y, bool periodic)
    : x0_(x0), dx_(dx), periodic_(periodic), y_(std::move(y)) {
  const std::size_t n = y_.size();
  require(n >= 4, "spline: need at least 4 nodes");
  require(dx_ > 0.0, "spline: spacing must be positive");
  m_.assign(n, 0.0);
  const double scale = 6.0 / (dx_ * dx_);

  if (periodic_) {
    const std::size_t m = n - 1;
    std::vector<double> sub(m, 1.0), diag(m, 4.0), super(m, 1.0), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double prev = y_[(i + m - 1) % m];
      const double next = y_[(i + 1) % m];
      rhs[i] = scale * (next - 2.0 * y_[i] + prev);
    }
    solve_cyclic_tridiagonal(sub, diag, super, rhs);
    for (std::size_t i = 0; i < m; ++i) m_[i] = rhs[i];
    m_[m] = m_[0];
    return;
  }

  // Not-a-knot on a uniform grid: M0 = 2 M1 - M2 and M_{n-1} = 2 M_{n-2} - M_{n-3},
  // which turns the first and last interior rows into 6 M = r.
  const std::size_t k = n - 2;
  std::vector<double> sub(k, 1.0), diag(k, 4.0), super(k, 1.0), rhs(k);
  for (std::size_t i = 0; i < k; ++i) rhs[i] = scale * (y_[i + 2] - 2.0 * y_[i + 1] + y_[i]);
  diag[0] = 6.0;
  super[0] = 0.0;
  diag[k - 1] = 6.0;
  sub[k - 1] = 0.0;
  if (k == 1) diag[0] = 6.0;
  solve_tridiagonal(sub, diag, super, rhs);
  for (std::size_t i = 0; i < k; ++i) m_[i + 1] = rhs[i];
  m_[0] = 2.0 * m_[1] - m_[2];
  m_[n - 1] = 2.0 * m_[n - 2] - m_[n - 3];
}

double CubicSpline::operator()(double x) const {
  const std::size_t n = y_.size();
  double s = (x - x0_) / dx_;
  if (periodic_) {
    const double period = static_cast<double>(n - 1);
    s = std::fmod(s, period);
    if (s < 0.0) s += period;
  }
  double cell = std::floor(s);
  if (cell < 0.0) cell = 0.0;
  if (cell > static_cast<double>(n - 2)) cell = static_cast<double>(n - 2);
  const auto i = static_cast<std::size_t>(cell);
  const double t = s - cell;
  if (std::abs(t) < 1e-13) return y_[i];
  if (std::abs(t - 1.0) < 1e-13) return y_[i + 1];
  const double u = 1.0 - t;
  return u * y_[i] + t * y_[i + 1] +
         dx_ * dx_ / 6.0 * ((u * u * u - u) * m_[i] + (t * t * t - t) * m_[i + 1]);
}

}  // namespace nlfp
