#include "nlfp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlfp/error.hpp"
#include "nlfp/spline.hpp"

namespace nlfp {

bool Axis::symmetric() const { return std::abs(lower + upper) <= spacing(); }

GridSpec::GridSpec(Axis x) : dim_(1), axes_{x, Axis{}} { validate(); }

GridSpec::GridSpec(Axis x, Axis y) : dim_(2), axes_{x, y} { validate(); }

GridSpec GridSpec::torus(std::size_t n, double length) {
  return GridSpec(Axis{n, -0.5 * length, 0.5 * length, Topology::periodic});
}

GridSpec GridSpec::torus2d(std::size_t n, double length) {
  const Axis a{n, -0.5 * length, 0.5 * length, Topology::periodic};
  return GridSpec(a, a);
}

GridSpec GridSpec::interval(std::size_t n, double lower, double upper) {
  return GridSpec(Axis{n, lower, upper, Topology::truncated});
}

void GridSpec::validate() const {
  for (std::size_t d = 0; d < dim_; ++d) {
    const Axis& a = axes_[d];
    require(a.n >= 3, "grid axis " + std::to_string(d) + ": need at least 3 nodes");
    require(a.upper > a.lower, "grid axis " + std::to_string(d) + ": upper must exceed lower");
  }
}

double GridSpec::volume() const {
  double v = 1.0;
  for (std::size_t d = 0; d < dim_; ++d) v *= axes_[d].length();
  return v;
}

double GridSpec::cell() const {
  double v = 1.0;
  for (std::size_t d = 0; d < dim_; ++d) v *= axes_[d].spacing();
  return v;
}

bool GridSpec::same_domain(const GridSpec& other) const {
  if (dim_ != other.dim_) return false;
  for (std::size_t d = 0; d < dim_; ++d) {
    const Axis& a = axes_[d];
    const Axis& b = other.axes_[d];
    const double tol = 1e-12 * std::max(1.0, a.length());
    if (a.topology != b.topology || std::abs(a.lower - b.lower) > tol ||
        std::abs(a.upper - b.upper) > tol)
      return false;
  }
  return true;
}

Field::Field(GridSpec g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  require(values.size() == grid.size(), "field: value count does not match grid");
}

std::vector<double> coordinates(const Axis& axis) {
  std::vector<double> x(axis.n);
  for (std::size_t i = 0; i < axis.n; ++i) x[i] = axis.coord(i);
  x.back() = axis.upper;
  return x;
}

std::vector<double> simpson_weights(const Axis& axis) {
  require(axis.n % 2 == 1, "Simpson's rule needs an odd node count (axis has " +
                               std::to_string(axis.n) + ")");
  const double h = axis.spacing();
  std::vector<double> w(axis.n);
  for (std::size_t i = 0; i < axis.n; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  w.front() = h / 3.0;
  w.back() = h / 3.0;
  return w;
}

double simpson(std::span<const double> samples, double dx) {
  const std::size_t n = samples.size();
  require(n >= 3 && n % 2 == 1, "Simpson's rule needs an odd node count, got " + std::to_string(n));
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) (i % 2 == 1 ? odd : even) += samples[i];
  return dx / 3.0 * (samples.front() + samples.back() + 4.0 * odd + 2.0 * even);
}

double integrate(const Field& f) {
  const GridSpec& g = f.grid;
  for (std::size_t d = 0; d < g.dim(); ++d)
    require(g.axis(d).n % 2 == 1, "integrate: axis " + std::to_string(d) +
                                      " has an even node count; Simpson's rule needs odd");
  if (g.dim() == 1) return simpson(f.values, g.axis(0).spacing());
  const std::size_t nx = g.axis(0).n, ny = g.axis(1).n;
  const double hy = g.axis(1).spacing();
  std::vector<double> rows(nx);
  for (std::size_t i = 0; i < nx; ++i)
    rows[i] = simpson(std::span<const double>(f.values).subspan(i * ny, ny), hy);
  return simpson(rows, g.axis(0).spacing());
}

namespace {

std::vector<double> resample_line(std::span<const double> y, const Axis& from, const Axis& to) {
  CubicSpline spline(from.lower, from.spacing(), std::vector<double>(y.begin(), y.end()),
                     from.periodic());
  std::vector<double> out(to.n);
  for (std::size_t i = 0; i < to.n; ++i) out[i] = spline(to.coord(i));
  if (to.periodic()) out.back() = out.front();
  out.front() = y.front();
  if (!to.periodic()) out.back() = y.back();
  return out;
}

}  // namespace

Field upsample(const Field& f, const GridSpec& target) {
  require(f.grid.same_domain(target), "upsample: target grid covers a different domain");
  if (f.grid == target) return f;
  for (std::size_t d = 0; d < f.grid.dim(); ++d)
    require(f.grid.axis(d).n >= 4, "upsample: need at least 4 nodes per axis");

  if (f.grid.dim() == 1) return Field(target, resample_line(f.values, f.grid.axis(0), target.axis(0)));

  const Axis& sx = f.grid.axis(0);
  const Axis& sy = f.grid.axis(1);
  const Axis& tx = target.axis(0);
  const Axis& ty = target.axis(1);
  // Rows first (along y), then columns (along x).
  std::vector<double> stage(sx.n * ty.n);
  for (std::size_t i = 0; i < sx.n; ++i) {
    auto row = resample_line(std::span<const double>(f.values).subspan(i * sy.n, sy.n), sy, ty);
    std::copy(row.begin(), row.end(), stage.begin() + static_cast<std::ptrdiff_t>(i * ty.n));
  }
  Field out(target);
  std::vector<double> column(sx.n);
  for (std::size_t j = 0; j < ty.n; ++j) {
    for (std::size_t i = 0; i < sx.n; ++i) column[i] = stage[i * ty.n + j];
    auto col = resample_line(column, sx, tx);
    for (std::size_t i = 0; i < tx.n; ++i) out.at(i, j) = col[i];
  }
  return out;
}

double norm(std::span<const double> v, NormKind p) {
  if (p == NormKind::linf) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  // Scaled accumulation avoids overflow for large entries.
  double scale = 0.0, ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    const double a = std::abs(x);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double norm(const Field& f, NormKind p, bool weighted) {
  const double n = norm(f.values, p);
  if (weighted && p == NormKind::l2) return n * std::sqrt(f.grid.cell());
  return n;
}

double distance(const Field& a, const Field& b, NormKind p, bool weighted) {
  require(a.size() == b.size(), "distance: size mismatch");
  Field d(a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d, p, weighted);
}

Field homogeneous(const GridSpec& grid) { return Field(grid, 1.0 / grid.volume()); }

void enforce_periodicity(Field& f) {
  const GridSpec& g = f.grid;
  if (g.dim() == 1) {
    if (g.axis(0).periodic()) f.values.back() = f.values.front();
    return;
  }
  const std::size_t nx = g.axis(0).n, ny = g.axis(1).n;
  if (g.axis(1).periodic())
    for (std::size_t i = 0; i < nx; ++i) f.at(i, ny - 1) = f.at(i, 0);
  if (g.axis(0).periodic())
    for (std::size_t j = 0; j < ny; ++j) f.at(nx - 1, j) = f.at(0, j);
}

}  // namespace nlfp
