#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace nlfp {

enum class Topology { periodic, truncated };

/// One axis of a uniform grid. Both endpoints are stored; on a periodic axis
/// the last node duplicates the first, so there are n - 1 independent samples.
struct Axis {
  std::size_t n = 0;
  double lower = 0.0;
  double upper = 0.0;
  Topology topology = Topology::periodic;

  double length() const { return upper - lower; }
  double spacing() const { return (upper - lower) / static_cast<double>(n - 1); }
  double coord(std::size_t i) const { return lower + static_cast<double>(i) * spacing(); }
  std::size_t independent() const { return topology == Topology::periodic ? n - 1 : n; }
  bool periodic() const { return topology == Topology::periodic; }
  /// Domain centred on zero (lower == -upper to within one spacing).
  bool symmetric() const;

  friend bool operator==(const Axis&, const Axis&) = default;
};

class GridSpec {
 public:
  GridSpec() = default;
  explicit GridSpec(Axis x);
  GridSpec(Axis x, Axis y);

  /// Torus (-L/2, L/2] sampled with n nodes (endpoint included).
  static GridSpec torus(std::size_t n, double length);
  static GridSpec torus2d(std::size_t n, double length);
  /// Truncated line [lower, upper].
  static GridSpec interval(std::size_t n, double lower, double upper);

  std::size_t dim() const { return dim_; }
  const Axis& axis(std::size_t d) const { return axes_[d]; }
  std::size_t size() const { return dim_ == 1 ? axes_[0].n : axes_[0].n * axes_[1].n; }
  /// Product of side lengths.
  double volume() const;
  /// Product of spacings (cell measure).
  double cell() const;
  bool same_domain(const GridSpec& other) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  void validate() const;

  std::size_t dim_ = 0;
  std::array<Axis, 2> axes_{};
};

/// Samples of a real function on a grid. 2D values are x-major
/// (index = i * ny + j, i along axis 0).
struct Field {
  GridSpec grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(GridSpec g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}
  Field(GridSpec g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(std::size_t i, std::size_t j) { return values[i * grid.axis(1).n + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid.axis(1).n + j]; }
  std::span<const double> span() const { return values; }
  std::span<double> span() { return values; }
};

/// Node coordinates of axis d.
std::vector<double> coordinates(const Axis& axis);

/// Composite Simpson 1/3 weights for an odd node count (includes spacing).
std::vector<double> simpson_weights(const Axis& axis);

/// Composite Simpson integral; tensor product of 1D rules in 2D.
double integrate(const Field& f);
/// 1D Simpson integral of raw samples with spacing dx (odd count).
double simpson(std::span<const double> samples, double dx);

/// Cubic-spline resampling of f onto target (periodic ends on periodic axes,
/// not-a-knot on truncated ones).
Field upsample(const Field& f, const GridSpec& target);

enum class NormKind { l2, linf };

double norm(std::span<const double> v, NormKind p);
/// l2 norm scaled by sqrt(cell measure) when weighted; linf is unaffected.
double norm(const Field& f, NormKind p, bool weighted = false);
double distance(const Field& a, const Field& b, NormKind p, bool weighted = false);

/// Constant density 1 / |domain|.
Field homogeneous(const GridSpec& grid);

/// Copy of the first sample into the last on every periodic axis.
void enforce_periodicity(Field& f);

}  // namespace nlfp
