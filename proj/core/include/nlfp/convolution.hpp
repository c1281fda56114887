#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "nlfp/grid.hpp"

namespace nlfp {

/// Discrete Fourier transform of the independent (n - 1 per axis) block of a
/// periodic field. Used to cache a fixed interaction kernel across calls.
struct Spectrum {
  GridSpec grid;
  std::vector<std::complex<double>> data;
};

/// FFT workspace for periodic convolution on one grid. Immutable after
/// construction; convolve calls allocate their own scratch, so one plan may be
/// shared across threads.
class ConvPlan {
 public:
  explicit ConvPlan(const GridSpec& grid);
  ~ConvPlan();
  ConvPlan(const ConvPlan&) = delete;
  ConvPlan& operator=(const ConvPlan&) = delete;

  const GridSpec& grid() const { return grid_; }

  Spectrum transform(const Field& f) const;

  /// Delta-x scaled circular convolution, shifted for symmetric intervals,
  /// periodic edges restored.
  Field convolve(const Spectrum& f, const Field& g) const;
  Field convolve(const Field& f, const Field& g) const;

 private:
  struct Impl;
  GridSpec grid_;
  std::unique_ptr<Impl> impl_;
};

Field periodic_convolve(const ConvPlan& plan, const Field& f, const Field& g);
Field periodic_convolve_2d(const ConvPlan& plan, const Field& f, const Field& g);

/// O(M^2) (1D) or O(M^4) (2D) direct circular sum with the same conventions.
/// Reference implementation for testing the FFT path.
Field brute_convolve(const Field& f, const Field& g);

}  // namespace nlfp
