#include "nlfp/convolution.hpp"

#include <fftw3.h>

#include <cassert>
#include <cmath>
#include <mutex>
#include <string>

#include "nlfp/error.hpp"

namespace nlfp {

namespace {

// The FFTW planner is not thread safe; execution on caller-owned arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Circular offset between the raw circular sum and the node ordering.
std::size_t output_shift(const Axis& a) {
  const std::size_t m = a.n - 1;
  if (a.symmetric()) return m / 2;
  const double offset = -a.lower / a.spacing();
  require(std::abs(offset) < 1e-9, "periodic convolution: domain must be centred on 0 or start at 0");
  return 0;
}

void check_periodic(const GridSpec& grid) {
  for (std::size_t d = 0; d < grid.dim(); ++d) {
    require(grid.axis(d).periodic(),
            "periodic convolution: axis " + std::to_string(d) + " is not periodic");
    require((grid.axis(d).n - 1) % 2 == 0 || !grid.axis(d).symmetric(),
            "periodic convolution: symmetric interval needs an odd node count");
  }
}

}  // namespace

struct ConvPlan::Impl {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::size_t m0 = 0;
  std::size_t m1 = 1;
  std::size_t shift0 = 0;
  std::size_t shift1 = 0;
};

ConvPlan::ConvPlan(const GridSpec& grid) : grid_(grid), impl_(std::make_unique<Impl>()) {
  require(grid.dim() == 1 || grid.dim() == 2, "ConvPlan: grid must be 1D or 2D");
  check_periodic(grid);
  impl_->m0 = grid.axis(0).n - 1;
  impl_->shift0 = output_shift(grid.axis(0));
  if (grid.dim() == 2) {
    impl_->m1 = grid.axis(1).n - 1;
    impl_->shift1 = output_shift(grid.axis(1));
  }
  const std::size_t total = impl_->m0 * impl_->m1;
  std::vector<std::complex<double>> scratch(total);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  if (grid.dim() == 1) {
    const int n = static_cast<int>(impl_->m0);
    impl_->forward = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
    impl_->backward = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
  } else {
    const int n0 = static_cast<int>(impl_->m0), n1 = static_cast<int>(impl_->m1);
    impl_->forward = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, flags);
    impl_->backward = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, flags);
  }
  require(impl_->forward && impl_->backward, "ConvPlan: FFTW planning failed");
}

ConvPlan::~ConvPlan() {
  if (!impl_) return;
  std::lock_guard lock(planner_mutex());
  if (impl_->forward) fftw_destroy_plan(impl_->forward);
  if (impl_->backward) fftw_destroy_plan(impl_->backward);
}

Spectrum ConvPlan::transform(const Field& f) const {
  require(f.grid == grid_, "convolution: field grid does not match the plan");
  const std::size_t m0 = impl_->m0, m1 = impl_->m1;
  const std::size_t ny = grid_.dim() == 2 ? grid_.axis(1).n : 1;
  Spectrum s{grid_, std::vector<std::complex<double>>(m0 * m1)};
  for (std::size_t i = 0; i < m0; ++i)
    for (std::size_t j = 0; j < m1; ++j) s.data[i * m1 + j] = f.values[i * ny + j];
  auto* buf = reinterpret_cast<fftw_complex*>(s.data.data());
  fftw_execute_dft(impl_->forward, buf, buf);
  return s;
}

Field ConvPlan::convolve(const Spectrum& f, const Field& g) const {
  require(f.grid == grid_ && g.grid == grid_, "convolution: field grid does not match the plan");
  Spectrum h = transform(g);
  for (std::size_t k = 0; k < h.data.size(); ++k) h.data[k] *= f.data[k];
  auto* buf = reinterpret_cast<fftw_complex*>(h.data.data());
  fftw_execute_dft(impl_->backward, buf, buf);

  const std::size_t m0 = impl_->m0, m1 = impl_->m1;
  const std::size_t ny = grid_.dim() == 2 ? grid_.axis(1).n : 1;
  const double scale = grid_.cell() / static_cast<double>(m0 * m1);
  Field out(grid_);
#ifndef NDEBUG
  double max_real = 0.0, max_imag = 0.0;
#endif
  for (std::size_t i = 0; i < m0; ++i) {
    const std::size_t si = (i + impl_->shift0) % m0;
    for (std::size_t j = 0; j < m1; ++j) {
      const std::size_t sj = (j + impl_->shift1) % m1;
      const std::complex<double> v = h.data[si * m1 + sj];
      out.values[i * ny + j] = scale * v.real();
#ifndef NDEBUG
      max_real = std::max(max_real, std::abs(v.real()));
      max_imag = std::max(max_imag, std::abs(v.imag()));
#endif
    }
  }
#ifndef NDEBUG
  assert(max_imag <= 1e-12 * std::max(max_real, 1e-300) + 1e-300);
#endif
  enforce_periodicity(out);
  return out;
}

Field ConvPlan::convolve(const Field& f, const Field& g) const { return convolve(transform(f), g); }

Field periodic_convolve(const ConvPlan& plan, const Field& f, const Field& g) {
  require(plan.grid().dim() == 1, "periodic_convolve: plan is not 1D");
  return plan.convolve(f, g);
}

Field periodic_convolve_2d(const ConvPlan& plan, const Field& f, const Field& g) {
  require(plan.grid().dim() == 2, "periodic_convolve_2d: plan is not 2D");
  return plan.convolve(f, g);
}

Field brute_convolve(const Field& f, const Field& g) {
  require(f.grid == g.grid, "brute_convolve: grid mismatch");
  const GridSpec& grid = f.grid;
  check_periodic(grid);
  const double scale = grid.cell();
  Field out(grid);
  if (grid.dim() == 1) {
    const std::size_t m = grid.axis(0).n - 1;
    const std::size_t s = output_shift(grid.axis(0));
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t n = 0; n < m; ++n) acc += f.values[n] * g.values[(i + s + m - n) % m];
      out.values[i] = scale * acc;
    }
  } else {
    const std::size_t m0 = grid.axis(0).n - 1, m1 = grid.axis(1).n - 1;
    const std::size_t ny = grid.axis(1).n;
    const std::size_t s0 = output_shift(grid.axis(0)), s1 = output_shift(grid.axis(1));
    for (std::size_t i = 0; i < m0; ++i)
      for (std::size_t j = 0; j < m1; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < m0; ++a) {
          const std::size_t gi = (i + s0 + m0 - a) % m0;
          for (std::size_t b = 0; b < m1; ++b)
            acc += f.values[a * ny + b] * g.values[gi * ny + (j + s1 + m1 - b) % m1];
        }
        out.values[i * ny + j] = scale * acc;
      }
  }
  enforce_periodicity(out);
  return out;
}

}  // namespace nlfp
