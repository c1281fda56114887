// Micro benchmarks of the hot paths: FFT convolution, one application of T and
// its Frechet derivative, and a full Newton-Krylov solve.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "nlfp/continuation.hpp"
#include "nlfp/convolution.hpp"
#include "nlfp/models.hpp"
#include "nlfp/solver.hpp"

namespace {

using namespace nlfp;

constexpr double pi = std::numbers::pi;

MV1D kuramoto(std::size_t n) {
  MV1D p;
  p.kappa = 3.0;
  p.kernel = CosineModes{{Mode{1.0, 1}}};
  p.grid = GridSpec::torus(n, pi);
  return p;
}

void BM_Convolve1D(benchmark::State& state) {
  const GridSpec grid = GridSpec::torus(static_cast<std::size_t>(state.range(0)), pi);
  const ConvPlan plan(grid);
  const Spectrum w = plan.transform(sample(TopHat{pi / 12}, grid));
  const Field u = cosine_guess(grid, 1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(plan.convolve(w, u));
}
BENCHMARK(BM_Convolve1D)->Arg(501)->Arg(2001)->Arg(8001);

void BM_Convolve2D(benchmark::State& state) {
  const GridSpec grid = GridSpec::torus2d(static_cast<std::size_t>(state.range(0)), pi);
  const ConvPlan plan(grid);
  const Separable2D k{{{1.0, CosineModes{{Mode{1.0, 1}}}, Constant{1.0}}}};
  const Spectrum w = plan.transform(sample(k, grid));
  const Field u = homogeneous(grid);
  for (auto _ : state) benchmark::DoNotOptimize(plan.convolve(w, u));
}
BENCHMARK(BM_Convolve2D)->Arg(129)->Arg(257);

void BM_ApplyT(benchmark::State& state) {
  const McKeanVlasovMap map(kuramoto(static_cast<std::size_t>(state.range(0))));
  const Field u = cosine_guess(map.grid(), 1, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(map.apply(u));
}
BENCHMARK(BM_ApplyT)->Arg(501)->Arg(2001)->Arg(8001);

void BM_Frechet(benchmark::State& state) {
  const McKeanVlasovMap map(kuramoto(static_cast<std::size_t>(state.range(0))));
  const Field u = cosine_guess(map.grid(), 1, 0.5);
  const Field tu = map.apply(u);
  const Field phi = cosine_guess(map.grid(), 2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(map.frechet(u, tu, phi));
}
BENCHMARK(BM_Frechet)->Arg(501)->Arg(2001)->Arg(8001);

void BM_NewtonKuramoto(benchmark::State& state) {
  const MV1D p = kuramoto(static_cast<std::size_t>(state.range(0)));
  const Field u0 = cosine_guess(p.grid, 1, 1.0);
  NewtonConfig cfg;
  cfg.jvp = state.range(1) == 0 ? JvpMode::analytic : JvpMode::central_difference;
  for (auto _ : state) benchmark::DoNotOptimize(newton_solve(p, u0, cfg));
}
BENCHMARK(BM_NewtonKuramoto)->Args({2001, 0})->Args({2001, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
