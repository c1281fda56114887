#pragma once

#include <type_traits>
#include <variant>
#include <vector>

#include "nlfp/grid.hpp"

namespace nlfp {

/// One term of W = -sum a_i w_{k_i}; w_k is the orthonormal cosine basis on
/// the torus, w_0 the normalised constant.
struct Mode {
  double a = 1.0;
  int k = 1;
};

struct CosineModes {
  std::vector<Mode> modes;
};

/// -1/(2R) on |x| <= R.
struct TopHat {
  double R = 0.0;
};

/// -(1/(2R))(1 - |x|/R) on |x| <= R.
struct Triangle {
  double R = 0.0;
};

/// -1/(2R) on |x| <= R, 1/R on R < |x| <= 2R.
struct AttRepTopHat {
  double R = 0.0;
};

/// |x|^2 / 2. Only evaluated pointwise; the Cucker-Smale map expands it.
struct Quadratic {};

/// scale * (1 + tanh(offset - steepness |x|)).
struct TanhNFP {
  double scale = 1.0;
  double steepness = 1.0;
  double offset = 0.0;
};

/// sum c_i cos(f_i x); a term with f_i = 0 is the constant part.
struct CosineTerm {
  double coef = 0.0;
  double freq = 0.0;
};

struct CosineNFP {
  std::vector<CosineTerm> terms;
};

struct Constant {
  double value = 1.0;
};

using Kernel1D =
    std::variant<CosineModes, TopHat, Triangle, AttRepTopHat, Quadratic, TanhNFP, CosineNFP, Constant>;

/// coef * X(x1) * Y(x2).
struct SeparableTerm {
  double coef = 1.0;
  Kernel1D x;
  Kernel1D y;
};

/// Sum of separable products of 1D parts.
struct Separable2D {
  std::vector<SeparableTerm> terms;
};

struct KernelSpec {
  std::variant<Kernel1D, Separable2D> form;

  KernelSpec() = default;
  template <class K>
    requires std::is_constructible_v<Kernel1D, K>
  KernelSpec(K k) : form(Kernel1D(std::move(k))) {}
  KernelSpec(Separable2D k) : form(std::move(k)) {}

  bool is_2d() const { return std::holds_alternative<Separable2D>(form); }
};

/// Orthonormal cosine basis on a torus of length L centred at 0.
double basis(int k, double x, double length);

/// Pointwise value of a 1D kernel on a torus of length L.
double evaluate(const Kernel1D& kernel, double x, double length);

/// Samples W on the grid. Node coordinates are taken relative to the centre of
/// symmetric axes so mirrored nodes see identical |x|; the closed condition
/// |x| <= R is used at discontinuities.
Field sample(const KernelSpec& spec, const GridSpec& grid);

/// Integral of W against w_k by Simpson's rule on a 1D periodic grid.
double fourier_mode(const KernelSpec& spec, int k, const GridSpec& grid);

struct CriticalKappa {
  int k = 0;
  double kappa = 0.0;
};

/// kappa*_k = -sigma sqrt(2L) / W~(k) for every 1 <= k <= k_max with a
/// negative mode, ascending in kappa. Modes within 1e-10 of zero are treated
/// as vanishing.
std::vector<CriticalKappa> critical_kappas(const KernelSpec& spec, const GridSpec& grid, int k_max,
                                           double sigma = 1.0);

}  // namespace nlfp
