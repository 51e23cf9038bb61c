#pragma once

#include <functional>
#include <vector>

#include "nlab/geometry.hpp"

namespace nlab {

// One mid-field quadrature cell: lattice offset, its point, and the exact
// integral of |y|^{-n-sigma} over cell ∩ {r_near <= |y| <= r_far}. The
// (2-sigma) normalization is NOT included in w; it is carried explicitly by
// the evaluators so sigma -> 2 sweeps stay finite.
struct MidCell {
  IVec2 offset;
  Vec2 y;
  double w;
};

// Three-region quadrature for (2-sigma) ∫ f(y) |y|^{-n-sigma} dy:
//   near  |y| <  r_near : closed forms on the quadratic model of delta2 u
//   mid   r_near..r_far : product quadrature, exact cell weights (clipped)
//   far   |y| >  r_far  : analytic tail from the exterior closed form
// r_near is snapped up to a half-integer multiple of h so that in 1D the
// inner boundary is cell-aligned (no partially sampled inner cells).
struct QuadratureScheme {
  int dim = 1;
  double h = 0.0;
  double sigma = 1.5;
  double r_near = 0.0;  // effective (snapped) radius
  double r_far = 3.0;
  std::vector<MidCell> cells;

  static const QuadratureScheme& get(int dim, double h, double sigma,
                                     double r_far, double r_near_request = 0.0);
  static QuadratureScheme make(int dim, double h, double sigma, double r_far,
                               double r_near_request = 0.0);

  // closed-form ∫_{R1<|y|<R2} |y|^{-n-sigma} dy (no (2-sigma) factor)
  double shell_mass(double R1, double R2) const;
  // (2-sigma) ∫_{|y|>R} |y|^{-n-sigma} dy
  double tail_factor(double R) const;

  // near-field closed forms; all include the (2-sigma) normalization.
  // A is the quadratic model of delta2 u: delta2 q(x,y) = y^T A y.
  double near_linear(double abar, const SymMat& A) const;
  double near_extremal(bool plus, double lam, double Lam, const SymMat& A) const;

  // diagonal `mass`: |coefficient of u(x)| in the a==1 evaluation, used for
  // monotone pseudo-time steps
  double unit_diagonal_mass() const;

  double sum_cell_weights() const {
    double s = 0;
    for (const auto& c : cells) s += c.w;
    return s;
  }
};

// exact integral of |y|^{-n-sigma} over an axis-aligned cell clipped to the
// annulus r1 <= |y| <= r2 (2D uses piecewise-polar integration with
// closed-form radial parts)
double cell_annulus_integral(int dim, Vec2 lo, Vec2 hi, double r1, double r2, double sigma);

// ∫_R^∞ f(rho) d rho over dyadic shells; f must decay integrably
template <class F>
double dyadic_radial_integrate(F&& f, double R, double rel_tol = 1e-13, int max_shells = 400) {
  double acc = 0.0;
  double a = R;
  for (int k = 0; k < max_shells; ++k) {
    double b = 2.0 * a;
    double part = gauss_integrate(f, a, b, 16);
    acc += part;
    if (k > 4 && std::abs(part) < rel_tol * (std::abs(acc) + 1e-300)) break;
    a = b;
  }
  return acc;
}

// ∫_a^b f with the interval split at the given breakpoints (clamped, sorted)
double segmented_integrate(const std::function<double(double)>& f, double a, double b,
                           std::vector<double> breakpoints, int per_segment_splits = 8,
                           int gauss_order = 16);

}  // namespace nlab
