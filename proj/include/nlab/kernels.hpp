#pragma once

#include <string>
#include <vector>

#include "nlab/closed_form.hpp"
#include "nlab/geometry.hpp"

namespace nlab {

// Coefficient profiles a(x,y) for kernels K(x,y) = (2-sigma) a(x,y) |y|^{-n-sigma}.
// All registry profiles are symmetric and radial in y, and their y-dependence
// dies out beyond a finite radius so far-field tails stay in closed form.
enum class ProfileKind {
  Constant,  // a = c
  StepBands, // alternating hi/lo on |y| bands of width band_r0/nbands, lo beyond
  RippleX,   // lambda + (Lambda-lambda) (1 + eta sin(k.x) psi(|y|)) / 2
};

struct KernelSpec {
  int dim = 1;
  double sigma = 1.5;
  double sigma0 = 1.0;
  double lambda = 1.0;
  double Lambda = 1.0;

  ProfileKind profile = ProfileKind::Constant;
  double c = 1.0;          // Constant
  double band_r0 = 1.0;    // StepBands: banded zone radius
  int nbands = 1;          // StepBands
  double band_hi = 1.0, band_lo = 1.0;
  Vec2 ripple_k{1.0, 0.0}; // RippleX wave vector
  double ripple_eta = 1.0; // RippleX amplitude in [0,1]
  double psi_radius = 2.0; // RippleX: psi(|y|) supported in |y| < psi_radius

  static KernelSpec constant(int dim, double sigma, double sigma0, double lambda,
                             double Lambda, double c);
  static KernelSpec step_bands(int dim, double sigma, double sigma0, double lambda,
                               double Lambda, double r0, int nbands = 1);
  static KernelSpec ripple_x(int dim, double sigma, double sigma0, double lambda,
                             double Lambda, Vec2 k, double eta = 1.0,
                             double psi_radius = 2.0);
  // bypasses ellipticity validation; for negative controls and the
  // ellipticity checker itself
  static KernelSpec unchecked(const KernelSpec& s) { return s; }

  void validate() const;

  // profile value a(x, y); symmetric in y by construction
  double coefficient(Vec2 x, Vec2 y) const;
  bool x_dependent() const { return profile == ProfileKind::RippleX; }
  // radius beyond which a(x, .) is constant in y
  double y_reach() const;
  double far_coefficient(Vec2 x = {0, 0}) const;
};

// full kernel density; throws on y = 0 and on profile values outside [lambda, Lambda]
double kernel_eval(const KernelSpec& spec, Vec2 x, Vec2 y);

struct EllipticityReport {
  bool pass = false;
  double worst_ratio = 0.0;  // min over samples of min(a/lambda, Lambda/a)
  double a_min = 0.0, a_max = 0.0;
};
EllipticityReport check_ellipticity_bounds(const KernelSpec& spec,
                                           const std::vector<std::pair<Vec2, Vec2>>& samples);

// Integration weight omega_{sigma0}(x) = (1+|x|)^{-n-sigma0}.
struct WeightSpec {
  int dim = 1;
  double sigma0 = 1.0;
};
inline double weight_eval(const WeightSpec& w, Vec2 x) {
  return std::pow(1.0 + norm(x), -(double)w.dim - w.sigma0);
}

// Cutoff/mollifier pair for the small-ball regularization: phi_eps == 1 on
// B_{eps/2}, supported in B_eps, with the classical exp(1 - 1/(1-t^2)) bridge;
// eta_eps is the matching unit-mass mollifier.
struct CutoffMollifierSpec {
  double eps = 0.1;
  int dim = 1;

  CutoffMollifierSpec(double eps_, int dim_) : eps(eps_), dim(dim_) {
    if (!(eps > 0)) throw usage_error("CutoffMollifierSpec: eps must be positive");
    if (dim != 1 && dim != 2) throw usage_error("CutoffMollifierSpec: dim must be 1 or 2");
  }

  double cutoff(Vec2 y) const { return cutoff_radial(norm(y)); }
  double cutoff_radial(double r) const {
    if (r <= 0.5 * eps) return 1.0;
    if (r >= eps) return 0.0;
    double t = 2.0 * r / eps - 1.0;  // in (0,1)
    return bump_profile(t);
  }
  double mollifier(Vec2 x) const;
};

// normalization constant of the radial bump mollifier, cached per dimension
double bump_mollifier_mass(int dim);

}  // namespace nlab
