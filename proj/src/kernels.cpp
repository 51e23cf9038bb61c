#include "nlab/kernels.hpp"

#include <array>

#include "nlab/quadrature.hpp"

namespace nlab {

static void check_base(const KernelSpec& s) {
  if (s.dim != 1 && s.dim != 2) throw usage_error("KernelSpec: dim must be 1 or 2");
  if (!(s.sigma0 > 0 && s.sigma0 < 2)) throw usage_error("KernelSpec: sigma0 must be in (0,2)");
  if (!(s.sigma > s.sigma0 && s.sigma < 2))
    throw usage_error("KernelSpec: sigma must be in (sigma0, 2)");
  if (!(s.lambda > 0 && s.lambda <= s.Lambda))
    throw usage_error("KernelSpec: need 0 < lambda <= Lambda");
}

void KernelSpec::validate() const {
  check_base(*this);
  switch (profile) {
    case ProfileKind::Constant:
      if (!(c >= lambda && c <= Lambda))
        throw ellipticity_violation("KernelSpec: constant profile outside [lambda, Lambda]");
      break;
    case ProfileKind::StepBands:
      if (!(band_r0 > 0 && band_r0 <= 2.0))
        throw usage_error("KernelSpec: band_r0 must be in (0, 2]");
      if (nbands < 1) throw usage_error("KernelSpec: nbands must be >= 1");
      if (!(band_lo >= lambda && band_hi <= Lambda && band_lo <= band_hi))
        throw ellipticity_violation("KernelSpec: band values outside [lambda, Lambda]");
      break;
    case ProfileKind::RippleX:
      if (!(ripple_eta >= 0.0 && ripple_eta <= 1.0))
        throw usage_error("KernelSpec: ripple amplitude must be in [0,1]");
      if (!(psi_radius > 0 && psi_radius <= 2.0))
        throw usage_error("KernelSpec: psi_radius must be in (0, 2]");
      break;
  }
}

KernelSpec KernelSpec::constant(int dim, double sigma, double sigma0, double lambda,
                                double Lambda, double c) {
  KernelSpec s;
  s.dim = dim;
  s.sigma = sigma;
  s.sigma0 = sigma0;
  s.lambda = lambda;
  s.Lambda = Lambda;
  s.profile = ProfileKind::Constant;
  s.c = c;
  s.validate();
  return s;
}

KernelSpec KernelSpec::step_bands(int dim, double sigma, double sigma0, double lambda,
                                  double Lambda, double r0, int nbands) {
  KernelSpec s;
  s.dim = dim;
  s.sigma = sigma;
  s.sigma0 = sigma0;
  s.lambda = lambda;
  s.Lambda = Lambda;
  s.profile = ProfileKind::StepBands;
  s.band_r0 = r0;
  s.nbands = nbands;
  s.band_hi = Lambda;
  s.band_lo = lambda;
  s.validate();
  return s;
}

KernelSpec KernelSpec::ripple_x(int dim, double sigma, double sigma0, double lambda,
                                double Lambda, Vec2 k, double eta, double psi_radius) {
  KernelSpec s;
  s.dim = dim;
  s.sigma = sigma;
  s.sigma0 = sigma0;
  s.lambda = lambda;
  s.Lambda = Lambda;
  s.profile = ProfileKind::RippleX;
  s.ripple_k = k;
  s.ripple_eta = eta;
  s.psi_radius = psi_radius;
  s.validate();
  return s;
}

double KernelSpec::coefficient(Vec2 x, Vec2 y) const {
  switch (profile) {
    case ProfileKind::Constant: return c;
    case ProfileKind::StepBands: {
      double r = norm(y);
      if (r >= band_r0) return band_lo;
      double bw = band_r0 / nbands;
      int band = (int)(r / bw);
      return (band % 2 == 0) ? band_hi : band_lo;
    }
    case ProfileKind::RippleX: {
      double psi = bump_profile(norm(y) / psi_radius);
      double s = std::sin(dot(ripple_k, x));
      return lambda + (Lambda - lambda) * 0.5 * (1.0 + ripple_eta * s * psi);
    }
  }
  return c;
}

double KernelSpec::y_reach() const {
  switch (profile) {
    case ProfileKind::Constant: return 0.0;
    case ProfileKind::StepBands: return band_r0;
    case ProfileKind::RippleX: return psi_radius;
  }
  return 0.0;
}

double KernelSpec::far_coefficient(Vec2) const {
  switch (profile) {
    case ProfileKind::Constant: return c;
    case ProfileKind::StepBands: return band_lo;
    case ProfileKind::RippleX: return lambda + (Lambda - lambda) * 0.5;
  }
  return c;
}

double kernel_eval(const KernelSpec& spec, Vec2 x, Vec2 y) {
  if (y[0] == 0.0 && (spec.dim == 1 || y[1] == 0.0))
    throw std::domain_error("kernel singularity");
  double a = spec.coefficient(x, y);
  if (!(a >= spec.lambda - 1e-12 && a <= spec.Lambda + 1e-12))
    throw ellipticity_violation("kernel_eval: profile value outside [lambda, Lambda]");
  double r = norm(y);
  return (2.0 - spec.sigma) * a * std::pow(r, -(double)spec.dim - spec.sigma);
}

EllipticityReport check_ellipticity_bounds(const KernelSpec& spec,
                                           const std::vector<std::pair<Vec2, Vec2>>& samples) {
  if (samples.empty()) throw usage_error("check_ellipticity_bounds: empty sample list");
  EllipticityReport rep;
  rep.a_min = std::numeric_limits<double>::infinity();
  rep.a_max = -std::numeric_limits<double>::infinity();
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : samples) {
    if (y[0] == 0.0 && (spec.dim == 1 || y[1] == 0.0))
      throw usage_error("check_ellipticity_bounds: sample with y = 0");
    double a = spec.coefficient(x, y);
    rep.a_min = std::min(rep.a_min, a);
    rep.a_max = std::max(rep.a_max, a);
    double ratio = std::min(a / spec.lambda, spec.Lambda / a);
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
  }
  rep.pass = rep.worst_ratio >= 1.0 - 1e-12;
  return rep;
}

double bump_mollifier_mass(int dim) {
  static double mass1 = -1.0, mass2 = -1.0;
  if (dim == 1) {
    if (mass1 < 0)
      mass1 = 2.0 * segmented_integrate([](double t) { return bump_profile(t); }, 0.0, 1.0,
                                        {}, 16, 24);
    return mass1;
  }
  if (mass2 < 0)
    mass2 = 2.0 * M_PI *
            segmented_integrate([](double t) { return t * bump_profile(t); }, 0.0, 1.0, {},
                                16, 24);
  return mass2;
}

double CutoffMollifierSpec::mollifier(Vec2 x) const {
  double r = norm(x) / eps;
  double c = 1.0 / (bump_mollifier_mass(dim) * std::pow(eps, (double)dim));
  return c * bump_profile(r);
}

}  // namespace nlab
