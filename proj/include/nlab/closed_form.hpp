#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nlab/geometry.hpp"

namespace nlab {

// Smooth compactly supported bump profile, == 1 at t = 0, == 0 for |t| >= 1.
inline double bump_profile(double t) {
  double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

// d/dt of bump_profile
inline double bump_profile_deriv(double t) {
  double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  double d = 1.0 - t2;
  return bump_profile(t) * (-2.0 * t / (d * d));
}

// Named closed forms over R^n. These are the only function descriptions the
// lab accepts for right-hand sides, exterior data and probes; everything else
// is derived from them by shifting, scaling and linear combination.
enum class FormKind {
  Zero,
  Constant,    // p0
  Affine,      // p0 + p1*x1 + p2*x2
  Tent,        // p0 * max(0, p1 - |x - c|)            (Lipschitz cone, compact)
  SmoothBump,  // p0 * bump(|x - c| / p1)
  PowerCusp,   // p0 * |x - c|^p1 * bump(|x - c| / p2)  (Holder bump)
  TruncQuadratic,  // p0 * max(0, p1^2 - |x - c|^2)
  BallProfile,     // p0 * max(0, 1 - |x|^2)^p1
  CosRipple,       // p0 * cos(p1*x1 + p2*x2)   (not admissible as exterior)
};

struct ClosedForm {
  FormKind kind = FormKind::Zero;
  double p0 = 0, p1 = 0, p2 = 0;
  Vec2 center{0, 0};

  double operator()(Vec2 x, int dim) const {
    switch (kind) {
      case FormKind::Zero: return 0.0;
      case FormKind::Constant: return p0;
      case FormKind::Affine: return p0 + p1 * x[0] + (dim == 2 ? p2 * x[1] : 0.0);
      case FormKind::Tent: {
        double r = norm(x - center);
        return p0 * std::max(0.0, p1 - r);
      }
      case FormKind::SmoothBump: {
        double r = norm(x - center);
        return p0 * bump_profile(r / p1);
      }
      case FormKind::PowerCusp: {
        double r = norm(x - center);
        if (r >= p2) return 0.0;
        return p0 * std::pow(r, p1) * bump_profile(r / p2);
      }
      case FormKind::TruncQuadratic: {
        Vec2 d = x - center;
        return p0 * std::max(0.0, p1 * p1 - dot(d, d));
      }
      case FormKind::BallProfile: {
        double s = 1.0 - dot(x, x);
        return s > 0.0 ? p0 * std::pow(s, p1) : 0.0;
      }
      case FormKind::CosRipple:
        return p0 * std::cos(p1 * x[0] + (dim == 2 ? p2 * x[1] : 0.0));
    }
    return 0.0;
  }

  // radius beyond which the form coincides with its "far" part
  // (zero, a constant, or an affine function); infinity for CosRipple
  double support_radius() const {
    switch (kind) {
      case FormKind::Zero:
      case FormKind::Constant:
      case FormKind::Affine: return 0.0;
      case FormKind::Tent: return norm(center) + p1;
      case FormKind::SmoothBump: return norm(center) + p1;
      case FormKind::PowerCusp: return norm(center) + p2;
      case FormKind::TruncQuadratic: return norm(center) + p1;
      case FormKind::BallProfile: return 1.0;
      case FormKind::CosRipple: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  bool compactly_supported() const {
    switch (kind) {
      case FormKind::Zero:
      case FormKind::Tent:
      case FormKind::SmoothBump:
      case FormKind::PowerCusp:
      case FormKind::TruncQuadratic:
      case FormKind::BallProfile: return true;
      case FormKind::Constant: return p0 == 0.0;
      case FormKind::Affine: return p0 == 0.0 && p1 == 0.0 && p2 == 0.0;
      case FormKind::CosRipple: return false;
    }
    return false;
  }

  bool bounded() const { return kind != FormKind::Affine || (p1 == 0.0 && p2 == 0.0); }

  double sup_bound(int dim) const {
    switch (kind) {
      case FormKind::Zero: return 0.0;
      case FormKind::Constant: return std::abs(p0);
      case FormKind::Affine:
        if (p1 == 0.0 && (dim == 1 || p2 == 0.0)) return std::abs(p0);
        return std::numeric_limits<double>::infinity();
      case FormKind::Tent: return std::abs(p0) * p1;
      case FormKind::SmoothBump: return std::abs(p0);
      case FormKind::PowerCusp: return std::abs(p0) * std::pow(p2, p1);
      case FormKind::TruncQuadratic: return std::abs(p0) * p1 * p1;
      case FormKind::BallProfile: return std::abs(p0);
      case FormKind::CosRipple: return std::abs(p0);
    }
    return 0.0;
  }

  // far part evaluated at x; valid only for |x| > support_radius()
  double far_value(Vec2 x, int dim) const {
    switch (kind) {
      case FormKind::Constant: return p0;
      case FormKind::Affine: return (*this)(x, dim);
      default: return 0.0;
    }
  }
  bool far_is_affine() const { return kind == FormKind::Affine; }

  // exterior data must be bounded and settle to a closed far form
  bool admissible_exterior() const { return bounded() && kind != FormKind::CosRipple; }
};

std::string form_kind_name(FormKind k);
std::optional<FormKind> form_kind_from_name(const std::string& name);

inline ClosedForm make_zero() { return {}; }
inline ClosedForm make_constant(double c) { return {FormKind::Constant, c, 0, 0, {0, 0}}; }
inline ClosedForm make_affine(double a0, double gx, double gy = 0) {
  return {FormKind::Affine, a0, gx, gy, {0, 0}};
}
inline ClosedForm make_tent(double slope, double radius, Vec2 c = {0, 0}) {
  return {FormKind::Tent, slope, radius, 0, c};
}
inline ClosedForm make_smooth_bump(double amp, double width, Vec2 c = {0, 0}) {
  return {FormKind::SmoothBump, amp, width, 0, c};
}
inline ClosedForm make_power_cusp(double amp, double gamma, double radius, Vec2 c = {0, 0}) {
  return {FormKind::PowerCusp, amp, gamma, radius, c};
}
inline ClosedForm make_trunc_quadratic(double amp, double width, Vec2 c = {0, 0}) {
  return {FormKind::TruncQuadratic, amp, width, 0, c};
}
inline ClosedForm make_ball_profile(double amp, double p) {
  return {FormKind::BallProfile, amp, p, 0, {0, 0}};
}
inline ClosedForm make_cos_ripple(double amp, double kx, double ky = 0) {
  return {FormKind::CosRipple, amp, kx, ky, {0, 0}};
}

}  // namespace nlab
