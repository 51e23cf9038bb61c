#include "nlab/closed_form.hpp"

#include <map>
#include <mutex>

namespace nlab {

std::string form_kind_name(FormKind k) {
  switch (k) {
    case FormKind::Zero: return "zero";
    case FormKind::Constant: return "constant";
    case FormKind::Affine: return "affine";
    case FormKind::Tent: return "tent";
    case FormKind::SmoothBump: return "smooth_bump";
    case FormKind::PowerCusp: return "power_cusp";
    case FormKind::TruncQuadratic: return "trunc_quadratic";
    case FormKind::BallProfile: return "ball_profile";
    case FormKind::CosRipple: return "cos_ripple";
  }
  return "zero";
}

std::optional<FormKind> form_kind_from_name(const std::string& name) {
  static const std::map<std::string, FormKind> m = {
      {"zero", FormKind::Zero},
      {"constant", FormKind::Constant},
      {"affine", FormKind::Affine},
      {"tent", FormKind::Tent},
      {"smooth_bump", FormKind::SmoothBump},
      {"power_cusp", FormKind::PowerCusp},
      {"trunc_quadratic", FormKind::TruncQuadratic},
      {"ball_profile", FormKind::BallProfile},
      {"cos_ripple", FormKind::CosRipple},
  };
  auto it = m.find(name);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

// Gauss-Legendre by Newton iteration on the Legendre recurrence
static GaussRule build_gauss(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * x * p2 - j * p3) / (j + 1);
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    g.x[i] = x;
    g.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss(n)).first;
  return it->second;
}

}  // namespace nlab
