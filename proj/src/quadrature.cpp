#include "nlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <tuple>

namespace nlab {

double segmented_integrate(const std::function<double(double)>& f, double a, double b,
                           std::vector<double> breakpoints, int per_segment_splits,
                           int gauss_order) {
  if (b <= a) return 0.0;
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    double lo = std::clamp(breakpoints[i], a, b);
    double hi = std::clamp(breakpoints[i + 1], a, b);
    if (hi - lo < 1e-15) continue;
    double step = (hi - lo) / per_segment_splits;
    for (int k = 0; k < per_segment_splits; ++k)
      acc += gauss_integrate(f, lo + k * step, lo + (k + 1) * step, gauss_order);
  }
  return acc;
}

namespace {

// ∫ rho^{-1-sigma} d rho over [lo, hi]
inline double radial_piece(double lo, double hi, double sigma) {
  if (hi <= lo) return 0.0;
  return (std::pow(lo, -sigma) - std::pow(hi, -sigma)) / sigma;
}

// ray from origin in direction d intersected with rect [lo0,hi0]x[lo1,hi1];
// returns [tin, tout] or empty
inline bool ray_rect(double dx, double dy, double lo0, double hi0, double lo1, double hi1,
                     double& tin, double& tout) {
  tin = 0.0;
  tout = std::numeric_limits<double>::infinity();
  auto slab = [&](double d, double lo, double hi) {
    if (std::abs(d) < 1e-300) return lo <= 0.0 && 0.0 <= hi;
    double t1 = lo / d, t2 = hi / d;
    if (t1 > t2) std::swap(t1, t2);
    tin = std::max(tin, t1);
    tout = std::min(tout, t2);
    return true;
  };
  if (!slab(dx, lo0, hi0)) return false;
  if (!slab(dy, lo1, hi1)) return false;
  return tout > tin && tout > 0.0;
}

// 2D: exact ∫_{cell ∩ {r1<=|y|<=r2}} |y|^{-2-sigma} dy by piecewise-polar
// integration: radial part in closed form, angular part Gauss per smooth piece
double polar_cell_integral(double lo0, double hi0, double lo1, double hi1, double r1,
                           double r2, double sigma) {
  // cell must not contain the origin
  const double cx = 0.5 * (lo0 + hi0), cy = 0.5 * (lo1 + hi1);
  const double thc = std::atan2(cy, cx);
  auto rel = [&](double th) {
    double d = std::remainder(th - thc, 2.0 * M_PI);
    return d;
  };

  std::vector<double> brk;
  // corner angles
  for (double x : {lo0, hi0})
    for (double y : {lo1, hi1}) brk.push_back(rel(std::atan2(y, x)));
  // circle/edge intersection angles
  auto add_circle_edge = [&](double r) {
    if (!std::isfinite(r) || r <= 0) return;
    // vertical edges x = const
    for (double x : {lo0, hi0}) {
      if (std::abs(x) < r) {
        double y = std::sqrt(r * r - x * x);
        for (double s : {-1.0, 1.0}) {
          double yy = s * y;
          if (yy >= lo1 - 1e-14 && yy <= hi1 + 1e-14) brk.push_back(rel(std::atan2(yy, x)));
        }
      }
    }
    // horizontal edges y = const
    for (double y : {lo1, hi1}) {
      if (std::abs(y) < r) {
        double x = std::sqrt(r * r - y * y);
        for (double s : {-1.0, 1.0}) {
          double xx = s * x;
          if (xx >= lo0 - 1e-14 && xx <= hi0 + 1e-14) brk.push_back(rel(std::atan2(y, xx)));
        }
      }
    }
  };
  add_circle_edge(r1);
  add_circle_edge(r2);

  std::sort(brk.begin(), brk.end());
  double tlo = brk.front(), thi = brk.back();
  std::vector<double> pts;
  pts.push_back(tlo);
  for (double b : brk)
    if (b > pts.back() + 1e-13) pts.push_back(b);
  if (pts.back() < thi) pts.push_back(thi);

  auto f = [&](double rel_th) {
    double th = thc + rel_th;
    double dx = std::cos(th), dy = std::sin(th);
    double tin, tout;
    if (!ray_rect(dx, dy, lo0, hi0, lo1, hi1, tin, tout)) return 0.0;
    double lo = std::max(tin, r1);
    double hi = std::min(tout, r2);
    return radial_piece(lo, hi, sigma);
  };

  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    acc += gauss_integrate(f, pts[i], pts[i + 1], 24);
  return acc;
}

// smooth full-cell integral of |y|^{-2-sigma}, adaptive tensor Gauss
double smooth_cell_integral(double lo0, double hi0, double lo1, double hi1, double sigma,
                            int depth = 0) {
  double dmin = std::hypot(std::max(0.0, std::max(lo0, -hi0)),
                           std::max(0.0, std::max(lo1, -hi1)));
  double diag = std::hypot(hi0 - lo0, hi1 - lo1);
  if (dmin > 3.0 * diag || depth >= 10) {
    const GaussRule& g = gauss_legendre(8);
    double acc = 0.0;
    for (std::size_t a = 0; a < g.x.size(); ++a) {
      double x = 0.5 * (lo0 + hi0) + 0.5 * (hi0 - lo0) * g.x[a];
      for (std::size_t b = 0; b < g.x.size(); ++b) {
        double y = 0.5 * (lo1 + hi1) + 0.5 * (hi1 - lo1) * g.x[b];
        acc += g.w[a] * g.w[b] * std::pow(x * x + y * y, -0.5 * (2.0 + sigma));
      }
    }
    return acc * 0.25 * (hi0 - lo0) * (hi1 - lo1);
  }
  double mx = 0.5 * (lo0 + hi0), my = 0.5 * (lo1 + hi1);
  return smooth_cell_integral(lo0, mx, lo1, my, sigma, depth + 1) +
         smooth_cell_integral(mx, hi0, lo1, my, sigma, depth + 1) +
         smooth_cell_integral(lo0, mx, my, hi1, sigma, depth + 1) +
         smooth_cell_integral(mx, hi0, my, hi1, sigma, depth + 1);
}

}  // namespace

double cell_annulus_integral(int dim, Vec2 lo, Vec2 hi, double r1, double r2, double sigma) {
  if (dim == 1) {
    // interval cell; fold the negative part onto the positive ray
    auto ray = [&](double a, double b) {
      if (b <= a) return 0.0;
      return radial_piece(std::max(a, r1), std::min(b, r2), sigma);
    };
    double a = lo[0], b = hi[0];
    return ray(std::max(a, 0.0), std::max(b, 0.0)) +
           ray(std::max(-b, 0.0), std::max(-a, 0.0));
  }
  double dmin = std::hypot(std::max(0.0, std::max(lo[0], -hi[0])),
                           std::max(0.0, std::max(lo[1], -hi[1])));
  double dmax = std::hypot(std::max(std::abs(lo[0]), std::abs(hi[0])),
                           std::max(std::abs(lo[1]), std::abs(hi[1])));
  if (dmax <= r1 || dmin >= r2) return 0.0;
  if (dmin >= r1 && dmax <= r2) return smooth_cell_integral(lo[0], hi[0], lo[1], hi[1], sigma);
  return polar_cell_integral(lo[0], hi[0], lo[1], hi[1], r1, r2, sigma);
}

QuadratureScheme QuadratureScheme::make(int dim, double h, double sigma, double r_far,
                                        double r_near_request) {
  if (dim != 1 && dim != 2) throw usage_error("QuadratureScheme: dim must be 1 or 2");
  if (!(h > 0) || !(sigma > 0 && sigma < 2))
    throw usage_error("QuadratureScheme: need h > 0 and sigma in (0,2)");
  QuadratureScheme q;
  q.dim = dim;
  q.h = h;
  q.sigma = sigma;
  q.r_far = r_far;
  double req = r_near_request > 0 ? r_near_request : 2.0 * h;
  // snap up to a half-integer multiple of h (cell-aligned in 1D)
  int m = (int)std::ceil(req / h - 0.5 + 1e-12);
  m = std::max(m, 2);
  q.r_near = (m + 0.5) * h;
  if (!(q.r_near < r_far))
    throw usage_error("QuadratureScheme: near radius must be below r_far");

  if (dim == 1) {
    struct Cell1 {
      int j;
      double lo, hi, w;
    };
    std::vector<Cell1> side;
    int jmax = (int)std::ceil(r_far / h + 0.5);
    for (int j = 1; j <= jmax; ++j) {
      double a = std::max((j - 0.5) * h, q.r_near);
      double b = std::min((j + 0.5) * h, r_far);
      if (b <= a) continue;
      side.push_back({j, a, b, radial_piece(a, b, sigma)});
    }
    // Moment-matched pairing: redistribute each adjacent cell pair's weight
    // so the panel reproduces both ∫ K and ∫ y^2 K exactly. delta2 u behaves
    // like y^2 toward the origin, and plain center sampling there costs an
    // O(h^{1/2}) error; the matched weights stay nonnegative, keep the
    // total mass (shell consistency) and restore second-order accuracy.
    for (std::size_t k = 0; k + 1 < side.size(); k += 2) {
      Cell1& a = side[k];
      Cell1& b = side[k + 1];
      if (b.lo != a.hi) continue;  // not contiguous (clipping gap)
      double m0 = a.w + b.w;
      double m2 = (std::pow(b.hi, 2.0 - sigma) - std::pow(a.lo, 2.0 - sigma)) / (2.0 - sigma);
      double ya = a.j * h, yb = b.j * h;
      double wb = (m2 - m0 * ya * ya) / (yb * yb - ya * ya);
      double wa = m0 - wb;
      if (wa >= 0.0 && wb >= 0.0) {
        a.w = wa;
        b.w = wb;
      }
    }
    for (const Cell1& c : side) {
      q.cells.push_back({{c.j, 0}, {c.j * h, 0}, c.w});
      q.cells.push_back({{-c.j, 0}, {-c.j * h, 0}, c.w});
    }
  } else {
    int jmax = (int)std::ceil(r_far / h + 1.0);
    for (int i = -jmax; i <= jmax; ++i) {
      for (int j = -jmax; j <= jmax; ++j) {
        if (i == 0 && j == 0) continue;
        Vec2 lo{(i - 0.5) * h, (j - 0.5) * h};
        Vec2 hi{(i + 0.5) * h, (j + 0.5) * h};
        double w = cell_annulus_integral(2, lo, hi, q.r_near, r_far, sigma);
        if (w > 0) q.cells.push_back({{i, j}, {i * h, j * h}, w});
      }
    }
  }
  return q;
}

const QuadratureScheme& QuadratureScheme::get(int dim, double h, double sigma, double r_far,
                                              double r_near_request) {
  using Key = std::tuple<int, long long, long long, long long, long long>;
  static std::map<Key, QuadratureScheme> cache;
  auto bits = [](double v) {
    long long b;
    static_assert(sizeof(b) == sizeof(v));
    std::memcpy(&b, &v, sizeof(b));
    return b;
  };
  Key k{dim, bits(h), bits(sigma), bits(r_far), bits(r_near_request)};
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, make(dim, h, sigma, r_far, r_near_request)).first;
  return it->second;
}

double QuadratureScheme::shell_mass(double R1, double R2) const {
  double surf = dim == 1 ? 2.0 : 2.0 * M_PI;
  return surf * radial_piece(R1, R2, sigma);
}

double QuadratureScheme::tail_factor(double R) const {
  double surf = dim == 1 ? 2.0 : 2.0 * M_PI;
  return (2.0 - sigma) * surf * std::pow(R, -sigma) / sigma;
}

double QuadratureScheme::near_linear(double abar, const SymMat& A) const {
  double r = std::pow(r_near, 2.0 - sigma);
  if (dim == 1) return 2.0 * abar * A.a11 * r;
  return abar * M_PI * A.trace() * r;
}

namespace {
// closed-form ∮_0^{2pi} (m + R cos psi)^+ d psi
inline double angular_positive_part(double m, double R) {
  if (m >= R) return 2.0 * M_PI * m;
  if (m <= -R) return 0.0;
  double psi0 = std::acos(-m / R);
  return 2.0 * (m * psi0 + R * std::sin(psi0));
}
}  // namespace

double QuadratureScheme::near_extremal(bool plus, double lam, double Lam,
                                       const SymMat& A) const {
  double r = std::pow(r_near, 2.0 - sigma);
  if (dim == 1) {
    double ap = std::max(A.a11, 0.0), am = std::max(-A.a11, 0.0);
    return plus ? 2.0 * r * (Lam * ap - lam * am) : 2.0 * r * (lam * ap - Lam * am);
  }
  // delta2 q = rho^2 (m + Rq cos(2 theta - phi)), m = tr/2
  double m = 0.5 * A.trace();
  double Rq = std::hypot(0.5 * (A.a11 - A.a22), A.a12);
  double iplus = angular_positive_part(m, Rq);
  double iminus = iplus - 2.0 * M_PI * m;  // ∮ q^- = ∮ q^+ - ∮ q
  double v = plus ? (Lam * iplus - lam * iminus) : (lam * iplus - Lam * iminus);
  return r * v;
}

double QuadratureScheme::unit_diagonal_mass() const {
  // |coefficient of u(x)| in the a == 1 evaluation
  double mid = 0.0;
  for (const auto& c : cells) mid += c.w;
  double nr = std::pow(r_near, 2.0 - sigma);
  double near_diag = dim == 1 ? 2.0 * nr * 2.0 / (h * h) : M_PI * nr * 4.0 / (h * h);
  return (2.0 - sigma) * 2.0 * mid + near_diag + 2.0 * tail_factor(r_far);
}

}  // namespace nlab
