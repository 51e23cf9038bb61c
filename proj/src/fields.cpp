#include "nlab/fields.hpp"

#include <algorithm>
#include <cmath>

#include "nlab/quadrature.hpp"

namespace nlab {

namespace {

// quadratic Lagrange weights at offset t from the stencil center
inline void quad_weights(double t, double w[3]) {
  w[0] = 0.5 * t * (t - 1.0);
  w[1] = 1.0 - t * t;
  w[2] = 0.5 * t * (t + 1.0);
}

// 3-node stencil center along one axis, clamped so the stencil stays in
// [lo, hi]; nearest node with ties toward lower index
inline int stencil_center(double q, int lo, int hi) {
  int c = (int)std::floor(q + 0.5);
  return std::clamp(c, lo + 1, hi - 1);
}

}  // namespace

double Field::operator()(Vec2 p) const {
  const Grid& g = grid;
  if (std::abs(p[0]) > g.r_out + 1e-12 ||
      (g.dim == 2 && std::abs(p[1]) > g.r_out + 1e-12))
    return exterior(p, g.dim);

  double q0 = p[0] / g.h;
  int c0 = stencil_center(q0, -g.n_half, g.n_half);
  double t0 = q0 - c0;
  double w0[3];
  quad_weights(t0, w0);

  if (g.dim == 1) {
    double s = 0;
    for (int a = -1; a <= 1; ++a) s += w0[a + 1] * at({c0 + a, 0});
    return s;
  }
  double q1 = p[1] / g.h;
  int c1 = stencil_center(q1, -g.n_half, g.n_half);
  double t1 = q1 - c1;
  double w1[3];
  quad_weights(t1, w1);
  double s = 0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) s += w0[a + 1] * w1[b + 1] * at({c0 + a, c1 + b});
  return s;
}

Field sample(const Grid& grid, const ClosedForm& f, const ExteriorData& exterior) {
  std::vector<double> v(grid.num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(grid.multi_index(i)), grid.dim);
  return Field(grid, std::move(v), exterior);
}

Field sample(const Grid& grid, const std::function<double(Vec2)>& f,
             const ExteriorData& exterior) {
  std::vector<double> v(grid.num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(grid.multi_index(i)));
  return Field(grid, std::move(v), exterior);
}

Field restrict_translate_scale(const Field& u, Vec2 shift, double gamma, double mu) {
  if (!(gamma > 0)) throw usage_error("restrict_translate_scale: dilation must be positive");
  if (mu == 0.0) throw usage_error("restrict_translate_scale: amplitude must be nonzero");
  const Grid& g = u.grid;
  std::vector<double> v(g.num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec2 q = (1.0 / gamma) * (g.point(g.multi_index(i)) - shift);
    if (g.is_lattice_point(q) && std::abs(q[0]) <= g.r_out + 1e-12 &&
        (g.dim == 1 || std::abs(q[1]) <= g.r_out + 1e-12)) {
      v[i] = mu * u.at(g.nearest_index(q));
    } else {
      v[i] = mu * u(q);
    }
  }
  return Field(g, std::move(v), u.exterior.transformed(mu, shift, gamma));
}

Field field_add(const Field& a, const Field& b, double scale_b) {
  if (!(a.grid == b.grid)) throw usage_error("field_add: grid mismatch");
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] + scale_b * b.values[i];
  return Field(a.grid, std::move(v), a.exterior.plus(b.exterior, scale_b));
}

Field field_scale(const Field& a, double s) {
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * a.values[i];
  return Field(a.grid, std::move(v), a.exterior.transformed(s, {0, 0}, 1.0));
}

namespace {

// interpolation restricted to samples strictly inside B_1 (stencils shifted
// inward); used when integrating |u| over the unit ball so that boundary
// discontinuities of the data never leak exterior samples into the ball
double interp_inside_ball_1d(const Field& u, double x) {
  const Grid& g = u.grid;
  int kmax = (int)std::ceil(1.0 / g.h) - 1;  // last node strictly inside
  int c = stencil_center(x / g.h, -kmax, kmax);
  double t = x / g.h - c;
  double w[3];
  quad_weights(t, w);
  double s = 0;
  for (int a = -1; a <= 1; ++a) s += w[a + 1] * u.at({c + a, 0});
  return s;
}

std::vector<double> form_breakpoints_1d(const ExteriorData& e, double lo, double hi) {
  std::vector<double> bp;
  for (const auto& t : e.terms) {
    auto add = [&](double r) {
      for (double sgn : {-1.0, 1.0}) {
        double x = t.shift[0] + sgn * t.dilation * r;
        if (x > lo && x < hi) bp.push_back(x);
      }
    };
    switch (t.form.kind) {
      case FormKind::Tent: add(0.0); add(t.form.p1); break;
      case FormKind::SmoothBump: add(t.form.p1); break;
      case FormKind::PowerCusp: add(0.0); add(t.form.p2); break;
      case FormKind::TruncQuadratic: add(t.form.p1); break;
      case FormKind::BallProfile: add(1.0); break;
      default: break;
    }
  }
  return bp;
}

}  // namespace

WeightedL1Result weighted_l1_norm_detailed(const Field& u, const WeightSpec& w) {
  const Grid& g = u.grid;
  if (g.dim != w.dim) throw usage_error("weighted_l1_norm: dimension mismatch");
  auto wt = [&](Vec2 p) { return weight_eval(w, p); };
  WeightedL1Result res;

  if (g.dim == 1) {
    // |x| < 1: inward interpolation, pieces split at lattice half-points
    double acc = 0.0;
    int ncells = 2 * (int)std::llround(1.0 / g.h);
    double prev = -1.0;
    for (int k = 1; k <= ncells; ++k) {
      double next = std::min(1.0, -1.0 + k * g.h);
      acc += gauss_integrate(
          [&](double x) { return std::abs(interp_inside_ball_1d(u, x)) * wt({x, 0}); }, prev,
          next, 8);
      prev = next;
    }
    // 1 <= |x| <= r_out: exterior closed form (authoritative off B_1)
    auto gq = [&](double sgn) {
      auto f = [&](double r) { return std::abs(u.exterior({sgn * r, 0}, 1)) * wt({r, 0}); };
      return segmented_integrate(f, 1.0, g.r_out,
                                 form_breakpoints_1d(u.exterior, -g.r_out, g.r_out), 8, 16);
    };
    acc += gq(1.0) + gq(-1.0);
    // tail beyond the box
    auto tail = [&](double sgn) {
      return dyadic_radial_integrate(
          [&](double r) { return std::abs(u.exterior({sgn * r, 0}, 1)) * wt({r, 0}); },
          g.r_out);
    };
    res.tail_bound = tail(1.0) + tail(-1.0);
    res.value = acc + res.tail_bound;
    return res;
  }

  // 2D: per-cell Gauss with region indicators
  double acc = 0.0;
  for (int i = -g.n_half; i <= g.n_half; ++i) {
    for (int j = -g.n_half; j <= g.n_half; ++j) {
      Vec2 c = g.point({i, j});
      double half = 0.5 * g.h;
      double lo0 = std::max(-g.r_out, c[0] - half), hi0 = std::min(g.r_out, c[0] + half);
      double lo1 = std::max(-g.r_out, c[1] - half), hi1 = std::min(g.r_out, c[1] + half);
      if (lo0 >= hi0 || lo1 >= hi1) continue;
      double dmin = std::hypot(std::max(0.0, std::max(lo0, -hi0)),
                               std::max(0.0, std::max(lo1, -hi1)));
      double dmax = std::hypot(std::max(std::abs(lo0), std::abs(hi0)),
                               std::max(std::abs(lo1), std::abs(hi1)));
      int order = (dmin < 1.0 && dmax > 1.0) ? 6 : 3;  // straddles the circle
      const GaussRule& gr = gauss_legendre(order);
      for (std::size_t a = 0; a < gr.x.size(); ++a) {
        for (std::size_t b = 0; b < gr.x.size(); ++b) {
          Vec2 q{0.5 * (lo0 + hi0) + 0.5 * (hi0 - lo0) * gr.x[a],
                 0.5 * (lo1 + hi1) + 0.5 * (hi1 - lo1) * gr.x[b]};
          double val = norm(q) < 1.0 ? u(q) : u.exterior(q, 2);
          acc += 0.25 * (hi0 - lo0) * (hi1 - lo1) * gr.w[a] * gr.w[b] *
                 std::abs(val) * wt(q);
        }
      }
    }
  }
  // tail beyond the box: radial dyadic x angular Gauss, from the inscribed
  // radius with the in-box part masked
  auto tail2 = [&]() {
    const GaussRule& ar = gauss_legendre(32);
    return dyadic_radial_integrate(
        [&](double r) {
          double s = 0;
          for (std::size_t a = 0; a < ar.x.size(); ++a) {
            double th = M_PI * (ar.x[a] + 1.0);
            Vec2 q{r * std::cos(th), r * std::sin(th)};
            if (std::abs(q[0]) <= g.r_out && std::abs(q[1]) <= g.r_out) continue;
            s += M_PI * ar.w[a] * std::abs(u.exterior(q, 2)) * wt(q) * r;
          }
          return s;
        },
        g.r_out);
  };
  res.tail_bound = tail2();
  res.value = acc + res.tail_bound;
  return res;
}

double weighted_l1_norm(const Field& u, const WeightSpec& w) {
  return weighted_l1_norm_detailed(u, w).value;
}

double oscillation(const Field& u, Vec2 center, double radius) {
  const Grid& g = u.grid;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool any = false;
  int k = (int)std::floor((radius + norm(center)) / g.h) + 1;
  k = std::min(k, g.n_half);
  for (int i = -k; i <= k; ++i) {
    if (g.dim == 1) {
      if (norm(g.point({i, 0}) - center) <= radius) {
        double v = u.at({i, 0});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        any = true;
      }
    } else {
      for (int j = -k; j <= k; ++j) {
        if (norm(g.point({i, j}) - center) <= radius) {
          double v = u.at({i, j});
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          any = true;
        }
      }
    }
  }
  if (!any) throw usage_error("oscillation: region contains no lattice nodes");
  return hi - lo;
}

}  // namespace nlab
