#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlab {

// Errors are split by blame: usage_error for bad caller input, domain_error
// for mathematically invalid points, evaluation_error for numerical failures,
// resource_error for exceeded budgets.
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct evaluation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ellipticity_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Points and offsets in R^n, n in {1,2}. The second component is unused
// (and kept zero) in 1D.
using Vec2 = std::array<double, 2>;
using IVec2 = std::array<int, 2>;

inline Vec2 vec(double x, double y = 0.0) { return {x, y}; }

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator-(Vec2 a) { return {-a[0], -a[1]}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a[0], s * a[1]}; }
inline double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(Vec2 a) { return std::hypot(a[0], a[1]); }
inline double norm_inf(Vec2 a) { return std::max(std::abs(a[0]), std::abs(a[1])); }

inline IVec2 operator+(IVec2 a, IVec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
inline IVec2 operator-(IVec2 a, IVec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
inline IVec2 operator-(IVec2 a) { return {-a[0], -a[1]}; }

// Symmetric 2x2 matrix; in 1D only a11 is meaningful.
struct SymMat {
  double a11 = 0.0;
  double a22 = 0.0;
  double a12 = 0.0;
  double trace() const { return a11 + a22; }
};
inline SymMat operator-(SymMat a, SymMat b) {
  return {a.a11 - b.a11, a.a22 - b.a22, a.a12 - b.a12};
}

// Uniform lattice with spacing h over the box [-r_out, r_out]^n. The unit
// ball B_1 is the Dirichlet domain; lattice nodes with |x| < 1 are interior.
struct Grid {
  int dim = 1;       // 1 or 2
  double h = 0.0;    // spacing
  double r_out = 4;  // box half-width; h must divide it exactly
  int n_half = 0;    // r_out / h

  Grid() = default;
  Grid(int dim_, double h_, double r_out_ = 4.0) : dim(dim_), h(h_), r_out(r_out_) {
    if (dim != 1 && dim != 2) throw usage_error("Grid: dimension must be 1 or 2");
    if (!(h > 0)) throw usage_error("Grid: spacing must be positive");
    if (!(r_out >= 2)) throw usage_error("Grid: r_out must be >= 2");
    double q = r_out / h;
    n_half = (int)std::llround(q);
    if (std::abs(q - n_half) > 1e-9) throw usage_error("Grid: h must divide r_out exactly");
    if (interior_nodes_per_axis() < 3) throw usage_error("Grid: fewer than 3 interior nodes per axis");
  }

  int points_per_axis() const { return 2 * n_half + 1; }
  std::size_t num_nodes() const {
    std::size_t p = (std::size_t)points_per_axis();
    return dim == 1 ? p : p * p;
  }
  int interior_nodes_per_axis() const {
    // lattice nodes with |x| < 1 along one axis
    int k = (int)std::ceil(1.0 / h) - 1;
    return 2 * k + 1;
  }

  bool index_in_box(IVec2 ij) const {
    if (std::abs(ij[0]) > n_half) return false;
    if (dim == 2 && std::abs(ij[1]) > n_half) return false;
    return true;
  }
  std::size_t linear_index(IVec2 ij) const {
    std::size_t p = (std::size_t)points_per_axis();
    std::size_t i = (std::size_t)(ij[0] + n_half);
    if (dim == 1) return i;
    std::size_t j = (std::size_t)(ij[1] + n_half);
    return i * p + j;  // row-major
  }
  IVec2 multi_index(std::size_t lin) const {
    int p = points_per_axis();
    if (dim == 1) return {(int)lin - n_half, 0};
    return {(int)(lin / p) - n_half, (int)(lin % p) - n_half};
  }
  Vec2 point(IVec2 ij) const { return {ij[0] * h, dim == 2 ? ij[1] * h : 0.0}; }

  // nearest lattice index (ties toward lower index, deterministic)
  IVec2 nearest_index(Vec2 p) const {
    IVec2 r{0, 0};
    for (int d = 0; d < dim; ++d) r[d] = (int)std::floor(p[d] / h + 0.5);
    return r;
  }
  bool is_lattice_point(Vec2 p, double tol = 1e-9) const {
    for (int d = 0; d < dim; ++d) {
      double q = p[d] / h;
      if (std::abs(q - std::llround(q)) > tol) return false;
    }
    return true;
  }

  // interior = lattice nodes strictly inside the unit ball
  std::vector<IVec2> interior_nodes() const {
    std::vector<IVec2> out;
    int k = (int)std::ceil(1.0 / h);
    for (int i = -k; i <= k; ++i) {
      if (dim == 1) {
        if (std::abs(i * h) < 1.0) out.push_back({i, 0});
      } else {
        for (int j = -k; j <= k; ++j)
          if (norm({i * h, j * h}) < 1.0) out.push_back({i, j});
      }
    }
    return out;
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && h == o.h && r_out == o.r_out;
  }
};

// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
// iteration on the Legendre recurrence.
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

// integral of f over [a,b] with an n-point Gauss rule
template <class F>
double gauss_integrate(F&& f, double a, double b, int n = 16) {
  const GaussRule& g = gauss_legendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return s * half;
}

}  // namespace nlab
