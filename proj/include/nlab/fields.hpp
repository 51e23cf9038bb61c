#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlab/closed_form.hpp"
#include "nlab/geometry.hpp"
#include "nlab/kernels.hpp"

namespace nlab {

enum class DecayTag { CompactSupport, Bounded };

// Exterior data g on R^n \ B_1, represented as a linear combination of
// shifted/dilated closed forms. Closed under the field transforms used by the
// lab (translate/scale, difference quotients), so exterior lookups never
// extrapolate from lattice values.
struct ExteriorTerm {
  double coef = 1.0;
  Vec2 shift{0, 0};
  double dilation = 1.0;  // evaluates primitive at (x - shift) / dilation
  ClosedForm form;
};

struct ExteriorData {
  std::vector<ExteriorTerm> terms;

  static ExteriorData zero() { return {}; }
  static ExteriorData of(const ClosedForm& f) {
    ExteriorData e;
    if (f.kind != FormKind::Zero) e.terms.push_back({1.0, {0, 0}, 1.0, f});
    return e;
  }

  double operator()(Vec2 x, int dim) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.coef * t.form((1.0 / t.dilation) * (x - t.shift), dim);
    return s;
  }

  double support_radius() const {
    double r = 0.0;
    for (const auto& t : terms) {
      double sr = t.form.support_radius();
      r = std::max(r, std::isinf(sr) ? sr : norm(t.shift) + t.dilation * sr);
    }
    return r;
  }
  DecayTag decay_tag() const {
    for (const auto& t : terms)
      if (!t.form.compactly_supported()) return DecayTag::Bounded;
    return DecayTag::CompactSupport;
  }
  double sup_bound(int dim) const {
    double s = 0.0;
    for (const auto& t : terms) s += std::abs(t.coef) * t.form.sup_bound(dim);
    return s;
  }
  bool admissible(int dim) const {
    for (const auto& t : terms)
      if (!t.form.admissible_exterior() || !std::isfinite(t.form.sup_bound(dim))) return false;
    return true;
  }

  // g(x+y) + g(x-y) for |y| large; constant in y once every term is in far
  // form (valid when |x +- y| > support_radius()).
  double symmetric_far_value(Vec2 x, int dim) const {
    double s = 0.0;
    for (const auto& t : terms) {
      // zero for compact terms; constants and affine parts are even around x
      Vec2 z = (1.0 / t.dilation) * (x - t.shift);
      s += 2.0 * t.coef * t.form.far_value(z, dim);
    }
    return s;
  }

  ExteriorData transformed(double amplitude, Vec2 shift, double dilation) const {
    ExteriorData out;
    out.terms.reserve(terms.size());
    for (const auto& t : terms) {
      // amplitude * g((x - shift)/dilation) where g's term reads at (x - s)/d
      out.terms.push_back({amplitude * t.coef, shift + dilation * t.shift,
                           dilation * t.dilation, t.form});
    }
    return out;
  }
  ExteriorData plus(const ExteriorData& o, double scale = 1.0) const {
    ExteriorData out = *this;
    for (auto t : o.terms) {
      t.coef *= scale;
      out.terms.push_back(t);
    }
    return out;
  }
  // g(x + h) - g(x), scaled: used by difference quotients
  ExteriorData difference(Vec2 hshift, double scale) const {
    ExteriorData out;
    for (auto t : terms) {
      ExteriorTerm a = t, b = t;
      a.coef *= scale;
      a.shift = a.shift - hshift;  // evaluates g at x + h
      b.coef *= -scale;
      out.terms.push_back(a);
      out.terms.push_back(b);
    }
    return out;
  }
};

// A scalar function sampled on the lattice, with exterior closed form beyond
// the box. Immutable snapshot; all operations are pure.
struct Field {
  Grid grid;
  std::vector<double> values;  // row-major over lattice nodes
  ExteriorData exterior;

  Field() = default;
  Field(const Grid& g, std::vector<double> v, ExteriorData e)
      : grid(g), values(std::move(v)), exterior(std::move(e)) {
    if (values.size() != grid.num_nodes()) throw usage_error("Field: value count mismatch");
  }

  double at(IVec2 ij) const { return values[grid.linear_index(ij)]; }
  double& at(IVec2 ij) { return values[grid.linear_index(ij)]; }

  // total lookup: lattice node / interpolation inside the box, exterior
  // closed form outside
  double lookup(IVec2 ij) const {
    if (grid.index_in_box(ij)) return values[grid.linear_index(ij)];
    return exterior(grid.point(ij), grid.dim);
  }
  double operator()(Vec2 p) const;  // piecewise-quadratic interp inside box

  // symmetric second difference with lattice offsets; the (+y) and (-y)
  // lookups are added first so delta2(x,y) == delta2(x,-y) bitwise
  double delta2(IVec2 x, IVec2 y) const {
    return (lookup(x + y) + lookup(x - y)) - 2.0 * lookup(x);
  }
  // off-lattice variant via total lookup
  double delta2(Vec2 x, Vec2 y) const {
    return ((*this)(x + y) + (*this)(x - y)) - 2.0 * (*this)(x);
  }

  // quadratic model of u at node x from step-h second differences:
  // entries of the interpolant's Hessian
  SymMat quadratic_model(IVec2 x) const {
    SymMat m;
    double h2 = grid.h * grid.h;
    m.a11 = delta2(x, IVec2{1, 0}) / h2;
    if (grid.dim == 2) {
      m.a22 = delta2(x, IVec2{0, 1}) / h2;
      m.a12 = (lookup(x + IVec2{1, 1}) + lookup(x - IVec2{1, 1}) - lookup(x + IVec2{1, -1}) -
               lookup(x - IVec2{1, -1})) /
              (4.0 * h2);
    }
    return m;
  }
};

// pointwise sampling of a closed form (interior) with attached exterior data
Field sample(const Grid& grid, const ClosedForm& f, const ExteriorData& exterior);
Field sample(const Grid& grid, const std::function<double(Vec2)>& f,
             const ExteriorData& exterior);

// mu * u((x - shift)/gamma) resampled on the same grid
Field restrict_translate_scale(const Field& u, Vec2 shift, double gamma, double mu);

Field field_add(const Field& a, const Field& b, double scale_b = 1.0);
Field field_scale(const Field& a, double s);

// quadrature of int |u| omega_{sigma0}; analytic tail beyond the box
struct WeightedL1Result {
  double value = 0.0;
  double tail_bound = 0.0;  // upper-bound correction added for bounded tails
};
WeightedL1Result weighted_l1_norm_detailed(const Field& u, const WeightSpec& w);
double weighted_l1_norm(const Field& u, const WeightSpec& w);

// max - min over lattice nodes in the closed ball |x - center| <= radius
double oscillation(const Field& u, Vec2 center, double radius);

}  // namespace nlab
