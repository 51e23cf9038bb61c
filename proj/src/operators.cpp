#include "nlab/operators.hpp"

#include <algorithm>
#include <cmath>

#include "nlab/probes.hpp"

namespace nlab {

// ---------------------------------------------------------------- RhoSpec

RhoSpec RhoSpec::softplus(double lambda, double Lambda) {
  RhoSpec r;
  r.profile = Profile::Softplus;
  r.lambda = lambda;
  r.Lambda = Lambda;
  r.C0 = 0.25 * (Lambda - lambda);
  r.p = 0.0;
  return r;
}

RhoSpec RhoSpec::power_scaled(double lambda, double Lambda, double p) {
  if (!(p >= 0.0 && p <= 2.0)) throw usage_error("RhoSpec: p must be in [0,2]");
  RhoSpec r = softplus(lambda, Lambda);
  r.profile = Profile::PowerScaled;
  r.p = p;
  return r;
}

RhoSpec RhoSpec::linear_slope(double lambda, double Lambda, double c) {
  if (!(c > lambda && c < Lambda))
    throw usage_error("RhoSpec: linear slope must lie in (lambda, Lambda)");
  RhoSpec r;
  r.profile = Profile::LinearSlope;
  r.lambda = lambda;
  r.Lambda = Lambda;
  r.C0 = 0.0;
  r.slope = c;
  return r;
}

double RhoSpec::rho_bar(double z) const {
  if (profile == Profile::LinearSlope) return slope * z;
  // lambda z + (Lambda-lambda)(softplus(z) - log 2), stable for large |z|
  double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return lambda * z + (Lambda - lambda) * (sp - M_LN2);
}

double RhoSpec::rho_bar_prime(double z) const {
  if (profile == Profile::LinearSlope) return slope;
  double s = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : 1.0 - 1.0 / (1.0 + std::exp(z));
  return lambda + (Lambda - lambda) * s;
}

double RhoSpec::rho(double z, Vec2 y) const {
  if (profile != Profile::PowerScaled || p == 0.0) return rho_bar(z);
  double r = norm(y);
  double rp = std::pow(r, p);
  return rp * rho_bar(z / rp);
}

double RhoSpec::drho(double z, Vec2 y) const {
  if (profile != Profile::PowerScaled || p == 0.0) return rho_bar_prime(z);
  double rp = std::pow(norm(y), p);
  return rho_bar_prime(z / rp);
}

double RhoSpec::tail_integral(double w_inf, double R, int dim, double sigma) const {
  double surf = dim == 1 ? 2.0 : 2.0 * M_PI;
  if (profile != Profile::PowerScaled || p == 0.0) {
    return rho_bar(w_inf) * (2.0 - sigma) * surf * std::pow(R, -sigma) / sigma;
  }
  // radial integrand rho(w, r) r^{-1-sigma}
  double val = dyadic_radial_integrate(
      [&](double r) {
        double rp = std::pow(r, p);
        return rp * rho_bar(w_inf / rp) * std::pow(r, -1.0 - sigma);
      },
      R);
  return (2.0 - sigma) * surf * val;
}

// ------------------------------------------------------------ OperatorSpec

OperatorSpec OperatorSpec::linear(const KernelSpec& k) {
  k.validate();
  OperatorSpec op;
  op.v = LinearOp{k};
  op.dim = k.dim;
  op.sigma = k.sigma;
  op.sigma0 = k.sigma0;
  op.lambda = k.lambda;
  op.Lambda = k.Lambda;
  return op;
}

OperatorSpec OperatorSpec::extremal(bool plus, int dim, double sigma, double sigma0,
                                    double lambda, double Lambda) {
  if (!(lambda > 0 && lambda <= Lambda)) throw usage_error("extremal: bad constants");
  OperatorSpec op;
  op.v = ExtremalOp{plus};
  op.dim = dim;
  op.sigma = sigma;
  op.sigma0 = sigma0;
  op.lambda = lambda;
  op.Lambda = Lambda;
  return op;
}

OperatorSpec OperatorSpec::isaacs(std::vector<std::vector<KernelSpec>> family) {
  if (family.empty() || family.front().empty()) throw usage_error("isaacs: empty family");
  const KernelSpec& k0 = family.front().front();
  for (const auto& row : family) {
    if (row.empty()) throw usage_error("isaacs: empty alpha row");
    for (const auto& k : row) {
      k.validate();
      if (k.dim != k0.dim || k.sigma != k0.sigma)
        throw usage_error("isaacs: mixed dimensions or orders in family");
    }
  }
  OperatorSpec op;
  op.dim = k0.dim;
  op.sigma = k0.sigma;
  op.sigma0 = k0.sigma0;
  op.lambda = k0.lambda;
  op.Lambda = k0.Lambda;
  op.v = IsaacsOp{std::move(family)};
  return op;
}

OperatorSpec OperatorSpec::rho(const RhoSpec& r, int dim, double sigma, double sigma0) {
  if (!(r.lambda > 0 && r.lambda < r.Lambda)) throw usage_error("rho: need lambda < Lambda");
  OperatorSpec op;
  op.v = RhoOp{r};
  op.dim = dim;
  op.sigma = sigma;
  op.sigma0 = sigma0;
  op.lambda = r.lambda;
  op.Lambda = r.Lambda;
  return op;
}

bool OperatorSpec::x_dependent() const {
  struct V {
    bool operator()(const LinearOp& l) const { return l.kernel.x_dependent(); }
    bool operator()(const ExtremalOp&) const { return false; }
    bool operator()(const IsaacsOp& is) const {
      for (const auto& row : is.family)
        for (const auto& k : row)
          if (k.x_dependent()) return true;
      return false;
    }
    bool operator()(const RhoOp&) const { return false; }
    bool operator()(const FrozenOp&) const { return false; }
    bool operator()(const RescaledOp& r) const { return r.inner->x_dependent(); }
    bool operator()(const RegularizedOp& r) const { return r.inner->x_dependent(); }
  };
  return std::visit(V{}, v);
}

OperatorSpec freeze(const OperatorSpec& op, Vec2 x0) {
  OperatorSpec out = op;
  out.v = FrozenOp{std::make_shared<OperatorSpec>(op), x0};
  return out;
}

OperatorSpec rescale(const OperatorSpec& op, double mu, double gamma) {
  if (!(mu > 0)) throw usage_error("rescale: amplitude must be positive");
  if (!(gamma > 0 && gamma <= 1.0)) throw usage_error("rescale: dilation must be in (0,1]");
  OperatorSpec out = op;
  out.v = RescaledOp{std::make_shared<OperatorSpec>(op), mu, gamma};
  return out;
}

OperatorSpec regularize(const OperatorSpec& op, double eps) {
  if (!(eps > 0 && eps < 0.25)) throw usage_error("regularize: eps must be in (0, 1/4)");
  OperatorSpec out = op;
  out.v = RegularizedOp{std::make_shared<OperatorSpec>(op), eps};
  return out;
}

// ------------------------------------------------------------- evaluation

namespace {

struct Env {
  const QuadratureScheme* Q = nullptr;
  std::optional<Vec2> frozen;
};

void check_exterior_reach(const Field& u, const QuadratureScheme& Q) {
  double sr = u.exterior.support_radius();
  if (std::isinf(sr) || sr > Q.r_far - 1.0 + 1e-9)
    throw evaluation_error(
        "operator evaluation: exterior data must settle to its far form within r_far - 1");
}

double w_inf_value(const Field& u, Vec2 x, IVec2 xi) {
  return u.exterior.symmetric_far_value(x, u.grid.dim) - 2.0 * u.at(xi);
}

// generalized linear quadrature with a radial weight modifier:
//   (2-s)  sum_j  coef(y_j) wmod(|y_j|) delta2(x, y_j) W_j
//   [+ near closed form]  [+ afar * w_inf * tail]
// near assumes wmod == 1 on the near ball, tail assumes wmod == 1 beyond r_far.
template <class CoefF, class WModF>
double quad_linear(const QuadratureScheme& Q, const Field& u, IVec2 xi, CoefF&& coef,
                   WModF&& wmod, bool near_on, double abar, bool tail_on, double afar,
                   double w_inf) {
  double mid = 0.0;
  for (const auto& c : Q.cells) {
    double m = wmod(norm(c.y));
    if (m == 0.0) continue;
    mid += coef(c.y) * m * u.delta2(xi, c.offset) * c.w;
  }
  double val = (2.0 - Q.sigma) * mid;
  if (near_on) val += Q.near_linear(abar, u.quadratic_model(xi));
  if (tail_on) val += afar * w_inf * Q.tail_factor(Q.r_far);
  return val;
}

template <class WModF>
double quad_extremal(const QuadratureScheme& Q, const Field& u, IVec2 xi, bool plus,
                     double lam, double Lam, WModF&& wmod, bool near_on, bool tail_on,
                     double w_inf) {
  double mid = 0.0;
  for (const auto& c : Q.cells) {
    double m = wmod(norm(c.y));
    if (m == 0.0) continue;
    double d = u.delta2(xi, c.offset);
    double dp = std::max(d, 0.0), dm = std::max(-d, 0.0);
    mid += m * c.w * (plus ? (Lam * dp - lam * dm) : (lam * dp - Lam * dm));
  }
  double val = (2.0 - Q.sigma) * mid;
  if (near_on) val += Q.near_extremal(plus, lam, Lam, u.quadratic_model(xi));
  if (tail_on) {
    double wp = std::max(w_inf, 0.0), wm = std::max(-w_inf, 0.0);
    val += (plus ? (Lam * wp - lam * wm) : (lam * wp - Lam * wm)) * Q.tail_factor(Q.r_far);
  }
  return val;
}

struct One {
  double operator()(double) const { return 1.0; }
  double operator()(Vec2) const { return 1.0; }
};

double eval_linear_kernel(const KernelSpec& K, const QuadratureScheme& Q, const Field& u,
                          IVec2 xi, const Env& env) {
  Vec2 x = u.grid.point(xi);
  Vec2 cx = env.frozen.value_or(x);
  double abar = K.coefficient(cx, {0.5 * Q.r_near, 0});
  double afar = K.far_coefficient(cx);
  return quad_linear(
      Q, u, xi, [&](Vec2 y) { return K.coefficient(cx, y); }, One{}, true, abar, true, afar,
      w_inf_value(u, x, xi));
}

double eval_isaacs_family(const IsaacsOp& is, const QuadratureScheme& Q, const Field& u,
                          IVec2 xi, const Env& env) {
  double best_beta = 0.0;
  bool first_beta = true;
  for (const auto& row : is.family) {
    double best_alpha = 0.0;
    bool first_alpha = true;
    for (const auto& k : row) {
      double v = eval_linear_kernel(k, Q, u, xi, env);
      if (first_alpha || v > best_alpha) {
        best_alpha = v;
        first_alpha = false;
      }
    }
    if (first_beta || best_alpha < best_beta) {
      best_beta = best_alpha;
      first_beta = false;
    }
  }
  return best_beta;
}

double eval_rho_plain(const RhoSpec& R, const QuadratureScheme& Q, const Field& u, IVec2 xi) {
  Vec2 x = u.grid.point(xi);
  double mid = 0.0;
  for (const auto& c : Q.cells) mid += R.rho(u.delta2(xi, c.offset), c.y) * c.w;
  double val = (2.0 - Q.sigma) * mid;
  val += R.drho(0.0, {0.5 * Q.r_near, 0}) * Q.near_linear(1.0, u.quadratic_model(xi));
  val += R.tail_integral(w_inf_value(u, x, xi), Q.r_far, u.grid.dim, Q.sigma);
  return val;
}

// resolved form of a regularizable inner operator
struct InnerResolved {
  const LinearOp* lin = nullptr;
  const ExtremalOp* ext = nullptr;
  const IsaacsOp* isa = nullptr;
  const RhoOp* rho = nullptr;
  std::optional<Vec2> frozen;
  const OperatorSpec* spec = nullptr;
};

InnerResolved resolve_inner(const OperatorSpec& op, std::optional<Vec2> frozen) {
  InnerResolved r;
  r.spec = &op;
  r.frozen = frozen;
  if (const auto* f = std::get_if<FrozenOp>(&op.v)) return resolve_inner(*f->inner, f->x0);
  if (const auto* l = std::get_if<LinearOp>(&op.v)) r.lin = l;
  else if (const auto* e = std::get_if<ExtremalOp>(&op.v)) r.ext = e;
  else if (const auto* i = std::get_if<IsaacsOp>(&op.v)) r.isa = i;
  else if (const auto* rr = std::get_if<RhoOp>(&op.v)) r.rho = rr;
  else
    throw evaluation_error("regularize: inner operator must be linear, extremal, Isaacs, rho, "
                           "or a frozen version of these");
  return r;
}

Vec2 clamp_freeze(Vec2 z, double eps) {
  double r = norm(z);
  if (r <= 1.0 - eps) return z;
  return ((1.0 - eps) / r) * z;
}

// lattice mollifier nodes for the x-smoothing convolution, weights normalized
// to unit mass so discrete ellipticity is preserved exactly
std::vector<std::pair<Vec2, double>> mollifier_nodes(const Grid& g, Vec2 x, double eps) {
  CutoffMollifierSpec cm(eps, g.dim);
  std::vector<std::pair<Vec2, double>> out;
  int k = (int)std::ceil(eps / g.h);
  IVec2 xc = g.nearest_index(x);
  double total = 0.0;
  for (int i = -k; i <= k; ++i) {
    if (g.dim == 1) {
      Vec2 z = g.point({xc[0] + i, 0});
      double w = cm.mollifier(x - z);
      if (w > 0) {
        out.push_back({z, w});
        total += w;
      }
    } else {
      for (int j = -k; j <= k; ++j) {
        Vec2 z = g.point({xc[0] + i, xc[1] + j});
        double w = cm.mollifier(x - z);
        if (w > 0) {
          out.push_back({z, w});
          total += w;
        }
      }
    }
  }
  if (out.empty() || total <= 0) {
    out.push_back({x, 1.0});
    return out;
  }
  for (auto& p : out) p.second /= total;
  return out;
}

double eval_impl(const OperatorSpec& op, const Field& u, IVec2 xi, Env env);

double eval_regularized(const RegularizedOp& reg, const OperatorSpec& outer, const Field& u,
                        IVec2 xi, const Env& env) {
  const QuadratureScheme& Q = *env.Q;
  double eps = reg.eps;
  if (eps < 2.0 * Q.r_near - 1e-12)
    throw evaluation_error(
        "regularized evaluation: eps must be >= 2 * near radius; refine the grid");
  CutoffMollifierSpec cm(eps, u.grid.dim);
  auto one_minus_phi = [&](double r) { return 1.0 - cm.cutoff_radial(r); };
  auto phi = [&](double r) { return cm.cutoff_radial(r); };
  Vec2 x = u.grid.point(xi);
  double winf = w_inf_value(u, x, xi);

  InnerResolved in = resolve_inner(*reg.inner, env.frozen);

  if (in.rho) {
    // Lemma-7.1 form: rho^eps(z,y) = rho(z (1-phi_eps(y)), y) + phi_eps(y) lambda z
    const RhoSpec& R = in.rho->rho;
    double mid = 0.0;
    for (const auto& c : Q.cells) {
      double d = u.delta2(xi, c.offset);
      double ph = cm.cutoff(c.y);
      mid += (R.rho(d * (1.0 - ph), c.y) + ph * R.lambda * d) * c.w;
    }
    double val = (2.0 - Q.sigma) * mid;
    val += R.lambda * Q.near_linear(1.0, u.quadratic_model(xi));  // phi == 1 near 0
    val += R.tail_integral(winf, Q.r_far, u.grid.dim, Q.sigma);   // phi == 0 far out
    return val;
  }

  double lam = outer.lambda;
  // small-ball fractional replacement: lambda-multiple against phi_eps
  double lam_part =
      lam * quad_linear(Q, u, xi, One{}, phi, true, 1.0, false, 0.0, 0.0);

  // coefficient term on w (1 - phi_eps), mollified in x with freeze clamping
  auto term_at = [&](Vec2 z) {
    Env e = env;
    e.frozen = in.frozen ? *in.frozen : clamp_freeze(z, eps);
    if (in.lin) {
      const KernelSpec& K = in.lin->kernel;
      Vec2 cx = *e.frozen;
      return quad_linear(
          Q, u, xi, [&](Vec2 y) { return K.coefficient(cx, y); }, one_minus_phi, false, 0.0,
          true, K.far_coefficient(cx), winf);
    }
    if (in.ext) {
      return quad_extremal(Q, u, xi, in.ext->plus, outer.lambda, outer.Lambda, one_minus_phi,
                           false, true, winf);
    }
    // Isaacs: inf-sup inside the convolution
    double best_beta = 0.0;
    bool first_beta = true;
    for (const auto& row : in.isa->family) {
      double best_alpha = 0.0;
      bool first_alpha = true;
      for (const auto& k : row) {
        Vec2 cx = *e.frozen;
        double v = quad_linear(
            Q, u, xi, [&](Vec2 y) { return k.coefficient(cx, y); }, one_minus_phi, false, 0.0,
            true, k.far_coefficient(cx), winf);
        if (first_alpha || v > best_alpha) {
          best_alpha = v;
          first_alpha = false;
        }
      }
      if (first_beta || best_alpha < best_beta) {
        best_beta = best_alpha;
        first_beta = false;
      }
    }
    return best_beta;
  };

  bool needs_convolution = !in.frozen && in.spec->x_dependent();
  double term1 = 0.0;
  if (!needs_convolution) {
    term1 = term_at(x);
  } else {
    for (const auto& [z, w] : mollifier_nodes(u.grid, x, eps)) term1 += w * term_at(z);
  }
  return term1 + lam_part;
}

double eval_impl(const OperatorSpec& op, const Field& u, IVec2 xi, Env env) {
  const QuadratureScheme& Q = *env.Q;
  if (const auto* l = std::get_if<LinearOp>(&op.v))
    return eval_linear_kernel(l->kernel, Q, u, xi, env);
  if (const auto* e = std::get_if<ExtremalOp>(&op.v)) {
    Vec2 x = u.grid.point(xi);
    return quad_extremal(Q, u, xi, e->plus, op.lambda, op.Lambda, One{}, true, true,
                         w_inf_value(u, x, xi));
  }
  if (const auto* i = std::get_if<IsaacsOp>(&op.v)) return eval_isaacs_family(*i, Q, u, xi, env);
  if (const auto* r = std::get_if<RhoOp>(&op.v)) return eval_rho_plain(r->rho, Q, u, xi);
  if (const auto* f = std::get_if<FrozenOp>(&op.v)) {
    Env e = env;
    e.frozen = f->x0;
    return eval_impl(*f->inner, u, xi, e);
  }
  if (const auto* r = std::get_if<RescaledOp>(&op.v)) {
    // I_{mu,gamma}(u,x) = gamma^sigma mu I(u(./gamma)/mu, gamma x)
    Field v = restrict_translate_scale(u, {0, 0}, r->gamma, 1.0 / r->mu);
    Vec2 px = r->gamma * u.grid.point(xi);
    if (!u.grid.is_lattice_point(px))
      throw evaluation_error("rescaled evaluation: gamma * x is not a lattice node");
    Env e = env;
    if (env.frozen) e.frozen = r->gamma * (*env.frozen);
    double val = eval_impl(*r->inner, v, u.grid.nearest_index(px), e);
    return std::pow(r->gamma, op.sigma) * r->mu * val;
  }
  const auto& reg = std::get<RegularizedOp>(op.v);
  return eval_regularized(reg, op, u, xi, env);
}

const QuadratureScheme& scheme_for(const OperatorSpec& op, const Field& u) {
  return QuadratureScheme::get(op.dim, u.grid.h, op.sigma, u.grid.r_out - 1.0);
}

}  // namespace

std::vector<std::pair<Vec2, double>> mollifier_lattice_weights(const Grid& g, Vec2 x,
                                                               double eps) {
  return mollifier_nodes(g, x, eps);
}

double eval(const OperatorSpec& op, const Field& u, IVec2 x) {
  if (op.dim != u.grid.dim) throw usage_error("eval: dimension mismatch");
  const QuadratureScheme& Q = scheme_for(op, u);
  check_exterior_reach(u, Q);
  Env env{&Q, std::nullopt};
  return eval_impl(op, u, x, env);
}

std::vector<double> eval_interior(const OperatorSpec& op, const Field& u,
                                  const std::vector<IVec2>& nodes) {
  const QuadratureScheme& Q = scheme_for(op, u);
  check_exterior_reach(u, Q);
  std::vector<double> out(nodes.size());
  Env env{&Q, std::nullopt};
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = eval_impl(op, u, nodes[i], env);
  return out;
}

double eval_extremal_of(const OperatorSpec& op, bool plus, const Field& v, IVec2 x) {
  OperatorSpec m = OperatorSpec::extremal(plus, op.dim, op.sigma, op.sigma0, op.lambda,
                                          op.Lambda);
  return eval(m, v, x);
}

double fractional_laplacian(const Field& u, IVec2 x, double sigma, double r_far) {
  const QuadratureScheme& Q = QuadratureScheme::get(u.grid.dim, u.grid.h, sigma, r_far);
  check_exterior_reach(u, Q);
  Vec2 p = u.grid.point(x);
  return quad_linear(Q, u, x, One{}, One{}, true, 1.0, true, 1.0, w_inf_value(u, p, x));
}

SplitF split_F(const OperatorSpec& op, const Field& u, IVec2 x) {
  const auto* reg = std::get_if<RegularizedOp>(&op.v);
  if (!reg) throw usage_error("split_F: operator is not regularized");
  const QuadratureScheme& Q = scheme_for(op, u);
  check_exterior_reach(u, Q);
  Env env{&Q, std::nullopt};
  double jeps = eval_impl(op, u, x, env);

  // F = J^eps - C0 * fractional laplacian, with the two pieces computed from
  // their defining quadratures (the lambda phi-part and the C0 (1-phi)-part
  // reassemble the full kernel)
  CutoffMollifierSpec cm(reg->eps, u.grid.dim);
  auto one_minus_phi = [&](double r) { return 1.0 - cm.cutoff_radial(r); };
  Vec2 p = u.grid.point(x);
  double winf = w_inf_value(u, p, x);
  double C0 = op.lambda;
  double lam_phi_part = C0 * quad_linear(Q, u, x, One{},
                                         [&](double r) { return cm.cutoff_radial(r); }, true,
                                         1.0, false, 0.0, 0.0);
  double term1 = jeps - lam_phi_part;  // the coefficient term on w (1-phi)
  double pure_1mphi =
      C0 * quad_linear(Q, u, x, One{}, one_minus_phi, false, 0.0, true, 1.0, winf);
  SplitF out;
  out.C0 = C0;
  out.F = term1 - pure_1mphi;
  return out;
}

CoefficientTable linearize_rho(const OperatorSpec& rho_op, const Field& u, IVec2 h_shift,
                               const std::vector<IVec2>& nodes) {
  const auto* r = std::get_if<RhoOp>(&rho_op.v);
  if (!r) throw usage_error("linearize_rho: operator is not a rho operator");
  const Grid& g = u.grid;
  if (norm(g.point(h_shift)) >= 0.5)
    throw usage_error("linearize_rho: |h| must be below 1/2");
  const QuadratureScheme& Q = scheme_for(rho_op, u);
  const RhoSpec& R = r->rho;
  const GaussRule& gl = gauss_legendre(16);

  CoefficientTable t;
  t.nodes = nodes;
  t.mid.resize(nodes.size());
  t.near_bar.resize(nodes.size());
  t.far.resize(nodes.size());
  bool zero_shift = h_shift[0] == 0 && h_shift[1] == 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    IVec2 xi = nodes[i];
    IVec2 xh = xi + h_shift;
    t.mid[i].resize(Q.cells.size());
    for (std::size_t j = 0; j < Q.cells.size(); ++j) {
      const MidCell& c = Q.cells[j];
      double d0 = u.delta2(xi, c.offset);
      double a;
      if (zero_shift) {
        a = R.drho(d0, c.y);
      } else {
        double d1 = u.delta2(xh, c.offset);
        a = 0.0;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
          double tq = 0.5 * (gl.x[q] + 1.0);
          a += 0.5 * gl.w[q] * R.drho(tq * d1 + (1.0 - tq) * d0, c.y);
        }
      }
      if (!(a > R.lambda - 1e-9 && a < R.Lambda + 1e-9))
        throw ellipticity_violation("linearize_rho: derivative outside (lambda, Lambda)");
      t.mid[i][j] = a;
    }
    t.near_bar[i] = R.drho(0.0, {0.5 * Q.r_near, 0});
    Vec2 x = g.point(xi);
    double w0 = w_inf_value(u, x, xi);
    if (zero_shift) {
      t.far[i] = R.drho(w0, {Q.r_far, 0});
    } else {
      double w1 = w_inf_value(u, g.point(xh), xh);
      double a = 0.0;
      for (std::size_t q = 0; q < gl.x.size(); ++q) {
        double tq = 0.5 * (gl.x[q] + 1.0);
        a += 0.5 * gl.w[q] * R.drho(tq * w1 + (1.0 - tq) * w0, {Q.r_far, 0});
      }
      t.far[i] = a;
    }
  }
  return t;
}

double operator_distance(const OperatorSpec& I, const OperatorSpec& J,
                         const ProbeFamily& probes) {
  if (I.dim != J.dim || I.sigma != J.sigma)
    throw usage_error("operator_distance: operators must share dimension and order");
  double best = 0.0;
  for (const auto& probe : probes.probes) {
    const Grid& g = probe.field.grid;
    for (double gamma : probes.gammas) {
      // ||I_{1,gamma}|| probes: evaluate on u(./gamma) at gamma x, scale gamma^sigma
      Field ug = gamma == 1.0 ? probe.field
                              : restrict_translate_scale(probe.field, {0, 0}, gamma, 1.0);
      double scale = std::pow(gamma, I.sigma);
      for (Vec2 x : probes.eval_points) {
        Vec2 px = gamma * x;
        if (!g.is_lattice_point(px)) continue;
        IVec2 xi = g.nearest_index(px);
        if (norm(g.point(xi)) >= 1.0) continue;
        double d = scale * std::abs(eval(I, ug, xi) - eval(J, ug, xi)) / (1.0 + probe.M);
        best = std::max(best, d);
      }
    }
  }
  return best;
}

}  // namespace nlab
