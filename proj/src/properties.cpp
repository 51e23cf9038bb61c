#include <cmath>
#include <cstring>

#include "nlab/diagnostics.hpp"
#include "nlab/probes.hpp"
#include "nlab/rng.hpp"
#include "nlab/runner.hpp"

namespace nlab {

namespace {

struct Suite {
  std::vector<PropertyResult> results;
  void add(const std::string& name, bool pass, double margin, std::string detail = "") {
    results.push_back({name, pass, margin, std::move(detail)});
  }
};

Vec2 random_point(Rng& rng, int dim, double radius) {
  return {rng.uniform(-radius, radius), dim == 2 ? rng.uniform(-radius, radius) : 0.0};
}

Vec2 random_offset(Rng& rng, int dim, double lo, double hi) {
  for (;;) {
    Vec2 y = random_point(rng, dim, hi);
    double r = norm(y);
    if (r >= lo && r <= hi) return y;
  }
}

void kernel_properties(Suite& s, Rng& rng, bool inject_violation) {
  const int dim = 1;
  const double sig = 1.5, sig0 = 1.0, lam = 0.5, Lam = 1.0;
  std::vector<std::pair<std::string, KernelSpec>> kernels;
  kernels.push_back({"constant", KernelSpec::constant(dim, sig, sig0, lam, Lam, 0.75)});
  kernels.push_back({"step_bands", KernelSpec::step_bands(dim, sig, sig0, lam, Lam, 1.0, 2)});
  kernels.push_back(
      {"ripple_x", KernelSpec::ripple_x(dim, sig, sig0, lam, Lam, {2.0, 0}, 1.0, 2.0)});
  if (inject_violation) {
    KernelSpec bad = kernels[0].second;
    bad.c = 0.5 * lam;  // deliberate ellipticity violation
    kernels.push_back({"corrupted", KernelSpec::unchecked(bad)});
  }
  for (const auto& [name, k] : kernels) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10000; ++i) {
      Vec2 x = random_point(rng, dim, 1.0);
      Vec2 y = random_offset(rng, dim, 1e-6, 4.0);
      double a = k.coefficient(x, y);
      worst = std::min(worst, std::min(a / lam, Lam / a));
    }
    s.add("kernels.ellipticity." + name, worst >= 1.0 - 1e-12, worst - 1.0);
  }

  // bit-exact reproducibility of the weight
  WeightSpec w{dim, sig0};
  bool bitexact = true;
  for (int i = 0; i < 100; ++i) {
    Vec2 x = random_point(rng, dim, 5.0);
    double a = weight_eval(w, x), b = weight_eval(w, x);
    if (std::memcmp(&a, &b, sizeof(a)) != 0) bitexact = false;
  }
  s.add("kernels.weight_bit_reproducible", bitexact, 0.0);

  // cutoff/mollifier symmetry and mollifier unit mass
  CutoffMollifierSpec cm(0.2, 1);
  double sym = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vec2 y = random_point(rng, 1, 0.3);
    sym = std::max(sym, std::abs(cm.cutoff(y) - cm.cutoff(-y)));
    sym = std::max(sym, std::abs(cm.mollifier(y) - cm.mollifier(-y)));
  }
  s.add("kernels.cutoff_mollifier_symmetry", sym == 0.0, -sym);
  for (int dimm : {1, 2}) {
    CutoffMollifierSpec cmd(0.2, dimm);
    double mass;
    if (dimm == 1) {
      mass = segmented_integrate([&](double r) { return cmd.mollifier({r, 0}); }, -0.2, 0.2,
                                 {0.0}, 16, 24);
    } else {
      mass = 2.0 * M_PI *
             segmented_integrate([&](double r) { return r * cmd.mollifier({r, 0}); }, 0.0,
                                 0.2, {}, 16, 24);
    }
    s.add("kernels.mollifier_unit_mass_" + std::to_string(dimm) + "d",
          std::abs(mass - 1.0) <= 1e-10, 1e-10 - std::abs(mass - 1.0));
  }
}

void quadrature_properties(Suite& s) {
  for (int dim : {1, 2}) {
    double h = dim == 1 ? 1.0 / 64 : 1.0 / 8;
    QuadratureScheme q = QuadratureScheme::make(dim, h, 1.5, 3.0);
    double total = q.sum_cell_weights();
    double exact = q.shell_mass(q.r_near, q.r_far);
    double rel = std::abs(total - exact) / exact;
    s.add("quadrature.annulus_consistency_" + std::to_string(dim) + "d", rel <= 1e-8,
          1e-8 - rel);
  }
}

void field_properties(Suite& s, Rng& rng) {
  Grid g(1, 1.0 / 32, 4.0);
  // affine annihilation with matching affine exterior
  ClosedForm aff = make_affine(0.7, -1.3);
  Field u = sample(g, aff, ExteriorData::of(aff));
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    IVec2 x{rng.uniform_int(2 * g.n_half + 1) - g.n_half, 0};
    IVec2 y{rng.uniform_int(2 * g.n_half + 1) - g.n_half, 0};
    if (y[0] == 0) continue;
    double ylen = norm(g.point(y));
    worst = std::max(worst, std::abs(u.delta2(x, y)) / (1.0 + ylen * ylen));
  }
  s.add("fields.delta2_affine_annihilation", worst <= 1e-12, 1e-12 - worst);

  // delta2 symmetry in y
  RandomBump rb = random_bump_field(g, rng);
  double sym = 0.0;
  for (int t = 0; t < 1000; ++t) {
    IVec2 x{rng.uniform_int(41) - 20, 0};
    IVec2 y{rng.uniform_int(2 * g.n_half + 1) - g.n_half, 0};
    if (y[0] == 0) continue;
    sym = std::max(sym, std::abs(rb.field.delta2(x, y) - rb.field.delta2(x, -y)));
  }
  s.add("fields.delta2_symmetric", sym == 0.0, -sym);

  // weighted L1 subadditivity
  WeightSpec w{1, 1.0};
  double margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 5; ++t) {
    RandomBump a = random_bump_field(g, rng);
    RandomBump b = random_bump_field(g, rng);
    double na = weighted_l1_norm(a.field, w), nb = weighted_l1_norm(b.field, w);
    double nab = weighted_l1_norm(field_add(a.field, b.field), w);
    margin = std::min(margin, na + nb + 1e-12 - nab);
  }
  s.add("fields.weighted_l1_subadditive", margin >= 0.0, margin);

  // totality of lookup
  bool total = true;
  for (int t = 0; t < 500; ++t) {
    Vec2 p = random_point(rng, 1, 20.0);
    if (!std::isfinite(rb.field(p))) total = false;
  }
  s.add("fields.lookup_total", total, 0.0);
}

void operator_properties(Suite& s, Rng& rng) {
  const int dim = 1;
  const double sig = 1.5, sig0 = 1.0, lam = 0.9, Lam = 1.0;
  Grid g(dim, 1.0 / 32, 4.0);

  std::vector<std::vector<KernelSpec>> fam(2);
  fam[0] = {KernelSpec::constant(dim, sig, sig0, lam, Lam, lam),
            KernelSpec::step_bands(dim, sig, sig0, lam, Lam, 1.0, 1)};
  fam[1] = {KernelSpec::constant(dim, sig, sig0, lam, Lam, Lam),
            KernelSpec::step_bands(dim, sig, sig0, lam, Lam, 1.5, 3)};
  OperatorSpec isaacs = OperatorSpec::isaacs(fam);
  OperatorSpec linear = OperatorSpec::linear(fam[0][1]);
  OperatorSpec rhoop = OperatorSpec::rho(RhoSpec::softplus(lam, Lam), dim, sig, sig0);
  OperatorSpec reg = regularize(isaacs, 0.2);
  OperatorSpec mplus = OperatorSpec::extremal(true, dim, sig, sig0, lam, Lam);
  OperatorSpec mminus = OperatorSpec::extremal(false, dim, sig, sig0, lam, Lam);

  std::vector<IVec2> nodes = g.interior_nodes();

  // sandwich for each variant
  for (const auto& [name, op] :
       std::vector<std::pair<std::string, const OperatorSpec*>>{
           {"linear", &linear}, {"isaacs", &isaacs}, {"rho", &rhoop}, {"regularized", &reg}}) {
    double margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10; ++t) {
      RandomBump u = random_bump_field(g, rng);
      RandomBump v = random_bump_field(g, rng);
      double tol = 1e-6 * (1.0 + v.curvature_bound);
      SandwichResult r = sandwich_check(*op, u.field, v.field, tol);
      margin = std::min(margin, std::min(r.lower_margin, r.upper_margin) + tol);
    }
    s.add("operators.sandwich." + name, margin >= 0.0, margin);
  }

  // extremality of family members and M+ subadditivity and duality
  double ext_margin = std::numeric_limits<double>::infinity();
  double dual = 0.0, subadd = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10; ++t) {
    RandomBump u = random_bump_field(g, rng);
    RandomBump v = random_bump_field(g, rng);
    std::vector<double> mp = eval_interior(mplus, u.field, nodes);
    std::vector<double> mm = eval_interior(mminus, u.field, nodes);
    for (const auto& row : fam) {
      for (const auto& k : row) {
        std::vector<double> lv = eval_interior(OperatorSpec::linear(k), u.field, nodes);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          ext_margin = std::min(ext_margin, mp[i] - lv[i] + 1e-8);
          ext_margin = std::min(ext_margin, lv[i] - mm[i] + 1e-8);
        }
      }
    }
    Field neg = field_scale(u.field, -1.0);
    std::vector<double> mpn = eval_interior(mplus, neg, nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      dual = std::max(dual, std::abs(mpn[i] + mm[i]));
    Field upv = field_add(u.field, v.field);
    std::vector<double> mpu = mp;
    std::vector<double> mpv = eval_interior(mplus, v.field, nodes);
    std::vector<double> mpuv = eval_interior(mplus, upv, nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      subadd = std::min(subadd, mpu[i] + mpv[i] - mpuv[i] + 1e-8);
  }
  s.add("operators.extremality", ext_margin >= 0.0, ext_margin);
  s.add("operators.duality", dual <= 1e-10, 1e-10 - dual);
  s.add("operators.mplus_subadditive", subadd >= 0.0, subadd);

  // two fields differing by an affine function give identical values
  {
    RandomBump u = random_bump_field(g, rng);
    ClosedForm aff = make_affine(0.3, 0.2);
    Field l = sample(g, aff, ExteriorData::of(aff));
    Field upl = field_add(u.field, l);
    double worst = 0.0;
    for (const OperatorSpec* op : {&isaacs, &mplus, &rhoop}) {
      std::vector<double> a = eval_interior(*op, u.field, nodes);
      std::vector<double> b = eval_interior(*op, upl, nodes);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    s.add("operators.affine_functionality", worst <= 1e-8, 1e-8 - worst);
  }
}

void solver_properties(Suite& s, Rng& rng) {
  (void)rng;
  const int dim = 1;
  const double sig = 1.5, sig0 = 1.0, lam = 0.9, Lam = 1.0;
  Grid g(dim, 1.0 / 32, 4.0);
  std::vector<std::vector<KernelSpec>> fam(1);
  fam[0] = {KernelSpec::constant(dim, sig, sig0, lam, Lam, lam),
            KernelSpec::constant(dim, sig, sig0, lam, Lam, Lam)};
  OperatorSpec isaacs = OperatorSpec::isaacs(fam);

  // comparison principle: f1 <= f2, g1 >= g2  =>  u1 >= u2 - tol
  BVPProblem p1{isaacs, sample(g, make_constant(-1.0), ExteriorData::zero()),
                ExteriorData::of(make_constant(0.1)), g};
  BVPProblem p2{isaacs, sample(g, make_constant(-0.5), ExteriorData::zero()),
                ExteriorData::zero(), g};
  SolveReport r1 = solve_policy_iteration(p1, 1e-10, 50);
  SolveReport r2 = solve_policy_iteration(p2, 1e-10, 50);
  double margin = std::numeric_limits<double>::infinity();
  for (IVec2 n : g.interior_nodes())
    margin = std::min(margin, r1.solution.at(n) - r2.solution.at(n) + 1e-8);
  s.add("solvers.comparison_principle", margin >= 0.0, margin);

  // residual honesty
  ResidualReport rr = residual(isaacs, r1.solution, p1.f);
  double diff = std::abs(rr.sup - r1.final_residual());
  s.add("solvers.residual_honesty", diff <= 1e-12, 1e-12 - diff);
}

void diagnostics_properties(Suite& s, Rng& rng) {
  Grid g(1, 1.0 / 32, 4.0);
  // difference quotient commutes with lattice translation (bitwise)
  RandomBump u = random_bump_field(g, rng);
  Field w = difference_quotient(u.field, {2, 0}, 0.5);
  bool commute = true;
  Field us = restrict_translate_scale(u.field, {3 * g.h, 0}, 1.0, 1.0);
  Field ws = difference_quotient(us, {2, 0}, 0.5);
  for (int i = -g.n_half + 3; i <= g.n_half - 3; ++i) {
    double a = ws.at({i, 0});
    double b = w.at({i - 3, 0});
    if (std::memcmp(&a, &b, sizeof(a)) != 0) commute = false;
  }
  s.add("diagnostics.quotient_translation_commute", commute, 0.0);

  // a_beta is controlled by the exterior Holder constant times the weight mass
  ClosedForm tent = make_tent(1.0, 1.5);
  Field ut = sample(g, tent, ExteriorData::of(tent));
  double sn = a_beta_seminorm(ut, 1.0, 1.0);
  // Lipschitz constant 1; ∫_{|y|>1} |y|^{-1-sigma0} dy = 2/sigma0
  double bound = 1.0 * 2.0 / 1.0 + 1e-8;
  s.add("diagnostics.a_beta_bounded_by_holder", sn <= bound, bound - sn);
}

}  // namespace

std::vector<PropertyResult> run_property_suites(uint64_t seed,
                                                bool inject_ellipticity_violation) {
  Suite s;
  Rng rng(seed);
  kernel_properties(s, rng, inject_ellipticity_violation);
  quadrature_properties(s);
  field_properties(s, rng);
  operator_properties(s, rng);
  solver_properties(s, rng);
  diagnostics_properties(s, rng);
  return s.results;
}

}  // namespace nlab
