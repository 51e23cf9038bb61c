#include <doctest.h>

#include <cmath>

#include "nlab/diagnostics.hpp"
#include "nlab/probes.hpp"
#include "nlab/rng.hpp"
#include "nlab/runner.hpp"
#include "oracles.hpp"

using namespace nlab;

namespace {

OperatorSpec unit_linear(double sigma) {
  return OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 1.0, 1.0, 1.0));
}

}  // namespace

TEST_CASE("difference_quotient") {
  Grid g(1, 1.0 / 32, 4.0);
  // constant field -> zero quotients
  Field c = sample(g, make_constant(3.0), ExteriorData::of(make_constant(3.0)));
  Field wc = difference_quotient(c, {2, 0}, 0.5);
  for (double v : wc.values) CHECK(v == 0.0);
  CHECK(wc(Vec2{10.0, 0}) == 0.0);  // exterior of the quotient field

  // affine with slope b at beta = 1: constant field b * h/|h|
  ClosedForm aff = make_affine(0.2, -1.4);
  Field a = sample(g, aff, ExteriorData::of(aff));
  Field wa = difference_quotient(a, {3, 0}, 1.0);
  for (double v : wa.values) CHECK(v == doctest::Approx(-1.4).epsilon(1e-12));

  // linearity in u
  Rng rng(3);
  RandomBump u1 = random_bump_field(g, rng);
  RandomBump u2 = random_bump_field(g, rng);
  Field w1 = difference_quotient(u1.field, {1, 0}, 0.5);
  Field w2 = difference_quotient(u2.field, {1, 0}, 0.5);
  Field ws = difference_quotient(field_add(u1.field, u2.field), {1, 0}, 0.5);
  for (std::size_t i = 0; i < ws.values.size(); ++i)
    CHECK(ws.values[i] == doctest::Approx(w1.values[i] + w2.values[i]).epsilon(1e-12));

  CHECK_THROWS_AS(difference_quotient(a, {0, 0}, 0.5), usage_error);
}

TEST_CASE("a_beta_seminorm") {
  Grid g(1, 1.0 / 64, 4.0);
  double sigma0 = 0.5;

  // zero outside B_1
  Field in = sample(g, make_ball_profile(1.0, 0.75), ExteriorData::zero());
  CHECK(a_beta_seminorm(in, 1.0, sigma0) == 0.0);

  // global constant
  Field c = sample(g, make_constant(2.0), ExteriorData::of(make_constant(2.0)));
  CHECK(a_beta_seminorm(c, 1.0, sigma0) == 0.0);

  // Lipschitz tent with slope 1 against a per-h dense oracle
  ClosedForm tent = make_tent(1.0, 2.0);
  Field u = sample(g, tent, ExteriorData::of(tent));
  double impl = a_beta_seminorm(u, 1.0, sigma0);
  double oracle_sup = 0.0;
  auto tent_fn = [](double x) { return std::max(0.0, 2.0 - std::abs(x)); };
  for (int k = 1; k * g.h < 0.125; ++k) {
    double h = k * g.h;
    auto f = [&](double y) {
      return (std::abs(tent_fn(y + h) - tent_fn(y)) +
              std::abs(tent_fn(-y + h) - tent_fn(-y))) *
             std::pow(y, -1.0 - sigma0);
    };
    double val = oracle::composite_integral(f, 1.0 + 2.0 * h, 2.0 + h, 200000) / h;
    oracle_sup = std::max(oracle_sup, val);
  }
  CHECK(impl == doctest::Approx(oracle_sup).epsilon(1e-4));

  // controlled by the exterior Holder constant times the weight mass
  double mass = 2.0 / sigma0;  // \int_{|y|>1} |y|^{-1-sigma0} dy
  CHECK(impl <= 1.0 * mass + 1e-8);
}

TEST_CASE("residual diagnostics") {
  double sigma = 1.5;
  Grid g(1, 1.0 / 32, 4.0);
  OperatorSpec L = unit_linear(sigma);
  BVPProblem p{L, sample(g, make_constant(-1.0), ExteriorData::zero()), ExteriorData::zero(),
               g};
  SolveReport rep = solve_linear_dirichlet(p);
  ResidualReport rr = residual(L, rep.solution, p.f);
  CHECK(rr.sup <= 1e-10 * 2.0);

  // single-node perturbation grows the residual like the diagonal mass
  AssembledSystem sys = assemble_fractional_laplacian(g, sigma, 1.0, ExteriorData::zero());
  double diag = std::abs(sys.A(sys.rows() / 2, sys.rows() / 2));
  Field pert = rep.solution;
  double delta = 1e-3;
  pert.at(sys.nodes[sys.rows() / 2]) += delta;
  ResidualReport rp = residual(L, pert, p.f);
  CHECK(rp.sup >= 0.5 * diag * delta);

  // f -> f + 1 moves the residual by at most 1
  Field f1 = sample(g, make_constant(0.0), ExteriorData::zero());
  ResidualReport r0 = residual(L, rep.solution, p.f);
  ResidualReport r1 = residual(L, rep.solution, f1);
  CHECK(std::abs(r1.sup - r0.sup) <= 1.0 + 1e-12);
}

TEST_CASE("holder_fit calibration") {
  Grid g(1, 1.0 / 128, 4.0);
  DiagnosticsConfig cfg;
  std::vector<double> scales = cfg.scale_list(g.h);

  // Lipschitz cone
  Field cone = sample(
      g, [](Vec2 p) { return std::abs(p[0] - 0.1); }, ExteriorData::zero());
  HolderFit f1 = holder_fit(cone, {0, 0}, 0.5, 0, scales);
  CHECK(f1.exponent == doctest::Approx(1.0).epsilon(0.05));

  // smooth bump saturates at the Lipschitz floor (scales within its width)
  Field bump = sample(g, make_smooth_bump(1.0, 0.8, {0, 0}),
                      ExteriorData::of(make_smooth_bump(1.0, 0.8, {0, 0})));
  std::vector<double> small_scales{4 * g.h, 8 * g.h, 16 * g.h, 32 * g.h};
  HolderFit f2 = holder_fit(bump, {0, 0}, 0.5, 0, small_scales);
  CHECK(f2.exponent >= 0.95);

  // |x|^gamma cusps recover gamma
  for (double gamma : {0.3, 0.5, 0.7}) {
    Field cusp = sample(
        g, [gamma](Vec2 p) { return std::pow(std::abs(p[0]), gamma); }, ExteriorData::zero());
    HolderFit f = holder_fit(cusp, {0, 0}, 0.5, 0, scales);
    CHECK(f.exponent == doctest::Approx(gamma).epsilon(0.05 / gamma));
  }

  // whole-ball fit of the boundary profile recovers sigma/2
  Field prof = sample(g, make_ball_profile(1.0, 0.75), ExteriorData::zero());
  HolderFit f3 = holder_fit(prof, {0, 0}, 1.0, 0, scales);
  CHECK(f3.exponent == doctest::Approx(0.75).epsilon(0.07));

  CHECK_THROWS_AS(holder_fit(prof, {0, 0}, 0.5, 0, {0.1, 0.2, 0.3}), usage_error);
}

TEST_CASE("weighted_boundary_profile") {
  Grid g(1, 1.0 / 128, 4.0);
  DiagnosticsConfig cfg;
  std::vector<double> sgrid = cfg.grid_s();

  // constant field: zero constant
  Field c = sample(g, make_constant(1.0), ExteriorData::of(make_constant(1.0)));
  BoundaryProfileFit fc = weighted_boundary_profile(c, 0.5, sgrid);
  CHECK(fc.C == 0.0);

  // ball profile at beta = sigma/2: s lands near sigma/2 with moderate C
  Field prof = sample(g, make_ball_profile(1.0, 0.75), ExteriorData::zero());
  BoundaryProfileFit fp = weighted_boundary_profile(prof, 0.75, sgrid);
  CHECK(fp.ok);
  CHECK(fp.r2 >= 0.8);
  CHECK(std::abs(fp.s_regression - 0.75) <= 0.12);
  CHECK(std::abs(fp.s - 0.75) <= 0.2);
  CHECK(fp.C <= 10.0);

  // affine: with s = beta = 1 on the grid, C equals the slope
  std::vector<double> sgrid1 = sgrid;
  sgrid1.push_back(1.0);
  ClosedForm aff = make_affine(0.0, -0.8);
  Field a = sample(g, aff, ExteriorData::of(aff));
  BoundaryProfileFit fa = weighted_boundary_profile(a, 1.0, sgrid1);
  CHECK(fa.s == doctest::Approx(1.0));
  CHECK(fa.C == doctest::Approx(0.8).epsilon(1e-10));
}

TEST_CASE("sandwich_check margins") {
  Grid g(1, 1.0 / 32, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  OperatorSpec I = OperatorSpec::isaacs(
      {{KernelSpec::constant(1, sigma, 1.0, lam, Lam, lam),
        KernelSpec::constant(1, sigma, 1.0, lam, Lam, Lam)}});
  Rng rng(7);
  RandomBump u = random_bump_field(g, rng);

  // v == 0: margins exactly zero
  Field z = sample(g, make_zero(), ExteriorData::zero());
  SandwichResult r0 = sandwich_check(I, u.field, z, 0.0);
  CHECK(r0.pass);
  CHECK(r0.lower_margin == 0.0);
  CHECK(r0.upper_margin == 0.0);

  // v affine: both sides vanish
  ClosedForm aff = make_affine(0.1, 0.7);
  Field va = sample(g, aff, ExteriorData::of(aff));
  SandwichResult ra = sandwich_check(I, u.field, va, 1e-8);
  CHECK(ra.pass);
  CHECK(std::abs(ra.lower_margin) <= 1e-7);
  CHECK(std::abs(ra.upper_margin) <= 1e-7);

  // random bump pair passes with positive margins
  RandomBump v = random_bump_field(g, rng);
  SandwichResult rb = sandwich_check(I, u.field, v.field, 1e-6 * (1 + v.curvature_bound));
  CHECK(rb.pass);
}

TEST_CASE("quotient_equation_check") {
  double sigma = 1.5;
  Grid g(1, 1.0 / 64, 4.0);
  OperatorSpec L = unit_linear(sigma);

  // constant f: bounds reduce to M+- w_h within tolerance
  BVPProblem p{L, sample(g, make_constant(-1.0), ExteriorData::zero()), ExteriorData::zero(),
               g};
  SolveReport rep = solve_linear_dirichlet(p);
  QuotientCheck qc = quotient_equation_check(L, rep.solution, p.f, {1, 0}, 0.5, 1e-4);
  CHECK(qc.f_holder == 0.0);
  CHECK(qc.pass);

  // solved problem with nonconstant Holder f
  BVPProblem p2{L, sample(g, make_cos_ripple(1.0, 2.0), ExteriorData::zero()),
                ExteriorData::zero(), g};
  SolveReport rep2 = solve_linear_dirichlet(p2);
  for (int k : {1, 2, 4}) {
    QuotientCheck q2 = quotient_equation_check(L, rep2.solution, p2.f, {k, 0}, 0.5, 1e-4);
    CHECK(q2.pass);
  }

  // corrupted solution at one node fails the check
  Field bad = rep2.solution;
  bad.at({3, 0}) += 0.01;
  QuotientCheck qb = quotient_equation_check(L, bad, p2.f, {1, 0}, 0.5, 1e-4);
  CHECK_FALSE(qb.pass);
}

TEST_CASE("regularity_report on the zero problem") {
  Grid g(1, 1.0 / 64, 4.0);
  OperatorSpec L = unit_linear(1.5);
  BVPProblem p{L, sample(g, make_zero(), ExteriorData::zero()), ExteriorData::zero(), g};
  SolveReport rep = solve_linear_dirichlet(p);
  DiagnosticsConfig cfg;
  RegularityReport r = regularity_report(p, rep.solution, cfg);
  CHECK(r.alpha0.constant == 0.0);
  CHECK(r.alpha1.constant == 0.0);
  CHECK(r.a_beta == 0.0);
  CHECK(r.weighted_l1 <= 1e-12);
  CHECK(r.osc <= 1e-12);
  CHECK(r.boundary.C == 0.0);
}

TEST_CASE("report determinism: identical runs are bit-identical") {
  Grid g(1, 1.0 / 32, 4.0);
  OperatorSpec L = unit_linear(1.5);
  BVPProblem p{L, sample(g, make_constant(-1.0), ExteriorData::zero()),
               ExteriorData::of(make_smooth_bump(0.2, 0.4, {1.5, 0})), g};
  DiagnosticsConfig cfg;
  SolveReport r1 = solve_linear_dirichlet(p);
  SolveReport r2 = solve_linear_dirichlet(p);
  REQUIRE(r1.solution.values.size() == r2.solution.values.size());
  for (std::size_t i = 0; i < r1.solution.values.size(); ++i)
    CHECK(r1.solution.values[i] == r2.solution.values[i]);
  RegularityReport g1 = regularity_report(p, r1.solution, cfg);
  RegularityReport g2 = regularity_report(p, r2.solution, cfg);
  CHECK(g1.alpha0.exponent == g2.alpha0.exponent);
  CHECK(g1.boundary.C == g2.boundary.C);
  CHECK(g1.a_beta == g2.a_beta);
}
