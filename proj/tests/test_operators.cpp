#include <doctest.h>

#include <cmath>

#include "nlab/diagnostics.hpp"
#include "nlab/operators.hpp"
#include "nlab/probes.hpp"
#include "nlab/rng.hpp"
#include "oracles.hpp"

using namespace nlab;

namespace {

// ball profile (1-x^2)_+^p as a plain callable for the oracle
auto ball_profile_fn(double p) {
  return [p](double x) {
    double s = 1.0 - x * x;
    return s > 0 ? std::pow(s, p) : 0.0;
  };
}

Field ball_profile_field(const Grid& g, double p) {
  return sample(g, make_ball_profile(1.0, p), ExteriorData::zero());
}

}  // namespace

TEST_CASE("eval_linear: affine annihilation") {
  Grid g(1, 1.0 / 64, 4.0);
  ClosedForm aff = make_affine(0.4, -1.7);
  Field u = sample(g, aff, ExteriorData::of(aff));
  KernelSpec k = KernelSpec::step_bands(1, 1.5, 1.0, 0.5, 1.0, 1.0, 2);
  OperatorSpec L = OperatorSpec::linear(k);
  for (IVec2 x : g.interior_nodes()) CHECK(std::abs(eval(L, u, x)) <= 1e-10);
}

TEST_CASE("eval_linear: ball profile against the dense oracle") {
  double sigma = 1.5;
  Grid g(1, 1.0 / 512, 4.0);
  Field u = ball_profile_field(g, sigma / 2.0);
  KernelSpec k = KernelSpec::constant(1, sigma, 1.0, 1.0, 1.0, 1.0);
  OperatorSpec L = OperatorSpec::linear(k);
  double impl = eval(L, u, {0, 0});
  double oracle = oracle::linear_operator_1d(ball_profile_fn(sigma / 2.0),
                                             [](double) { return 1.0; }, sigma, 0.0, {1.0});
  CHECK(impl == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("eval_linear: linearity") {
  Grid g(1, 1.0 / 32, 4.0);
  Rng rng(23);
  RandomBump a = random_bump_field(g, rng);
  RandomBump b = random_bump_field(g, rng);
  OperatorSpec L =
      OperatorSpec::linear(KernelSpec::step_bands(1, 1.5, 1.0, 0.5, 1.0, 1.0, 1));
  Field comb = field_add(field_scale(a.field, 2.0), b.field);
  for (IVec2 x : g.interior_nodes()) {
    double lhs = eval(L, comb, x);
    double rhs = 2.0 * eval(L, a.field, x) + eval(L, b.field, x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("extremal: zero field and bump at its maximum") {
  Grid g(1, 1.0 / 256, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  OperatorSpec mp = OperatorSpec::extremal(true, 1, sigma, 1.0, lam, Lam);
  Field z = sample(g, make_zero(), ExteriorData::zero());
  CHECK(eval(mp, z, {0, 0}) == 0.0);

  // at a global max only the lambda branch of M^+ is active
  ClosedForm bump = make_smooth_bump(1.0, 0.6, {0, 0});
  Field u = sample(g, bump, ExteriorData::of(bump));
  double v = eval(mp, u, {0, 0});
  CHECK(v < 0.0);
  double frac = oracle::linear_operator_1d(
      [](double x) { return bump_profile(x / 0.6); }, [](double) { return 1.0; }, sigma,
      0.0, {0.6});
  CHECK(v == doctest::Approx(lam * frac).epsilon(1e-4));
}

TEST_CASE("isaacs: singleton family equals linear, two-kernel sup equals M+ at a max") {
  Grid g(1, 1.0 / 64, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  KernelSpec klo = KernelSpec::constant(1, sigma, 1.0, lam, Lam, lam);
  KernelSpec khi = KernelSpec::constant(1, sigma, 1.0, lam, Lam, Lam);
  OperatorSpec single = OperatorSpec::isaacs({{klo}});
  OperatorSpec lin = OperatorSpec::linear(klo);
  Rng rng(31);
  RandomBump u = random_bump_field(g, rng);
  for (IVec2 x : g.interior_nodes())
    CHECK(eval(single, u.field, x) == doctest::Approx(eval(lin, u.field, x)).epsilon(1e-14));

  // sup over {lambda, Lambda} kernels at the max of a bump
  OperatorSpec sup2 = OperatorSpec::isaacs({{klo, khi}});
  OperatorSpec mp = OperatorSpec::extremal(true, 1, sigma, 1.0, lam, Lam);
  ClosedForm bump = make_smooth_bump(1.0, 0.5, {0, 0});
  Field b = sample(g, bump, ExteriorData::of(bump));
  CHECK(eval(sup2, b, {0, 0}) == doctest::Approx(eval(mp, b, {0, 0})).epsilon(1e-10));
}

TEST_CASE("isaacs: ellipticity sandwich on random pairs") {
  Grid g(1, 1.0 / 32, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  std::vector<std::vector<KernelSpec>> fam(2);
  fam[0] = {KernelSpec::constant(1, sigma, 1.0, lam, Lam, lam),
            KernelSpec::step_bands(1, sigma, 1.0, lam, Lam, 1.0, 1)};
  fam[1] = {KernelSpec::constant(1, sigma, 1.0, lam, Lam, Lam),
            KernelSpec::step_bands(1, sigma, 1.0, lam, Lam, 1.5, 3)};
  OperatorSpec I = OperatorSpec::isaacs(fam);
  Rng rng(37);
  for (int t = 0; t < 20; ++t) {
    RandomBump u = random_bump_field(g, rng);
    RandomBump v = random_bump_field(g, rng);
    auto res = sandwich_check(I, u.field, v.field, 1e-8 * (1.0 + v.curvature_bound));
    CHECK(res.pass);
  }
}

TEST_CASE("rho operator") {
  Grid g(1, 1.0 / 64, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  OperatorSpec R = OperatorSpec::rho(RhoSpec::softplus(lam, Lam), 1, sigma, 1.0);

  Field z = sample(g, make_zero(), ExteriorData::zero());
  CHECK(eval(R, z, {0, 0}) == 0.0);  // rho(0) = 0

  // linear rho equals c times the a == 1 linear operator
  double c = 0.75;
  OperatorSpec Rlin = OperatorSpec::rho(RhoSpec::linear_slope(lam, Lam, c), 1, sigma, 1.0);
  OperatorSpec L = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 1.0, 1.0, 1.0));
  Rng rng(41);
  RandomBump u = random_bump_field(g, rng);
  for (IVec2 x : g.interior_nodes())
    CHECK(eval(Rlin, u.field, x) ==
          doctest::Approx(c * eval(L, u.field, x)).epsilon(1e-10));

  // softplus value on a fixed bump against the dense oracle
  Grid gf(1, 1.0 / 512, 4.0);
  ClosedForm bump = make_smooth_bump(1.0, 0.5, {0, 0});
  Field ub = sample(gf, bump, ExteriorData::of(bump));
  RhoSpec rs = RhoSpec::softplus(lam, Lam);
  double impl = eval(OperatorSpec::rho(rs, 1, sigma, 1.0), ub, {0, 0});
  double orc = oracle::rho_operator_1d([](double x) { return bump_profile(x / 0.5); },
                                       [&](double zz) { return rs.rho_bar(zz); }, sigma, 0.0,
                                       {0.5});
  CHECK(impl == doctest::Approx(orc).epsilon(1e-4));
}

TEST_CASE("freeze") {
  Grid g(1, 1.0 / 64, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  Rng rng(43);
  RandomBump u = random_bump_field(g, rng);

  // translation-invariant kernel: freeze is the identity
  OperatorSpec L = OperatorSpec::linear(KernelSpec::step_bands(1, sigma, 1.0, lam, Lam, 1.0, 1));
  OperatorSpec Lf = freeze(L, {0.3, 0});
  for (IVec2 x : g.interior_nodes())
    CHECK(eval(Lf, u.field, x) == doctest::Approx(eval(L, u.field, x)).epsilon(1e-14));

  // freeze at x0, evaluate at x0: equals unfrozen
  KernelSpec rip = KernelSpec::ripple_x(1, sigma, 1.0, lam, Lam, {3.0, 0}, 1.0, 2.0);
  OperatorSpec Lr = OperatorSpec::linear(rip);
  Vec2 x0{0.25, 0};
  IVec2 xi = g.nearest_index(x0);
  OperatorSpec Lrf = freeze(Lr, x0);
  CHECK(eval(Lrf, u.field, xi) == doctest::Approx(eval(Lr, u.field, xi)).epsilon(1e-14));

  // frozen at 0 vs frozen at 0.5 on a fixed bump: nondegenerate, oracle-bounded
  ClosedForm bumpf = make_smooth_bump(1.0, 0.5, {0, 0});
  Grid gf(1, 1.0 / 256, 4.0);
  Field ub = sample(gf, bumpf, ExteriorData::of(bumpf));
  double e0 = eval(freeze(Lr, {0.0, 0}), ub, {0, 0});
  double e5 = eval(freeze(Lr, {0.5, 0}), ub, {0, 0});
  // oracle values for both frozen coefficients
  auto aat = [&](double x0v) {
    return [&rip, x0v](double y) { return rip.coefficient({x0v, 0}, {y, 0}); };
  };
  auto bump_fn = [](double x) { return bump_profile(x / 0.5); };
  double o0 = oracle::linear_operator_1d(bump_fn, aat(0.0), 1.5, 0.0, {0.5, 2.0});
  double o5 = oracle::linear_operator_1d(bump_fn, aat(0.5), 1.5, 0.0, {0.5, 2.0});
  CHECK(e0 == doctest::Approx(o0).epsilon(1e-4));
  CHECK(e5 == doctest::Approx(o5).epsilon(1e-4));
  double diff = std::abs(e0 - e5);
  CHECK(diff >= 1e-6);
  double abs_mass = oracle::linear_operator_1d(
      [&](double x) { return std::abs(bump_profile(x / 0.5)); }, [](double) { return 1.0; },
      1.5, 0.0);
  (void)abs_mass;
  // |a(0,y) - a(0.5,y)| <= (Lambda - lambda), so the difference is bounded by
  // (Lambda - lambda) times the absolute-integrand oracle mass
  double abs_bound = 0.0;
  {
    auto f = [&](double y) {
      double d2 = bump_fn(0.0 + y) - 2.0 * bump_fn(0.0) + bump_fn(0.0 - y);
      return std::abs(d2) * std::pow(std::abs(y), -2.5);
    };
    abs_bound = (2.0 - 1.5) * 2.0 * oracle::composite_integral(f, 1e-8, 8.0, 400000);
  }
  CHECK(diff <= (Lam - lam) * abs_bound * (1.0 + 1e-3));
}

TEST_CASE("rescale") {
  Grid g(1, 1.0 / 64, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  Rng rng(47);
  RandomBump u = random_bump_field(g, rng);
  OperatorSpec mp = OperatorSpec::extremal(true, 1, sigma, 1.0, lam, Lam);

  // identity parameters
  OperatorSpec id = rescale(mp, 1.0, 1.0);
  for (IVec2 x : g.interior_nodes())
    CHECK(eval(id, u.field, x) == doctest::Approx(eval(mp, u.field, x)).epsilon(1e-14));

  // defining identity: rescaled evaluation equals the manually assembled
  // gamma^sigma mu I(u(./gamma)/mu, gamma x)
  double mu = 2.0, gamma = 0.5;
  OperatorSpec rs = rescale(mp, mu, gamma);
  Field ut = restrict_translate_scale(u.field, {0, 0}, gamma, 1.0 / mu);
  for (int i : {-16, 0, 8, 24}) {
    IVec2 x{i, 0};
    IVec2 gx{i / 2, 0};
    double manual = std::pow(gamma, sigma) * mu * eval(mp, ut, gx);
    CHECK(eval(rs, u.field, x) == doctest::Approx(manual).epsilon(1e-13));
  }

  // extremal invariance under rescaling, up to quadrature resolution
  Grid gf(1, 1.0 / 256, 4.0);
  ClosedForm bump = make_smooth_bump(1.0, 0.7, {0, 0});
  Field ub = sample(gf, bump, ExteriorData::of(bump));
  OperatorSpec rs2 = rescale(mp, 1.0, 0.5);
  for (int i : {0, 32}) {
    double a = eval(mp, ub, {i, 0});
    double b = eval(rs2, ub, {i, 0});
    CHECK(b == doctest::Approx(a).epsilon(2e-3));
  }

  // constant-kernel homogeneity: gamma^sigma scaling of the dilated field
  OperatorSpec L = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 1, 1, 1));
  OperatorSpec Lrs = rescale(L, 1.0, 0.25);
  Field ut4 = restrict_translate_scale(ub, {0, 0}, 0.25, 1.0);
  double lhs = eval(Lrs, ub, {32, 0});
  double rhs = std::pow(0.25, sigma) * eval(L, ut4, {8, 0});
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));

  CHECK_THROWS_AS(rescale(mp, -1.0, 0.5), usage_error);
  CHECK_THROWS_AS(rescale(mp, 1.0, 1.5), usage_error);
}

TEST_CASE("regularize: pure fractional multiple is reproduced exactly") {
  Grid g(1, 1.0 / 64, 4.0);
  double sigma = 1.5, c = 0.8;
  OperatorSpec L = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, c, c, c));
  OperatorSpec J = regularize(L, 0.2);
  Rng rng(53);
  RandomBump u = random_bump_field(g, rng);
  for (IVec2 x : g.interior_nodes())
    CHECK(eval(J, u.field, x) == doctest::Approx(eval(L, u.field, x)).epsilon(1e-8));
  CHECK_THROWS_AS(regularize(L, 0.3), usage_error);
  CHECK_THROWS_AS(regularize(L, 0.0), usage_error);
}

TEST_CASE("regularize: sandwich and eps->0 distance decay") {
  Grid g(1, 1.0 / 128, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  std::vector<std::vector<KernelSpec>> fam(2);
  fam[0] = {KernelSpec::constant(1, sigma, 1.0, lam, Lam, lam),
            KernelSpec::step_bands(1, sigma, 1.0, lam, Lam, 1.0, 1)};
  fam[1] = {KernelSpec::constant(1, sigma, 1.0, lam, Lam, Lam),
            KernelSpec::step_bands(1, sigma, 1.0, lam, Lam, 1.5, 3)};
  OperatorSpec I = OperatorSpec::isaacs(fam);

  Rng rng(59);
  RandomBump u = random_bump_field(g, rng);
  RandomBump v = random_bump_field(g, rng);
  OperatorSpec J = regularize(I, 0.1);
  auto res = sandwich_check(J, u.field, v.field, 1e-8 * (1.0 + v.curvature_bound));
  CHECK(res.pass);

  ProbeFamily probes = ProbeFamily::standard(g, 1.0);
  double prev = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    double d = operator_distance(I, regularize(I, eps), probes);
    CHECK(d < prev);
    CHECK(d > 0.0);
    prev = d;
  }
}

TEST_CASE("split_F") {
  Grid g(1, 1.0 / 64, 4.0);
  double sigma = 1.5;

  // pure fractional multiple: F vanishes
  double c = 0.7;
  OperatorSpec L = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, c, c, c));
  OperatorSpec J = regularize(L, 0.2);
  Rng rng(61);
  RandomBump u = random_bump_field(g, rng);
  for (int i : {-20, 0, 15}) {
    SplitF s = split_F(J, u.field, {i, 0});
    CHECK(s.C0 == c);
    CHECK(std::abs(s.F) <= 1e-8);
  }

  // reassembly identity for a genuinely nonlinear inner operator
  double lam = 0.5, Lam = 1.0;
  OperatorSpec I = OperatorSpec::isaacs(
      {{KernelSpec::constant(1, sigma, 1.0, lam, Lam, lam),
        KernelSpec::constant(1, sigma, 1.0, lam, Lam, Lam)}});
  OperatorSpec Ji = regularize(I, 0.2);
  for (int t = 0; t < 5; ++t) {
    RandomBump w = random_bump_field(g, rng);
    for (int i : {-10, 0, 20}) {
      SplitF s = split_F(Ji, w.field, {i, 0});
      double fl = fractional_laplacian(w.field, {i, 0}, sigma, g.r_out - 1.0);
      double jv = eval(Ji, w.field, {i, 0});
      CHECK(jv == doctest::Approx(s.C0 * fl + s.F).epsilon(1e-8));
    }
  }

  // Lipschitz continuity of F in u (measured, finite)
  RandomBump a = random_bump_field(g, rng);
  RandomBump b = random_bump_field(g, rng);
  double dmax = 0.0, fdiff = 0.0;
  for (IVec2 x : g.interior_nodes()) {
    fdiff = std::max(fdiff, std::abs(split_F(Ji, a.field, x).F - split_F(Ji, b.field, x).F));
  }
  for (std::size_t i = 0; i < a.field.values.size(); ++i)
    dmax = std::max(dmax, std::abs(a.field.values[i] - b.field.values[i]));
  CHECK(fdiff > 0.0);
  CHECK(fdiff / dmax < 1e6);  // C_eps finite
  CHECK_THROWS_AS(split_F(I, a.field, {0, 0}), usage_error);
}

TEST_CASE("linearize_rho") {
  Grid g(1, 1.0 / 32, 4.0);
  double lam = 0.5, Lam = 1.0, sigma = 1.5;
  Rng rng(67);
  RandomBump u = random_bump_field(g, rng);
  std::vector<IVec2> nodes = g.interior_nodes();

  // constant derivative for the linear profile
  double c = 0.8;
  OperatorSpec Rlin = OperatorSpec::rho(RhoSpec::linear_slope(lam, Lam, c), 1, sigma, 1.0);
  CoefficientTable t = linearize_rho(Rlin, u.field, {2, 0}, nodes);
  for (const auto& row : t.mid)
    for (double a : row) CHECK(a == doctest::Approx(c).epsilon(1e-14));

  // softplus: all values strictly inside (lambda, Lambda)
  OperatorSpec R = OperatorSpec::rho(RhoSpec::softplus(lam, Lam), 1, sigma, 1.0);
  CoefficientTable ts = linearize_rho(R, u.field, {1, 0}, nodes);
  for (const auto& row : ts.mid)
    for (double a : row) {
      CHECK(a > lam);
      CHECK(a < Lam);
    }

  // h = 0 degenerates to the pointwise derivative
  CoefficientTable t0 = linearize_rho(R, u.field, {0, 0}, nodes);
  RhoSpec rs = RhoSpec::softplus(lam, Lam);
  const QuadratureScheme& Q = QuadratureScheme::get(1, g.h, sigma, g.r_out - 1.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < Q.cells.size(); ++j) {
      double expect = rs.rho_bar_prime(u.field.delta2(nodes[i], Q.cells[j].offset));
      CHECK(t0.mid[i][j] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("operator_distance") {
  Grid g(1, 1.0 / 64, 4.0);
  double sigma = 1.5;
  ProbeFamily probes = ProbeFamily::standard(g, 1.0);

  OperatorSpec L1 = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 0.5, 1.0, 0.5));
  CHECK(operator_distance(L1, L1, probes) == 0.0);

  // constant-coefficient perturbation: distance equals the probe maximum of
  // delta |FracLap| / (1 + M)
  double delta = 0.1;
  OperatorSpec L2 = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 0.5, 1.0, 0.6));
  double dist = operator_distance(L1, L2, probes);
  double expect = 0.0;
  OperatorSpec FL = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 1, 1, 1));
  for (const auto& probe : probes.probes) {
    for (double gamma : probes.gammas) {
      Field ug = gamma == 1.0 ? probe.field
                              : restrict_translate_scale(probe.field, {0, 0}, gamma, 1.0);
      for (Vec2 x : probes.eval_points) {
        Vec2 px = gamma * x;
        if (!g.is_lattice_point(px)) continue;
        IVec2 xi = g.nearest_index(px);
        if (norm(g.point(xi)) >= 1.0) continue;
        expect = std::max(expect, std::pow(gamma, sigma) * delta *
                                      std::abs(eval(FL, ug, xi)) / (1.0 + probe.M));
      }
    }
  }
  CHECK(dist == doctest::Approx(expect).epsilon(1e-10));
  CHECK(dist > 0.0);

  // frozen-vs-unfrozen distance shrinks with the ripple amplitude
  double prev = 1e300;
  for (double eta : {1.0, 0.5, 0.25}) {
    KernelSpec rip = KernelSpec::ripple_x(1, sigma, 1.0, 0.5, 1.0, {3.0, 0}, eta, 2.0);
    OperatorSpec L = OperatorSpec::linear(rip);
    double d = operator_distance(L, freeze(L, {0, 0}), probes);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("quadrature consistency ladder") {
  // |eval - oracle| decreases monotonically over h in {1/32, 1/64, 1/128}
  double sigma = 1.5;
  double oraclev = oracle::linear_operator_1d(ball_profile_fn(0.75),
                                              [](double) { return 1.0; }, sigma, 0.0, {1.0});
  double prev = 1e300;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    Grid g(1, h, 4.0);
    Field u = ball_profile_field(g, 0.75);
    OperatorSpec L = OperatorSpec::linear(KernelSpec::constant(1, sigma, 1.0, 1, 1, 1));
    double err = std::abs(eval(L, u, {0, 0}) - oraclev);
    CHECK(err < prev);
    prev = err;
  }
}
