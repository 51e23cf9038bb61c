#include "nlab/probes.hpp"

#include <cmath>

namespace nlab {

namespace {

double bump_curvature_constant() {
  // max |d^2/dt^2 bump_profile| over (-1,1), computed once by scanning
  static double c = [] {
    double best = 0.0;
    int n = 20001;
    double dt = 2.0 / (n - 1);
    for (int i = 1; i + 1 < n; ++i) {
      double t = -1.0 + i * dt;
      double d2 =
          (bump_profile(t + dt) - 2.0 * bump_profile(t) + bump_profile(t - dt)) / (dt * dt);
      best = std::max(best, std::abs(d2));
    }
    return best;
  }();
  return c;
}

}  // namespace

ProbeFamily ProbeFamily::standard(const Grid& grid, double sigma0) {
  ProbeFamily fam;
  std::vector<double> centers_1d{-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8};
  std::vector<Vec2> centers;
  if (grid.dim == 1) {
    for (double c : centers_1d) centers.push_back({c, 0});
  } else {
    for (double cx : {-0.5, 0.0, 0.5})
      for (double cy : {-0.5, 0.0, 0.5}) centers.push_back({cx, cy});
  }
  std::vector<double> widths{0.1, 0.2, 0.4, 0.8};
  WeightSpec ws{grid.dim, sigma0};

  for (Vec2 c : centers) {
    for (double w : widths) {
      {
        ClosedForm f = make_smooth_bump(1.0, w, c);
        Field fld = sample(grid, f, ExteriorData::of(f));
        double curv = bump_curvature_constant() / (w * w);
        double M = std::max(curv, weighted_l1_norm(fld, ws));
        fam.probes.push_back({std::move(fld), M, "bump"});
      }
      {
        ClosedForm f = make_trunc_quadratic(1.0, w, c);
        Field fld = sample(grid, f, ExteriorData::of(f));
        double M = std::max(2.0, weighted_l1_norm(fld, ws));
        fam.probes.push_back({std::move(fld), M, "quad"});
      }
    }
  }
  if (grid.dim == 1) {
    for (double x : {0.0, 0.25, -0.25, 0.5, -0.5}) fam.eval_points.push_back({x, 0});
  } else {
    for (double x : {0.0, 0.25, -0.25})
      for (double y : {0.0, 0.25, -0.25}) fam.eval_points.push_back({x, y});
  }
  return fam;
}

RandomBump random_bump_field(const Grid& grid, Rng& rng, int n_bumps) {
  ExteriorData ext;
  double curv = 0.0;
  for (int i = 0; i < n_bumps; ++i) {
    Vec2 c{rng.uniform(-0.75, 0.75), grid.dim == 2 ? rng.uniform(-0.75, 0.75) : 0.0};
    double w = rng.uniform(0.15, 0.5);
    double amp = rng.uniform(-1.0, 1.0);
    ext.terms.push_back({1.0, {0, 0}, 1.0, make_smooth_bump(amp, w, c)});
    curv += std::abs(amp) * bump_curvature_constant() / (w * w);
  }
  Field f = sample(
      grid, [&](Vec2 p) { return ext(p, grid.dim); }, ext);
  return {std::move(f), curv};
}

}  // namespace nlab
