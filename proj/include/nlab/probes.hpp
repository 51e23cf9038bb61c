#pragma once

#include <string>
#include <vector>

#include "nlab/fields.hpp"
#include "nlab/rng.hpp"

namespace nlab {

// One probe for the operator-distance estimator: a sampled closed form with
// its declared admissibility bound M (curvature + weighted-L1), fixed at
// construction and recorded.
struct Probe {
  Field field;
  double M = 0.0;
  std::string label;
};

// The documented fixed probe family: smooth bumps and truncated quadratics at
// 9 centers x 4 widths. gamma-dilations (gamma in {1, 1/2, 1/4}) are applied
// inside operator_distance via the operator rescaling.
struct ProbeFamily {
  std::vector<Probe> probes;
  std::vector<double> gammas{1.0, 0.5, 0.25};
  std::vector<Vec2> eval_points;  // multiples of 1/4 inside B_1

  static ProbeFamily standard(const Grid& grid, double sigma0);
};

// Seeded random smooth-bump fields for property suites: a small linear
// combination of bumps with centers in B_{3/4}, widths in [0.15, 0.5],
// amplitudes in [-1, 1]. Returns the field and its declared curvature bound.
struct RandomBump {
  Field field;
  double curvature_bound = 0.0;
};
RandomBump random_bump_field(const Grid& grid, Rng& rng, int n_bumps = 3);

}  // namespace nlab
