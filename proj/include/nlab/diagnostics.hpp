#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "nlab/solvers.hpp"

namespace nlab {

struct ResidualReport {
  double sup = 0.0;
  std::vector<IVec2> nodes;
  std::vector<double> values;  // I(u,x) - f(x) per node
};
ResidualReport residual(const OperatorSpec& op, const Field& u, const Field& f);

// w_h(x) = (u(x+h) - u(x)) / |h|^beta on the lattice, exterior handled in
// closed form
Field difference_quotient(const Field& u, IVec2 h_lattice, double beta);

// Eq.-(3.1)-style seminorm: sup over lattice-representable |h| < 1/8 of
// |h|^{-beta} ∫_{|y|>1+2|h|} |u(y+h)-u(y)| |y|^{-n-sigma0} dy.
// The region lies outside B_1 where u equals its exterior closed form.
double a_beta_seminorm(const Field& u, double beta, double sigma0);

struct FitRow {
  double scale = 0.0;
  double max_increment = 0.0;
  double fit_residual = 0.0;
};
struct HolderFit {
  double exponent = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  double exponent_ci = 0.0;  // ~95% half-width from the regression
  double lattice_floor = 0.0;
  std::vector<FitRow> table;
};
// d = 0: fit of log max |u(x+h)-u(x)| against log |h|  -> C^{0,alpha} exponent
// d = 1: fit of log max |u(x+h)-2u(x)+u(x-h)| (slope = 1 + alpha_1)
HolderFit holder_fit(const Field& u, Vec2 center, double radius, int deriv_order,
                     const std::vector<double>& scales);

struct BoundaryProfileFit {
  bool ok = false;
  double s = 0.0;         // best exponent on the grid (minimizes C)
  double C = 0.0;         // sup constant at s
  double s_regression = 0.0;
  double r2 = 0.0;
  int pairs = 0;
};
// |u(x+h) - u(x)| <= C |h|^beta (1-|x|)^{s-beta} over dyadic (x,h) shells
BoundaryProfileFit weighted_boundary_profile(const Field& u, double beta,
                                             const std::vector<double>& s_grid);
// gradient variant: |grad u(x+h) - grad u(x)| <= C |h|^{a'} (1-|x|)^{s-a'-1}
BoundaryProfileFit weighted_boundary_profile_gradient(const Field& u, double alpha_prime,
                                                      const std::vector<double>& s_grid);

struct SandwichResult {
  bool pass = false;
  double lower_margin = 0.0;  // min over nodes of I(u+v)-I(u) - M^- v
  double upper_margin = 0.0;  // min over nodes of M^+ v - (I(u+v)-I(u))
};
SandwichResult sandwich_check(const OperatorSpec& op, const Field& u, const Field& v,
                              double tol);

struct QuotientCheck {
  bool pass = false;
  double worst_upper = 0.0;  // min over nodes of M^+ w_h + [f]_beta
  double worst_lower = 0.0;  // min over nodes of [f]_beta - M^- w_h
  double f_holder = 0.0;
};
// Lemma-3.2-style inequality for translation-invariant operators on B_{3/4}
QuotientCheck quotient_equation_check(const OperatorSpec& op, const Field& u,
                                      const Field& f, IVec2 h, double beta, double tol);

struct RegularityReport {
  HolderFit alpha0;                  // C^{0,alpha} fit on B_{1/2}
  HolderFit alpha1;                  // C^{1,alpha} fit (second increments)
  BoundaryProfileFit boundary;       // value profile
  BoundaryProfileFit boundary_grad;  // gradient profile
  double a_beta = 0.0;
  double beta_used = 0.0;
  double weighted_l1 = 0.0;
  double osc = 0.0;
  double lattice_floor = 0.0;
};

struct DiagnosticsConfig {
  int scales = 5;              // dyadic scales starting at 4h
  double fit_radius = 0.5;     // holder fits on B_{fit_radius}
  double beta = 0.0;           // a_beta / boundary profile exponent; 0 = sigma/2
  std::vector<double> s_grid;  // defaults to {0.05, 0.10, ..., 0.95}

  std::vector<double> scale_list(double h) const;
  std::vector<double> grid_s() const;
  double beta_for(double sigma) const {
    return beta > 0 ? beta : std::min(1.0, 0.5 * sigma);
  }
};

RegularityReport regularity_report(const BVPProblem& p, const Field& solution,
                                   const DiagnosticsConfig& cfg);

// discrete Holder seminorm of a field over interior node pairs at dyadic
// lattice separations
double discrete_holder_seminorm(const Field& f, double beta, double radius);

// ordinary least squares of y against x; returns slope, intercept, r2 and
// slope standard error
struct LinReg {
  double slope = 0.0, intercept = 0.0, r2 = 1.0, slope_se = 0.0;
};
LinReg linear_regression(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nlab
