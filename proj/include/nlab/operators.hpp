#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "nlab/fields.hpp"
#include "nlab/kernels.hpp"
#include "nlab/quadrature.hpp"

namespace nlab {

// Nonlinear density rho(z, y) with rho(0,.) = 0, lambda < d_z rho < Lambda and
// |d2_z rho| <= C0 (1 + |y|^-2). Registry of two closed-form families.
struct RhoSpec {
  enum class Profile { Softplus, PowerScaled, LinearSlope };
  Profile profile = Profile::Softplus;
  double lambda = 0.5, Lambda = 1.0;
  double C0 = 0.125;
  double p = 0.0;      // PowerScaled exponent in [0,2]
  double slope = 1.0;  // LinearSlope: rho_bar(z) = slope * z

  static RhoSpec softplus(double lambda, double Lambda);
  static RhoSpec power_scaled(double lambda, double Lambda, double p);
  static RhoSpec linear_slope(double lambda, double Lambda, double c);

  double rho_bar(double z) const;
  double rho_bar_prime(double z) const;
  double rho(double z, Vec2 y) const;
  double drho(double z, Vec2 y) const;  // d_z rho
  // (2-sigma) ∫_{|y|>R} rho(w_inf, y) |y|^{-n-sigma} dy for constant w_inf
  double tail_integral(double w_inf, double R, int dim, double sigma) const;
};

struct OperatorSpec;
using OpPtr = std::shared_ptr<const OperatorSpec>;

struct LinearOp {
  KernelSpec kernel;
};
struct ExtremalOp {
  bool plus = true;
};
struct IsaacsOp {
  std::vector<std::vector<KernelSpec>> family;  // [beta][alpha]
};
struct RhoOp {
  RhoSpec rho;
};
struct FrozenOp {
  OpPtr inner;
  Vec2 x0{0, 0};
};
struct RescaledOp {
  OpPtr inner;
  double mu = 1.0;
  double gamma = 1.0;
};
struct RegularizedOp {
  OpPtr inner;
  double eps = 0.1;
};

using OpVariant =
    std::variant<LinearOp, ExtremalOp, IsaacsOp, RhoOp, FrozenOp, RescaledOp, RegularizedOp>;

// Tagged description of a nonlocal operator of order sigma with ellipticity
// constants (lambda, Lambda). Immutable; evaluation is pure.
struct OperatorSpec {
  OpVariant v;
  int dim = 1;
  double sigma = 1.5;
  double sigma0 = 1.0;
  double lambda = 1.0;
  double Lambda = 1.0;

  static OperatorSpec linear(const KernelSpec& k);
  static OperatorSpec extremal(bool plus, int dim, double sigma, double sigma0,
                               double lambda, double Lambda);
  static OperatorSpec isaacs(std::vector<std::vector<KernelSpec>> family);
  static OperatorSpec rho(const RhoSpec& r, int dim, double sigma, double sigma0);

  bool x_dependent() const;
  bool translation_invariant() const { return !x_dependent(); }
};

// structural transforms
OperatorSpec freeze(const OperatorSpec& op, Vec2 x0);
OperatorSpec rescale(const OperatorSpec& op, double mu, double gamma);
OperatorSpec regularize(const OperatorSpec& op, double eps);

// Evaluation of I(u, x) at an interior lattice node. The quadrature scheme is
// derived from the field's grid (r_far = r_out - 1) and op.sigma.
double eval(const OperatorSpec& op, const Field& u, IVec2 x);
std::vector<double> eval_interior(const OperatorSpec& op, const Field& u,
                                  const std::vector<IVec2>& nodes);

// convenience for the extremal operators M^{+-} of the op's (lambda, Lambda)
double eval_extremal_of(const OperatorSpec& op, bool plus, const Field& v, IVec2 x);

// F-splitting of a regularized operator: J^eps(u,x) = C0 * fl(u,x) + F(u,x)
// where fl is the (2-sigma)-normalized fractional Laplacian quadrature and
// C0 = lambda. Returns {F value, C0}.
struct SplitF {
  double F = 0.0;
  double C0 = 0.0;
};
SplitF split_F(const OperatorSpec& regularized_op, const Field& u, IVec2 x);

// fractional Laplacian quadrature (a == 1): (2-sigma) ∫ delta2 u |y|^{-n-s} dy
double fractional_laplacian(const Field& u, IVec2 x, double sigma, double r_far);

// Frozen-coefficient linearization of a rho operator along shift h:
// a(x,y) = ∫_0^1 d_z rho(t delta2 u(x+h,y) + (1-t) delta2 u(x,y), y) dt
// tabulated on the quadrature cells of each row node.
struct CoefficientTable {
  std::vector<IVec2> nodes;
  std::vector<std::vector<double>> mid;  // [node][cell]
  std::vector<double> near_bar;          // near-field coefficient per node
  std::vector<double> far;               // far coefficient per node
};
CoefficientTable linearize_rho(const OperatorSpec& rho_op, const Field& u, IVec2 h_shift,
                               const std::vector<IVec2>& nodes);

// Probe-based lower-bound estimator of the operator distance ||I - J||_sigma
// over the documented fixed probe family (see probes.hpp).
struct ProbeFamily;
double operator_distance(const OperatorSpec& I, const OperatorSpec& J,
                         const ProbeFamily& probes);

// lattice nodes and weights of the discrete x-mollification used by the
// regularized evaluation; weights are normalized to unit mass
std::vector<std::pair<Vec2, double>> mollifier_lattice_weights(const Grid& g, Vec2 x,
                                                               double eps);

}  // namespace nlab
