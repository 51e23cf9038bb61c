#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "nlab/operators.hpp"

namespace nlab {

// Dirichlet problem I(u,.) = f on B_1, u = g outside, posed on a grid.
struct BVPProblem {
  OperatorSpec op;
  Field f;  // right-hand side sampled on the grid (only B_1 values used)
  ExteriorData g;
  Grid grid;

  void validate() const;
};

struct SolveReport {
  Field solution;
  int iterations = 0;
  std::vector<double> residual_history;  // sup-norm residuals per iterate
  std::string scheme;
  double wall_ms = 0.0;
  bool converged = false;
  std::map<std::string, double> extras;

  double final_residual() const {
    return residual_history.empty() ? 0.0 : residual_history.back();
  }
};

// Dense linear system for a variable-coefficient linear nonlocal operator:
// eval(u, x_i) = (A u_int)_i + c_i for any u that agrees with g off B_1.
struct AssembledSystem {
  std::vector<IVec2> nodes;          // interior nodes (rows)
  std::vector<int> row_of;           // lattice linear index -> row (-1 if exterior)
  Eigen::MatrixXd A;
  Eigen::VectorXd c;

  int rows() const { return (int)nodes.size(); }
  // residual-honest application: eval values at all rows for interior vector
  Eigen::VectorXd apply(const Eigen::VectorXd& u_int) const { return A * u_int + c; }
};

// Assembly of -C0 (-Delta)^{sigma/2} in the lab normalization (a == C0 > 0):
// monotone rows (off-diagonal >= 0, diagonal < 0), exterior folded into c.
AssembledSystem assemble_fractional_laplacian(const Grid& grid, double sigma, double C0,
                                              const ExteriorData& g);

// general linear assembly from a kernel spec or a coefficient table
AssembledSystem assemble_linear(const Grid& grid, const KernelSpec& kernel,
                                const ExteriorData& g);
AssembledSystem assemble_from_table(const Grid& grid, double sigma,
                                    const CoefficientTable& table, const ExteriorData& g);

// interior vector <-> full lattice field
Field field_from_interior(const Grid& grid, const std::vector<IVec2>& nodes,
                          const Eigen::VectorXd& u_int, const ExteriorData& g);
Eigen::VectorXd interior_values(const Field& u, const std::vector<IVec2>& nodes);

// LU solve with iterative refinement
Eigen::VectorXd refined_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              int refine_steps = 2);

SolveReport solve_linear_dirichlet(const BVPProblem& p);

// §5 construction: damped Picard iteration on G[u], where G[u] solves the
// C0-fractional-Laplacian system with right-hand side f - F(u,.).
SolveReport solve_fixed_point(const BVPProblem& p, double eps, double theta, double tol,
                              int max_iter);

SolveReport solve_policy_iteration(const BVPProblem& p, double tol, int max_iter);

SolveReport solve_newton_rho(const BVPProblem& p, double tol, int max_iter,
                             int max_halvings = 20);

SolveReport pseudo_time_march(const BVPProblem& p, double cfl, double tol, int max_iter,
                              const Field* initial = nullptr);

}  // namespace nlab
