#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "nlab/diagnostics.hpp"
#include "nlab/solvers.hpp"

namespace nlab {

struct config_error : usage_error {
  using usage_error::usage_error;
};

struct SolverConfig {
  std::string scheme = "direct";  // direct | fixed_point | policy | newton | pseudo_time
  double tol = 1e-8;
  int max_iter = 200;
  double eps = 0.1;    // fixed_point regularization
  double theta = 1.0;  // fixed_point damping
  double cfl = 0.9;    // pseudo_time
};

// Experiment description; the exact key set is validated recursively and
// unknown keys are rejected with a field-path message.
struct ExperimentConfig {
  std::string scenario = "custom";  // thm-1-1 | thm-1-2 | schauder-6-2 |
                                    // nonlinear-7-2 | exact-ball | custom
  int dimension = 1;
  double sigma = 1.5;
  double sigma0 = 1.0;
  double lambda = 1.0;
  double Lambda = 1.0;
  Grid grid;
  SolverConfig solver;
  DiagnosticsConfig diagnostics;
  std::string output_dir = "out";
  uint64_t seed = 20240501;

  // operator block (filled by scenario presets unless scenario == custom)
  std::optional<OperatorSpec> op;
  ClosedForm rhs;
  ExteriorData exterior;

  BVPProblem problem() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;  // canonical form (for hashing/manifest)
};

// applies scenario presets (operator/data/solver defaults); throws
// config_error for inconsistent settings
void apply_scenario(ExperimentConfig& cfg);

}  // namespace nlab
