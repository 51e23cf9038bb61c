#pragma once

#include <string>
#include <vector>

#include "nlab/config.hpp"

namespace nlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonconvergence = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::string output_dir;
  SolveReport report;
  RegularityReport regularity;
};

// run a single experiment; writes solve_report.json, solution.fld,
// regularity_report.json, per-scale CSVs and manifest.json into output_dir
RunResult run_experiment(const ExperimentConfig& cfg);

// one run per axis value; aggregated CSV (value, residual, exponents,
// constants); per-row failures recorded, sweep continues
int run_sweep(const ExperimentConfig& cfg, const std::string& axis,
              const std::vector<double>& values, const std::string& out_csv_path);

// property suites (see properties.cpp); machine-readable pass/fail + margin
struct PropertyResult {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};
std::vector<PropertyResult> run_property_suites(uint64_t seed,
                                                bool inject_ellipticity_violation = false);

std::string output_root();  // $NLAB_OUTPUT_ROOT or "."

}  // namespace nlab
