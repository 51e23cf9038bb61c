#include "nlab/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "nlab/rng.hpp"
#include "nlab/serialize.hpp"
#include "nlab/version.hpp"

namespace nlab {

namespace fs = std::filesystem;

std::string output_root() {
  const char* env = std::getenv("NLAB_OUTPUT_ROOT");
  return env && *env ? env : ".";
}

namespace {

SolveReport dispatch_solver(const BVPProblem& p, const SolverConfig& s) {
  if (s.scheme == "direct") return solve_linear_dirichlet(p);
  if (s.scheme == "fixed_point")
    return solve_fixed_point(p, s.eps, s.theta, s.tol, s.max_iter);
  if (s.scheme == "policy") return solve_policy_iteration(p, s.tol, s.max_iter);
  if (s.scheme == "newton") return solve_newton_rho(p, s.tol, s.max_iter);
  if (s.scheme == "pseudo_time") return pseudo_time_march(p, s.cfl, s.tol, s.max_iter);
  throw config_error("config.solver.scheme: unknown scheme '" + s.scheme + "'");
}

std::string scale_table_csv(const HolderFit& f) {
  std::string csv = csv_line({"scale", "max_increment", "fit_residual"});
  for (const auto& row : f.table)
    csv += csv_line({format_double(row.scale), format_double(row.max_increment),
                     format_double(row.fit_residual)});
  return csv;
}

// the exact-ball scenario additionally produces a refinement study against
// its own finer-h solve
void write_exact_ball_convergence(const ExperimentConfig& cfg, const std::string& dir) {
  std::vector<double> hs{1.0 / 32, 1.0 / 64, 1.0 / 128};
  double h_ref = 1.0 / 256;
  ExperimentConfig ref_cfg = cfg;
  ref_cfg.grid = Grid(cfg.dimension, h_ref, cfg.grid.r_out);
  apply_scenario(ref_cfg);
  SolveReport ref = solve_linear_dirichlet(ref_cfg.problem());

  std::string csv = csv_line({"h", "linf_error_vs_ref", "ratio"});
  double prev = 0.0;
  for (double h : hs) {
    ExperimentConfig c2 = cfg;
    c2.grid = Grid(cfg.dimension, h, cfg.grid.r_out);
    apply_scenario(c2);
    SolveReport rep = solve_linear_dirichlet(c2.problem());
    double err = 0.0;
    for (IVec2 node : c2.grid.interior_nodes()) {
      Vec2 p = c2.grid.point(node);
      IVec2 rnode = ref_cfg.grid.nearest_index(p);
      err = std::max(err, std::abs(rep.solution.at(node) - ref.solution.at(rnode)));
    }
    csv += csv_line({format_double(h), format_double(err),
                     format_double(prev > 0 ? prev / err : 0.0)});
    prev = err;
  }
  write_text(dir + "/convergence.csv", csv);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult out;
  fs::path dir = fs::path(output_root()) / cfg.output_dir;
  fs::create_directories(dir);
  out.output_dir = dir.string();

  BVPProblem p = cfg.problem();
  out.report = dispatch_solver(p, cfg.solver);
  out.regularity = regularity_report(p, out.report.solution, cfg.diagnostics);

  json canonical = cfg.to_json();
  std::string canonical_str = canonical.dump(2);
  uint64_t hash = fnv1a64(canonical_str);

  write_text((dir / "config.json").string(), canonical_str + "\n");
  write_field(out.report.solution, (dir / "solution.fld").string());
  json sj = solve_report_to_json(out.report, "solution.fld");
  write_text((dir / "solve_report.json").string(), sj.dump(2) + "\n");
  json rj = regularity_report_to_json(out.regularity);
  write_text((dir / "regularity_report.json").string(), rj.dump(2) + "\n");
  write_text((dir / "scales_alpha0.csv").string(), scale_table_csv(out.regularity.alpha0));
  write_text((dir / "scales_alpha1.csv").string(), scale_table_csv(out.regularity.alpha1));

  if (cfg.scenario == "exact-ball") write_exact_ball_convergence(cfg, dir.string());

  json manifest;
  manifest["config_hash"] = hash;
  manifest["version"] = kVersion;
  manifest["rng"] = Rng::name();
  manifest["artifacts"] = {"config.json",      "solution.fld",
                           "solve_report.json", "regularity_report.json",
                           "scales_alpha0.csv", "scales_alpha1.csv"};
  if (cfg.scenario == "exact-ball") manifest["artifacts"].push_back("convergence.csv");
  manifest["wall_ms"] = out.report.wall_ms;
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  out.exit_code = out.report.converged ? kExitOk : kExitNonconvergence;
  return out;
}

int run_sweep(const ExperimentConfig& cfg, const std::string& axis,
              const std::vector<double>& values, const std::string& out_csv_path) {
  if (axis != "sigma" && axis != "h" && axis != "epsilon")
    throw config_error("sweep axis must be one of sigma | h | epsilon");
  std::string csv = csv_line({"value", "converged", "residual", "alpha0", "alpha1",
                              "boundary_s", "boundary_C", "holder_constant", "error"});
  int worst = kExitOk;
  for (double v : values) {
    ExperimentConfig c = cfg;
    try {
      if (axis == "sigma") {
        c.sigma = v;
        c.op.reset();
      } else if (axis == "h") {
        c.grid = Grid(cfg.dimension, v, cfg.grid.r_out);
      } else {
        c.solver.eps = v;
      }
      c.output_dir = cfg.output_dir + "/" + axis + "_" + format_double(v);
      apply_scenario(c);
      RunResult r = run_experiment(c);
      worst = std::max(worst, r.exit_code);
      csv += csv_line({format_double(v), r.report.converged ? "1" : "0",
                       format_double(r.report.final_residual()),
                       format_double(r.regularity.alpha0.exponent),
                       format_double(r.regularity.alpha1.exponent),
                       format_double(r.regularity.boundary.s),
                       format_double(r.regularity.boundary.C),
                       format_double(r.regularity.alpha0.constant), ""});
    } catch (const std::exception& e) {
      csv += csv_line({format_double(v), "0", "", "", "", "", "", "", e.what()});
      worst = std::max(worst, kExitNonconvergence);
    }
  }
  fs::path parent = fs::path(out_csv_path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_text(out_csv_path, csv);
  return worst;
}

}  // namespace nlab
