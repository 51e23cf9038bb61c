#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nlab/runner.hpp"
#include "nlab/serialize.hpp"
#include "nlab/version.hpp"

using namespace nlab;

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

int cmd_run(const std::string& config_path) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  RunResult r = run_experiment(cfg);
  std::cout << "run: scheme=" << r.report.scheme << " iterations=" << r.report.iterations
            << " residual=" << format_double(r.report.final_residual())
            << " converged=" << (r.report.converged ? "yes" : "no") << "\n"
            << "artifacts: " << r.output_dir << "\n";
  return r.exit_code;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  std::string out_csv = output_root() + "/" + cfg.output_dir + "/sweep_" + axis + ".csv";
  int rc = run_sweep(cfg, axis, parse_values(values), out_csv);
  std::cout << "sweep: " << out_csv << "\n";
  return rc;
}

int cmd_verify(uint64_t seed, bool inject) {
  auto results = run_property_suites(seed, inject);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name
              << " margin=" << format_double(r.margin)
              << (r.detail.empty() ? "" : " " + r.detail) << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "all properties passed" : "property failures present") << "\n";
  return all ? kExitOk : 1;
}

int cmd_inspect(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".fld") {
    Field f = read_field(path);
    std::cout << "field: dim=" << f.grid.dim << " h=" << format_double(f.grid.h)
              << " r_out=" << format_double(f.grid.r_out) << " nodes=" << f.values.size()
              << "\n";
    double lo = f.values[0], hi = f.values[0];
    for (double v : f.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::cout << "range: [" << format_double(lo) << ", " << format_double(hi) << "]\n";
    std::cout << "exterior: " << exterior_to_json(f.exterior).dump() << "\n";
    return kExitOk;
  }
  json j = json::parse(read_text(path));
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal elliptic laboratory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, axis, values, inspect_path;
  uint64_t seed = 20240501;
  bool inject = false;

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("--config", config_path, "config JSON path")->required();

  auto* sweep = app.add_subcommand("sweep", "batch runs over sigma | h | epsilon");
  sweep->add_option("--config", config_path, "config JSON path")->required();
  sweep->add_option("--axis", axis, "sigma | h | epsilon")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->required();

  auto* verify = app.add_subcommand("verify", "run the module property suites");
  verify->add_option("--seed", seed, "random seed");
  verify->add_flag("--inject-ellipticity-violation", inject,
                   "negative control: corrupt a kernel and expect a failure");

  auto* inspect = app.add_subcommand("inspect", "pretty-print a report or field file");
  inspect->add_option("file", inspect_path, "path to .json or .fld")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(config_path, axis, values);
    if (verify->parsed()) return cmd_verify(seed, inject);
    if (inspect->parsed()) return cmd_inspect(inspect_path);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
