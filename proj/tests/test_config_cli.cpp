#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "nlab/config.hpp"
#include "nlab/runner.hpp"
#include "nlab/serialize.hpp"

using namespace nlab;
using nlohmann::json;

namespace {

json base_config() {
  return json{{"scenario", "exact-ball"},
              {"dimension", 1},
              {"sigma", 1.5},
              {"sigma0", 1.0},
              {"grid", {{"h", 1.0 / 32}, {"r_out", 4.0}}},
              {"output_dir", "cfg_test"},
              {"seed", 99}};
}

std::string slurp(const std::string& p) { return read_text(p); }

}  // namespace

TEST_CASE("config validation names the offending field") {
  json j = base_config();
  j["lambda"] = 2.0;
  j["Lambda"] = 1.0;
  try {
    ExperimentConfig::from_json(j);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("config.lambda") != std::string::npos);
  }

  json j2 = base_config();
  j2["grid"]["spacing"] = 0.1;
  try {
    ExperimentConfig::from_json(j2);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("config.grid.spacing") != std::string::npos);
  }

  json j3 = base_config();
  j3["scenario"] = "thm-9-9";
  CHECK_THROWS_AS(ExperimentConfig::from_json(j3), config_error);

  json j4 = base_config();
  j4["solver"] = {{"scheme", "warp"}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(j4), config_error);

  json j5 = base_config();
  j5["scenario"] = "custom";
  CHECK_THROWS_AS(ExperimentConfig::from_json(j5), config_error);  // operator required
}

TEST_CASE("scenario presets enforce the theorem hypotheses") {
  json j = base_config();
  j["scenario"] = "thm-1-1";
  j["lambda"] = 0.9;
  j["Lambda"] = 1.0;
  ExperimentConfig c = ExperimentConfig::from_json(j);
  REQUIRE(c.op.has_value());
  CHECK(c.op->translation_invariant());
  CHECK(c.rhs.kind == FormKind::Zero);
  CHECK(c.solver.scheme == "policy");

  // thm-1-2 requires sigma > 1
  json j2 = base_config();
  j2["scenario"] = "thm-1-2";
  j2["sigma"] = 0.9;
  j2["sigma0"] = 0.5;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j2), config_error);
}

TEST_CASE("run determinism and manifest completeness") {
  namespace fs = std::filesystem;
  std::string root = "/tmp/nlab_cfg_runs";
  setenv("NLAB_OUTPUT_ROOT", root.c_str(), 1);
  fs::remove_all(root);

  json j = base_config();
  j["grid"]["h"] = 1.0 / 32;
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  cfg.output_dir = "a";
  RunResult ra = run_experiment(cfg);
  cfg.output_dir = "b";
  RunResult rb = run_experiment(cfg);
  CHECK(ra.exit_code == kExitOk);

  // numeric payloads byte-identical (wall_ms is timing metadata, masked)
  auto masked = [&](const std::string& p) {
    json r = json::parse(slurp(p));
    r.erase("wall_ms");
    return r.dump();
  };
  CHECK(masked(root + "/a/solve_report.json") == masked(root + "/b/solve_report.json"));
  CHECK(slurp(root + "/a/regularity_report.json") ==
        slurp(root + "/b/regularity_report.json"));
  CHECK(slurp(root + "/a/solution.fld") == slurp(root + "/b/solution.fld"));
  CHECK(slurp(root + "/a/convergence.csv") == slurp(root + "/b/convergence.csv"));

  // manifest references the config hash and artifacts
  json ma = json::parse(slurp(root + "/a/manifest.json"));
  CHECK(ma.contains("config_hash"));
  CHECK(ma["artifacts"].size() >= 6);
  uint64_t expect_hash = fnv1a64(json::parse(slurp(root + "/a/config.json")).dump(2));
  CHECK(ma["config_hash"].get<uint64_t>() == expect_hash);
  unsetenv("NLAB_OUTPUT_ROOT");
}

TEST_CASE("nonconvergence exit path keeps artifacts") {
  std::string root = "/tmp/nlab_cfg_nonconv";
  setenv("NLAB_OUTPUT_ROOT", root.c_str(), 1);
  std::filesystem::remove_all(root);
  json j = base_config();
  j["scenario"] = "thm-1-1";
  j["lambda"] = 0.9;
  j["solver"] = {{"scheme", "pseudo_time"}, {"tol", 1e-12}, {"max_iter", 3}};
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  RunResult r = run_experiment(cfg);
  CHECK(r.exit_code == kExitNonconvergence);
  CHECK(std::filesystem::exists(root + "/cfg_test/solve_report.json"));
  CHECK(std::filesystem::exists(root + "/cfg_test/solution.fld"));
  unsetenv("NLAB_OUTPUT_ROOT");
}

TEST_CASE("cli end-to-end: run, verify, inspect, exit codes") {
  namespace fs = std::filesystem;
  std::string dir = "/tmp/nlab_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // malformed config: exit 2, message names the field
  {
    json j = base_config();
    j["lambda"] = 2.0;
    j["Lambda"] = 1.0;
    write_text(dir + "/bad.json", j.dump());
    std::string cmd = std::string(NLAB_CLI_PATH) + " run --config " + dir +
                      "/bad.json > " + dir + "/out.txt 2> " + dir + "/err.txt";
    int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 2);
    CHECK(slurp(dir + "/err.txt").find("config.lambda") != std::string::npos);
  }

  // healthy run: exit 0, artifacts in place; inspect prints the report
  {
    json j = base_config();
    j["output_dir"] = "cli_run";
    write_text(dir + "/ok.json", j.dump());
    std::string cmd = "NLAB_OUTPUT_ROOT=" + dir + " " + std::string(NLAB_CLI_PATH) +
                      " run --config " + dir + "/ok.json > " + dir + "/out.txt";
    int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(dir + "/cli_run/manifest.json"));

    std::string icmd = std::string(NLAB_CLI_PATH) + " inspect " + dir +
                       "/cli_run/solve_report.json > " + dir + "/inspect.txt";
    CHECK(WEXITSTATUS(std::system(icmd.c_str())) == 0);
    CHECK(slurp(dir + "/inspect.txt").find("direct") != std::string::npos);
    std::string fcmd = std::string(NLAB_CLI_PATH) + " inspect " + dir +
                       "/cli_run/solution.fld > " + dir + "/inspectf.txt";
    CHECK(WEXITSTATUS(std::system(fcmd.c_str())) == 0);
    CHECK(slurp(dir + "/inspectf.txt").find("field: dim=1") != std::string::npos);
  }

  // sweep over sigma produces the aggregated CSV
  {
    json j = base_config();
    j["output_dir"] = "cli_sweep";
    j["grid"]["h"] = 1.0 / 32;
    write_text(dir + "/sw.json", j.dump());
    std::string cmd = "NLAB_OUTPUT_ROOT=" + dir + " " + std::string(NLAB_CLI_PATH) +
                      " sweep --config " + dir + "/sw.json --axis sigma --values 1.3,1.6 > " +
                      dir + "/sweep_out.txt";
    int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    std::string csv = slurp(dir + "/cli_sweep/sweep_sigma.csv");
    CHECK(csv.find("value,converged") != std::string::npos);
    CHECK(csv.find("1.3") != std::string::npos);
  }
}

TEST_CASE("property suites pass; injected corruption is caught") {
  auto results = run_property_suites(20240501, false);
  CHECK(results.size() >= 20);
  for (const auto& r : results) {
    INFO(r.name, " margin=", r.margin);
    CHECK(r.pass);
  }
  auto bad = run_property_suites(20240501, true);
  bool corrupted_failed = false;
  for (const auto& r : bad)
    if (r.name.find("corrupted") != std::string::npos && !r.pass) corrupted_failed = true;
  CHECK(corrupted_failed);
}
