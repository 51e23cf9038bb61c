#include "nlab/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "nlab/serialize.hpp"

namespace nlab {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& path) {
  if (!j.is_object()) throw config_error(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw config_error(path + "." + it.key() + ": unknown key");
}

template <class T>
T get_or(const json& j, const char* key, T def, const std::string& path) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw config_error(path + "." + key + ": invalid value");
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  reject_unknown(j,
                 {"scenario", "dimension", "sigma", "sigma0", "lambda", "Lambda", "grid",
                  "operator", "solver", "diagnostics", "output_dir", "seed"},
                 "config");
  c.scenario = get_or<std::string>(j, "scenario", "custom", "config");
  c.dimension = get_or<int>(j, "dimension", 1, "config");
  c.sigma = get_or<double>(j, "sigma", 1.5, "config");
  c.sigma0 = get_or<double>(j, "sigma0", 1.0, "config");
  c.lambda = get_or<double>(j, "lambda", 1.0, "config");
  c.Lambda = get_or<double>(j, "Lambda", 1.0, "config");
  c.output_dir = get_or<std::string>(j, "output_dir", "out", "config");
  c.seed = get_or<uint64_t>(j, "seed", 20240501ull, "config");

  if (!(c.dimension == 1 || c.dimension == 2)) throw config_error("config.dimension: must be 1 or 2");
  if (!(c.lambda > 0 && c.lambda <= c.Lambda))
    throw config_error("config.lambda: need 0 < lambda <= Lambda");
  if (!(c.sigma0 > 0 && c.sigma0 < 2)) throw config_error("config.sigma0: must be in (0,2)");
  if (!(c.sigma > c.sigma0 && c.sigma < 2))
    throw config_error("config.sigma: must be in (sigma0, 2)");

  double h = 1.0 / 64, r_out = 4.0;
  if (j.contains("grid")) {
    reject_unknown(j["grid"], {"h", "r_out"}, "config.grid");
    h = get_or<double>(j["grid"], "h", h, "config.grid");
    r_out = get_or<double>(j["grid"], "r_out", r_out, "config.grid");
  }
  try {
    c.grid = Grid(c.dimension, h, r_out);
  } catch (const usage_error& e) {
    throw config_error(std::string("config.grid: ") + e.what());
  }

  if (j.contains("solver")) {
    reject_unknown(j["solver"], {"scheme", "tol", "max_iter", "eps", "theta", "cfl"},
                   "config.solver");
    c.solver.scheme = get_or<std::string>(j["solver"], "scheme", "direct", "config.solver");
    c.solver.tol = get_or<double>(j["solver"], "tol", 1e-8, "config.solver");
    c.solver.max_iter = get_or<int>(j["solver"], "max_iter", 200, "config.solver");
    c.solver.eps = get_or<double>(j["solver"], "eps", 0.1, "config.solver");
    c.solver.theta = get_or<double>(j["solver"], "theta", 1.0, "config.solver");
    c.solver.cfl = get_or<double>(j["solver"], "cfl", 0.9, "config.solver");
    static const std::set<std::string> schemes{"direct", "fixed_point", "policy", "newton",
                                               "pseudo_time"};
    if (!schemes.count(c.solver.scheme))
      throw config_error("config.solver.scheme: unknown scheme '" + c.solver.scheme + "'");
  }

  if (j.contains("diagnostics")) {
    reject_unknown(j["diagnostics"], {"scales", "fit_radius", "beta", "s_grid"},
                   "config.diagnostics");
    c.diagnostics.scales = get_or<int>(j["diagnostics"], "scales", 5, "config.diagnostics");
    c.diagnostics.fit_radius =
        get_or<double>(j["diagnostics"], "fit_radius", 0.5, "config.diagnostics");
    c.diagnostics.beta = get_or<double>(j["diagnostics"], "beta", 0.5, "config.diagnostics");
    if (j["diagnostics"].contains("s_grid"))
      c.diagnostics.s_grid = j["diagnostics"]["s_grid"].get<std::vector<double>>();
    if (c.diagnostics.scales < 4)
      throw config_error("config.diagnostics.scales: need at least 4 dyadic scales");
  }

  if (j.contains("operator")) {
    const json& jo = j["operator"];
    reject_unknown(jo,
                   {"variant", "kernel", "family", "sign", "rho_profile", "p", "x0", "mu",
                    "gamma", "eps", "inner", "rhs", "exterior", "sigma", "sigma0", "lambda",
                    "Lambda"},
                   "config.operator");
    if (jo.contains("rhs")) c.rhs = closed_form_from_json(jo["rhs"]);
    if (jo.contains("exterior")) c.exterior = exterior_from_json(jo["exterior"], c.dimension);
    if (jo.contains("variant")) {
      try {
        c.op = operator_from_json(jo, c.dimension, c.sigma, c.sigma0, c.lambda, c.Lambda);
      } catch (const config_error&) {
        throw;
      } catch (const std::exception& e) {
        throw config_error(std::string("config.operator: ") + e.what());
      }
    }
  }

  static const std::set<std::string> scenarios{"thm-1-1", "thm-1-2", "schauder-6-2",
                                               "nonlinear-7-2", "exact-ball", "custom"};
  if (!scenarios.count(c.scenario))
    throw config_error("config.scenario: unknown scenario '" + c.scenario + "'");

  apply_scenario(c);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

void apply_scenario(ExperimentConfig& c) {
  const int n = c.dimension;
  const double s = c.sigma, s0 = c.sigma0, lam = c.lambda, Lam = c.Lambda;
  auto isaacs_family = [&]() {
    // translation-invariant 2x2 family with distinct y-profiles
    std::vector<std::vector<KernelSpec>> fam(2);
    fam[0].push_back(KernelSpec::constant(n, s, s0, lam, Lam, lam));
    fam[0].push_back(KernelSpec::step_bands(n, s, s0, lam, Lam, 1.0, 1));
    fam[1].push_back(KernelSpec::constant(n, s, s0, lam, Lam, Lam));
    fam[1].push_back(KernelSpec::step_bands(n, s, s0, lam, Lam, 1.5, 3));
    return fam;
  };

  if (c.scenario == "thm-1-1") {
    // translation-invariant Isaacs, f = 0, Lipschitz exterior
    if (!c.op) c.op = OperatorSpec::isaacs(isaacs_family());
    if (c.op->x_dependent())
      throw config_error("config.scenario: thm-1-1 requires a translation-invariant operator");
    c.rhs = make_zero();
    if (c.exterior.terms.empty()) c.exterior = ExteriorData::of(make_tent(1.0, 1.5));
    if (c.solver.scheme == "direct") c.solver.scheme = "policy";
  } else if (c.scenario == "thm-1-2") {
    // bounded f and g; Holder bump exterior keeps g merely bounded
    if (!(s > 1.0)) throw config_error("config.sigma: thm-1-2 requires sigma > 1");
    if (!c.op) c.op = OperatorSpec::isaacs(isaacs_family());
    if (c.rhs.kind == FormKind::Zero) c.rhs = make_constant(-1.0);
    if (c.exterior.terms.empty())
      c.exterior = ExteriorData::of(make_power_cusp(1.0, 0.5, 0.6, {1.2, 0}));
    if (c.solver.scheme == "direct") c.solver.scheme = "policy";
  } else if (c.scenario == "schauder-6-2") {
    // linear operator with Holder-in-x coefficients, Holder rhs
    if (!(s > 1.0)) throw config_error("config.sigma: schauder-6-2 requires sigma > 1");
    if (!c.op)
      c.op = OperatorSpec::linear(KernelSpec::ripple_x(n, s, s0, lam, Lam, {3.0, 0}, 1.0, 2.0));
    if (c.rhs.kind == FormKind::Zero) c.rhs = make_cos_ripple(1.0, 3.0);
    if (c.exterior.terms.empty()) c.exterior = ExteriorData::of(make_tent(0.5, 1.5));
  } else if (c.scenario == "nonlinear-7-2") {
    if (!(s > 1.0)) throw config_error("config.sigma: nonlinear-7-2 requires sigma > 1");
    if (!(lam < Lam)) throw config_error("config.lambda: nonlinear-7-2 requires lambda < Lambda");
    if (!c.op) c.op = OperatorSpec::rho(RhoSpec::softplus(lam, Lam), n, s, s0);
    if (c.rhs.kind == FormKind::Zero) c.rhs = make_constant(-1.0);
    if (c.exterior.terms.empty())
      c.exterior = ExteriorData::of(make_smooth_bump(0.5, 0.5, {1.3, 0}));
    if (c.solver.scheme == "direct") c.solver.scheme = "newton";
  } else if (c.scenario == "exact-ball") {
    c.op = OperatorSpec::linear(
        KernelSpec::constant(n, s, s0, std::min(lam, 1.0), std::max(Lam, 1.0), 1.0));
    c.rhs = make_constant(-1.0);
    c.exterior = ExteriorData::zero();
    c.solver.scheme = "direct";
  } else {
    // custom: operator block must be complete
    if (!c.op) throw config_error("config.operator.variant: required for scenario 'custom'");
  }
}

BVPProblem ExperimentConfig::problem() const {
  if (!op) throw config_error("config.operator: missing operator");
  BVPProblem p{*op, sample(grid, rhs, ExteriorData::zero()), exterior, grid};
  p.validate();
  return p;
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["dimension"] = dimension;
  j["sigma"] = sigma;
  j["sigma0"] = sigma0;
  j["lambda"] = lambda;
  j["Lambda"] = Lambda;
  j["grid"] = {{"h", grid.h}, {"r_out", grid.r_out}};
  j["solver"] = {{"scheme", solver.scheme}, {"tol", solver.tol},
                 {"max_iter", solver.max_iter}, {"eps", solver.eps},
                 {"theta", solver.theta},      {"cfl", solver.cfl}};
  j["diagnostics"] = {{"scales", diagnostics.scales},
                      {"fit_radius", diagnostics.fit_radius},
                      {"beta", diagnostics.beta}};
  json jo = op ? operator_to_json(*op) : json::object();
  jo["rhs"] = closed_form_to_json(rhs);
  jo["exterior"] = exterior_to_json(exterior);
  j["operator"] = jo;
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  return j;
}

}  // namespace nlab
