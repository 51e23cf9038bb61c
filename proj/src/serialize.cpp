#include "nlab/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace nlab {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot open for writing: " + path);
  out.write(content.data(), (std::streamsize)content.size());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  out += "\n";
  return out;
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json closed_form_to_json(const ClosedForm& f) {
  json j;
  j["name"] = form_kind_name(f.kind);
  j["p0"] = f.p0;
  j["p1"] = f.p1;
  j["p2"] = f.p2;
  j["center"] = {f.center[0], f.center[1]};
  return j;
}

ClosedForm closed_form_from_json(const json& j) {
  ClosedForm f;
  auto kind = form_kind_from_name(j.at("name").get<std::string>());
  if (!kind) throw usage_error("unknown closed form: " + j.at("name").get<std::string>());
  f.kind = *kind;
  f.p0 = j.value("p0", 0.0);
  f.p1 = j.value("p1", 0.0);
  f.p2 = j.value("p2", 0.0);
  if (j.contains("center")) {
    f.center[0] = j["center"].at(0).get<double>();
    f.center[1] = j["center"].size() > 1 ? j["center"].at(1).get<double>() : 0.0;
  }
  return f;
}

json exterior_to_json(const ExteriorData& e) {
  json terms = json::array();
  for (const auto& t : e.terms) {
    json jt;
    jt["coef"] = t.coef;
    jt["shift"] = {t.shift[0], t.shift[1]};
    jt["dilation"] = t.dilation;
    jt["form"] = closed_form_to_json(t.form);
    terms.push_back(jt);
  }
  json j;
  j["terms"] = terms;
  return j;
}

ExteriorData exterior_from_json(const json& j, int) {
  ExteriorData e;
  for (const auto& jt : j.at("terms")) {
    ExteriorTerm t;
    t.coef = jt.at("coef").get<double>();
    t.shift[0] = jt.at("shift").at(0).get<double>();
    t.shift[1] = jt.at("shift").size() > 1 ? jt.at("shift").at(1).get<double>() : 0.0;
    t.dilation = jt.at("dilation").get<double>();
    t.form = closed_form_from_json(jt.at("form"));
    e.terms.push_back(t);
  }
  return e;
}

static json kernel_to_json(const KernelSpec& k) {
  json j;
  j["sigma"] = k.sigma;
  j["sigma0"] = k.sigma0;
  j["lambda"] = k.lambda;
  j["Lambda"] = k.Lambda;
  switch (k.profile) {
    case ProfileKind::Constant:
      j["profile"] = "constant";
      j["c"] = k.c;
      break;
    case ProfileKind::StepBands:
      j["profile"] = "step_bands";
      j["r0"] = k.band_r0;
      j["nbands"] = k.nbands;
      break;
    case ProfileKind::RippleX:
      j["profile"] = "ripple_x";
      j["k"] = {k.ripple_k[0], k.ripple_k[1]};
      j["eta"] = k.ripple_eta;
      j["psi_radius"] = k.psi_radius;
      break;
  }
  return j;
}

static KernelSpec kernel_from_json(const json& j, int dim, double sigma, double sigma0,
                                   double lambda, double Lambda) {
  sigma = j.value("sigma", sigma);
  sigma0 = j.value("sigma0", sigma0);
  lambda = j.value("lambda", lambda);
  Lambda = j.value("Lambda", Lambda);
  std::string prof = j.at("profile").get<std::string>();
  if (prof == "constant")
    return KernelSpec::constant(dim, sigma, sigma0, lambda, Lambda, j.value("c", lambda));
  if (prof == "step_bands")
    return KernelSpec::step_bands(dim, sigma, sigma0, lambda, Lambda, j.value("r0", 1.0),
                                  j.value("nbands", 1));
  if (prof == "ripple_x") {
    Vec2 k{1.0, 0.0};
    if (j.contains("k")) {
      k[0] = j["k"].at(0).get<double>();
      k[1] = j["k"].size() > 1 ? j["k"].at(1).get<double>() : 0.0;
    }
    return KernelSpec::ripple_x(dim, sigma, sigma0, lambda, Lambda, k, j.value("eta", 1.0),
                                j.value("psi_radius", 2.0));
  }
  throw usage_error("unknown kernel profile: " + prof);
}

json operator_to_json(const OperatorSpec& op) {
  json j;
  j["sigma"] = op.sigma;
  j["sigma0"] = op.sigma0;
  j["lambda"] = op.lambda;
  j["Lambda"] = op.Lambda;
  if (const auto* l = std::get_if<LinearOp>(&op.v)) {
    j["variant"] = "linear";
    j["kernel"] = kernel_to_json(l->kernel);
  } else if (const auto* e = std::get_if<ExtremalOp>(&op.v)) {
    j["variant"] = "extremal";
    j["sign"] = e->plus ? "plus" : "minus";
  } else if (const auto* i = std::get_if<IsaacsOp>(&op.v)) {
    j["variant"] = "isaacs";
    json fam = json::array();
    for (const auto& row : i->family) {
      json jr = json::array();
      for (const auto& k : row) jr.push_back(kernel_to_json(k));
      fam.push_back(jr);
    }
    j["family"] = fam;
  } else if (const auto* r = std::get_if<RhoOp>(&op.v)) {
    j["variant"] = "rho";
    j["rho_profile"] = r->rho.profile == RhoSpec::Profile::Softplus ? "softplus" : "power_scaled";
    j["p"] = r->rho.p;
  } else if (const auto* f = std::get_if<FrozenOp>(&op.v)) {
    j["variant"] = "frozen";
    j["x0"] = {f->x0[0], f->x0[1]};
    j["inner"] = operator_to_json(*f->inner);
  } else if (const auto* r = std::get_if<RescaledOp>(&op.v)) {
    j["variant"] = "rescaled";
    j["mu"] = r->mu;
    j["gamma"] = r->gamma;
    j["inner"] = operator_to_json(*r->inner);
  } else if (const auto* r = std::get_if<RegularizedOp>(&op.v)) {
    j["variant"] = "regularized";
    j["eps"] = r->eps;
    j["inner"] = operator_to_json(*r->inner);
  }
  return j;
}

OperatorSpec operator_from_json(const json& j, int dim, double sigma, double sigma0,
                                double lambda, double Lambda) {
  sigma = j.value("sigma", sigma);
  sigma0 = j.value("sigma0", sigma0);
  lambda = j.value("lambda", lambda);
  Lambda = j.value("Lambda", Lambda);
  std::string variant = j.at("variant").get<std::string>();
  if (variant == "linear")
    return OperatorSpec::linear(
        kernel_from_json(j.at("kernel"), dim, sigma, sigma0, lambda, Lambda));
  if (variant == "extremal")
    return OperatorSpec::extremal(j.value("sign", std::string("plus")) == "plus", dim, sigma,
                                  sigma0, lambda, Lambda);
  if (variant == "isaacs") {
    std::vector<std::vector<KernelSpec>> fam;
    for (const auto& jr : j.at("family")) {
      std::vector<KernelSpec> row;
      for (const auto& jk : jr)
        row.push_back(kernel_from_json(jk, dim, sigma, sigma0, lambda, Lambda));
      fam.push_back(std::move(row));
    }
    return OperatorSpec::isaacs(std::move(fam));
  }
  if (variant == "rho") {
    std::string prof = j.value("rho_profile", std::string("softplus"));
    RhoSpec r = prof == "power_scaled"
                    ? RhoSpec::power_scaled(lambda, Lambda, j.value("p", 1.0))
                    : RhoSpec::softplus(lambda, Lambda);
    return OperatorSpec::rho(r, dim, sigma, sigma0);
  }
  if (variant == "frozen") {
    Vec2 x0{j.at("x0").at(0).get<double>(),
            j.at("x0").size() > 1 ? j.at("x0").at(1).get<double>() : 0.0};
    return freeze(operator_from_json(j.at("inner"), dim, sigma, sigma0, lambda, Lambda), x0);
  }
  if (variant == "rescaled")
    return rescale(operator_from_json(j.at("inner"), dim, sigma, sigma0, lambda, Lambda),
                   j.value("mu", 1.0), j.value("gamma", 1.0));
  if (variant == "regularized")
    return regularize(operator_from_json(j.at("inner"), dim, sigma, sigma0, lambda, Lambda),
                      j.value("eps", 0.1));
  throw usage_error("unknown operator variant: " + variant);
}

// ------------------------------------------------------------- field io

static constexpr char kFieldMagic[8] = {'N', 'L', 'F', 'D', '0', '0', '0', '1'};

void write_field(const Field& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("cannot open for writing: " + path);
  out.write(kFieldMagic, 8);
  int32_t dim = u.grid.dim;
  double h = u.grid.h, r = u.grid.r_out;
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  out.write(reinterpret_cast<const char*>(&r), sizeof(r));
  std::string ext = exterior_to_json(u.exterior).dump();
  uint64_t elen = ext.size();
  out.write(reinterpret_cast<const char*>(&elen), sizeof(elen));
  out.write(ext.data(), (std::streamsize)elen);
  uint64_t n = u.values.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(u.values.data()),
            (std::streamsize)(n * sizeof(double)));
  if (!out) throw evaluation_error("field write failed: " + path);
}

Field read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot open for reading: " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kFieldMagic, 8) != 0)
    throw usage_error("not a field file: " + path);
  int32_t dim;
  double h, r;
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  in.read(reinterpret_cast<char*>(&r), sizeof(r));
  uint64_t elen;
  in.read(reinterpret_cast<char*>(&elen), sizeof(elen));
  std::string ext(elen, '\0');
  in.read(ext.data(), (std::streamsize)elen);
  uint64_t n;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<double> vals(n);
  in.read(reinterpret_cast<char*>(vals.data()), (std::streamsize)(n * sizeof(double)));
  if (!in) throw usage_error("truncated field file: " + path);
  Grid g(dim, h, r);
  return Field(g, std::move(vals), exterior_from_json(json::parse(ext), dim));
}

// ------------------------------------------------------------- reports

json solve_report_to_json(const SolveReport& r, const std::string& field_ref) {
  json j;
  j["scheme"] = r.scheme;
  j["iterations"] = r.iterations;
  j["residuals"] = r.residual_history;
  j["wall_ms"] = r.wall_ms;
  j["converged"] = r.converged;
  j["field_ref"] = field_ref;
  if (!r.extras.empty()) j["extras"] = r.extras;
  return j;
}

static json holder_fit_to_json(const HolderFit& f) {
  json j;
  j["exponent"] = f.exponent;
  j["constant"] = f.constant;
  j["r2"] = f.r2;
  j["exponent_ci"] = f.exponent_ci;
  j["lattice_floor"] = f.lattice_floor;
  return j;
}

static json profile_to_json(const BoundaryProfileFit& f) {
  json j;
  j["ok"] = f.ok;
  j["s"] = f.s;
  j["C"] = f.C;
  j["s_regression"] = f.s_regression;
  j["r2"] = f.r2;
  j["pairs"] = f.pairs;
  return j;
}

json regularity_report_to_json(const RegularityReport& r) {
  json j;
  j["alpha0"] = holder_fit_to_json(r.alpha0);
  j["alpha1"] = holder_fit_to_json(r.alpha1);
  j["boundary"] = profile_to_json(r.boundary);
  j["boundary_grad"] = profile_to_json(r.boundary_grad);
  j["a_beta"] = r.a_beta;
  j["beta_used"] = r.beta_used;
  j["weighted_l1"] = r.weighted_l1;
  j["oscillation"] = r.osc;
  j["lattice_floor"] = r.lattice_floor;
  return j;
}

}  // namespace nlab
