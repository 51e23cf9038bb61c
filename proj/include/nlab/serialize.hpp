#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "nlab/diagnostics.hpp"
#include "nlab/solvers.hpp"

namespace nlab {

using nlohmann::json;

// field container: header {n, h, r_out, exterior} + raw little-endian doubles
// in row-major lattice order; round-trips bit-exactly
void write_field(const Field& u, const std::string& path);
Field read_field(const std::string& path);

json exterior_to_json(const ExteriorData& e);
ExteriorData exterior_from_json(const json& j, int dim);
json closed_form_to_json(const ClosedForm& f);
ClosedForm closed_form_from_json(const json& j);
json operator_to_json(const OperatorSpec& op);
OperatorSpec operator_from_json(const json& j, int dim, double sigma, double sigma0,
                                double lambda, double Lambda);

json solve_report_to_json(const SolveReport& r, const std::string& field_ref);
json regularity_report_to_json(const RegularityReport& r);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// CSV with %.17g formatting (deterministic)
std::string csv_line(const std::vector<std::string>& cells);
std::string format_double(double v);

// FNV-1a 64-bit over a string; used for config hashes in manifests
uint64_t fnv1a64(const std::string& s);

}  // namespace nlab
