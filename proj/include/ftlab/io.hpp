// io.hpp — JSON serialization: instances, reports, distribution dumps
//
// Complex numbers serialize as two-element arrays [re, im]; matrices as
// row-major nested arrays of complex entries.

#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>

#include "ftlab/theorems.hpp"

namespace ftlab {

using Json = nlohmann::json;

// Inputs of one scenario, as stored in an instance file.
struct InstanceSpec {
    DensityState rho_S;
    std::vector<DensityState> rho_E;
    std::vector<UnitaryGate> gates;
};

Json matrix_to_json(const CMatrix& m);
// `path` names the field in error messages, e.g. "U[0]".
CMatrix matrix_from_json(const Json& j, const std::string& path);

Json instance_to_json(const InstanceSpec& spec);
InstanceSpec instance_from_json(const Json& j);
InstanceSpec load_instance(const std::string& path);
void save_instance(const InstanceSpec& spec, const std::string& path);

Json info_to_json(const InfoSummary& info);
Json report_to_json(const FTReport& rep);
void save_report(const FTReport& rep, const std::string& path);

// JSONL dumps: one record {"index": [...], "re": x, "im": y} per line.
void dump_distribution(std::ostream& os, const TrajectoryDistribution& dist);
void dump_distribution(std::ostream& os, const QuasiDistribution& dist);

// Locale-independent shortest-roundtrip formatting used by all writers.
std::string format_double(double v);

}  // namespace ftlab
