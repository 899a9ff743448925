#include "ftlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace ftlab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json matrix_to_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw FormatError(path + ": expected a non-empty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    CMatrix m;
    for (std::size_t r = 0; r < rows; ++r) {
        const Json& row = j[r];
        if (!row.is_array()) throw FormatError(path + ": row " + std::to_string(r) + " is not an array");
        if (r == 0) {
            cols = row.size();
            if (cols == 0) throw FormatError(path + ": empty row");
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw FormatError(path + ": ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const Json& z = row[c];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                throw FormatError(path + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") is not a [re, im] pair");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(z[0].get<double>(), z[1].get<double>());
        }
    }
    if (!is_finite(m)) throw FormatError(path + ": non-finite entry");
    return m;
}

namespace {

Json sites_to_json(const Layout& layout) {
    Json arr = Json::array();
    for (const auto& s : layout.sites()) arr.push_back(Json{{"label", s.label}, {"dim", s.dim}});
    return arr;
}

std::vector<Site> sites_from_json(const Json& j, const std::string& path, const std::string& prefix) {
    if (!j.is_array() || j.empty()) throw FormatError(path + ": expected a non-empty array of sites");
    std::vector<Site> sites;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& e = j[i];
        if (!e.contains("dim") || !e["dim"].is_number_integer())
            throw FormatError(path + "[" + std::to_string(i) + "]: missing integer 'dim'");
        Site s;
        s.dim = e["dim"].get<int>();
        s.label = e.contains("label") ? e["label"].get<std::string>() : prefix + std::to_string(i + 1);
        sites.push_back(std::move(s));
    }
    return sites;
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

}  // namespace

Json instance_to_json(const InstanceSpec& spec) {
    Json j;
    j["layout"]["system"] = sites_to_json(spec.rho_S.layout);
    Json env_sites = Json::array();
    Json rho_e = Json::array();
    for (const auto& e : spec.rho_E) {
        env_sites.push_back(Json{{"label", e.layout.sites()[0].label}, {"dim", e.layout.sites()[0].dim}});
        rho_e.push_back(matrix_to_json(e.matrix));
    }
    j["layout"]["environment"] = std::move(env_sites);
    j["rho_S"] = matrix_to_json(spec.rho_S.matrix);
    j["rho_E"] = std::move(rho_e);
    Json gates = Json::array();
    for (const auto& g : spec.gates) gates.push_back(matrix_to_json(g.matrix));
    j["U"] = std::move(gates);
    return j;
}

InstanceSpec instance_from_json(const Json& j) {
    if (!j.contains("layout") || !j["layout"].contains("system") || !j["layout"].contains("environment"))
        throw FormatError("layout: missing 'system' or 'environment' site lists");
    const auto sys_sites = sites_from_json(j["layout"]["system"], "layout.system", "S");
    const auto env_sites = sites_from_json(j["layout"]["environment"], "layout.environment", "E");
    if (sys_sites.size() != env_sites.size())
        throw FormatError("layout: system and environment site counts differ");

    if (!j.contains("rho_S")) throw FormatError("rho_S: missing");
    if (!j.contains("rho_E") || !j["rho_E"].is_array()) throw FormatError("rho_E: missing array");
    if (!j.contains("U") || !j["U"].is_array()) throw FormatError("U: missing array");
    if (j["rho_E"].size() != env_sites.size()) throw FormatError("rho_E: expected one state per site");
    if (j["U"].size() != sys_sites.size()) throw FormatError("U: expected one gate per site");

    InstanceSpec spec;
    {
        CMatrix m = matrix_from_json(j["rho_S"], "rho_S");
        try {
            spec.rho_S = DensityState(std::move(m), Layout(sys_sites));
        } catch (const ValidationError& err) {
            throw ValidationError("rho_S: " + std::string(err.what()));
        } catch (const ArgumentError& err) {
            throw FormatError("rho_S: " + std::string(err.what()));
        }
    }
    for (std::size_t i = 0; i < env_sites.size(); ++i) {
        const std::string path = "rho_E[" + std::to_string(i) + "]";
        CMatrix m = matrix_from_json(j["rho_E"][i], path);
        try {
            spec.rho_E.emplace_back(std::move(m), Layout({env_sites[i]}));
        } catch (const ValidationError& err) {
            throw ValidationError(path + ": " + std::string(err.what()));
        } catch (const ArgumentError& err) {
            throw FormatError(path + ": " + std::string(err.what()));
        }
    }
    for (std::size_t i = 0; i < sys_sites.size(); ++i) {
        const std::string path = "U[" + std::to_string(i) + "]";
        CMatrix m = matrix_from_json(j["U"][i], path);
        const auto need = static_cast<Eigen::Index>(sys_sites[i].dim) * env_sites[i].dim;
        if (m.rows() != need || m.cols() != need)
            throw FormatError(path + ": expected dimension " + std::to_string(need));
        if (!is_unitary(m)) throw ValidationError(path + ": matrix is not unitary within tolerance");
        spec.gates.emplace_back(std::move(m), sys_sites[i].label, env_sites[i].label);
    }
    return spec;
}

InstanceSpec load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open instance file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& err) {
        throw FormatError("instance file '" + path + "': " + err.what());
    }
    return instance_from_json(j);
}

void save_instance(const InstanceSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write instance file '" + path + "'");
    out << instance_to_json(spec).dump(2) << "\n";
}

Json info_to_json(const InfoSummary& info) {
    return Json{{"I_initial", info.mi_initial},   {"I_final", info.mi_final},
                {"I_cl_initial", info.cl_initial}, {"I_cl_final", info.cl_final},
                {"C_initial", info.coh_initial},   {"C_final", info.coh_final},
                {"delta_I", info.mi_change},       {"delta_I_cl", info.cl_change},
                {"delta_C", info.coh_change}};
}

Json report_to_json(const FTReport& rep) {
    Json j;
    j["instance_id"] = rep.instance_id;
    j["info"] = info_to_json(rep.info);
    j["tolerances"] = Json{{"integral", rep.tol.integral},
                           {"expectation", rep.tol.expectation},
                           {"imaginary", rep.tol.imaginary},
                           {"detailed", rep.tol.detailed},
                           {"nonneg", rep.tol.nonneg},
                           {"moment_noise", rep.tol.moment_noise}};
    j["targets"] = Json{{"delta_I_cl", rep.info.cl_change},
                        {"delta_I", rep.info.mi_change},
                        {"delta_C", rep.info.coh_change}};
    j["integral"] = Json{{"classical", complex_to_json(rep.ift_cl)},
                         {"quantum", rep.quasi_computed ? complex_to_json(rep.ift_q) : Json()},
                         {"coherence", rep.quasi_computed && rep.coherence_applicable
                                           ? complex_to_json(rep.ift_c)
                                           : Json()}};
    j["expectation"] = Json{{"classical", complex_to_json(rep.exp_cl)},
                            {"quantum", rep.quasi_computed ? complex_to_json(rep.exp_q) : Json()},
                            {"coherence", rep.quasi_computed && rep.coherence_applicable
                                              ? complex_to_json(rep.exp_c)
                                              : Json()}};
    j["second_moment"] = Json{{"classical", complex_to_json(rep.m2_cl)},
                              {"quantum", rep.quasi_computed ? complex_to_json(rep.m2_q) : Json()},
                              {"coherence", rep.quasi_computed && rep.coherence_applicable
                                                ? complex_to_json(rep.m2_c)
                                                : Json()},
                              {"bounds", Json{{"classical", rep.mom_bound_cl},
                                              {"quantum", rep.mom_bound_q},
                                              {"coherence", rep.mom_bound_c}}}};
    auto residual_or_null = [](double v) { return std::isnan(v) ? Json() : Json(v); };
    j["detailed_residual"] = Json{{"classical", residual_or_null(rep.detailed_cl)},
                                  {"quantum", residual_or_null(rep.detailed_q)},
                                  {"coherence", residual_or_null(rep.detailed_c)}};
    j["dephasing_gap"] = rep.dephasing_gap;
    j["coherence_applicable"] = rep.coherence_applicable;
    j["quasi_computed"] = rep.quasi_computed;
    j["detailed_computed"] = rep.detailed_computed;
    j["support_diagnostics"] = rep.support_diagnostics;
    j["pass"] = Json{{"ift_cl", rep.pass_ift_cl},         {"ift_q", rep.pass_ift_q},
                     {"ift_c", rep.pass_ift_c},           {"exp_cl", rep.pass_exp_cl},
                     {"exp_q", rep.pass_exp_q},           {"exp_c", rep.pass_exp_c},
                     {"m2_cl", rep.pass_m2_cl},           {"m2_q", rep.pass_m2_q},
                     {"m2_c", rep.pass_m2_c},             {"detailed_cl", rep.pass_detailed_cl},
                     {"detailed_q", rep.pass_detailed_q}, {"detailed_c", rep.pass_detailed_c},
                     {"nonneg", rep.pass_nonneg},         {"all", rep.all_pass()}};
    return j;
}

void save_report(const FTReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write report file '" + path + "'");
    out << report_to_json(rep).dump(2) << "\n";
}

namespace {

template <class Dist, class GetRe, class GetIm>
void dump_lines(std::ostream& os, const Dist& dist, GetRe re, GetIm im) {
    const auto& dims = dist.space.dims;
    std::vector<std::size_t> comps(dims.size());
    for (std::size_t f = 0; f < dist.values.size(); ++f) {
        dist.space.decode(f, comps);
        os << "{\"index\":[";
        for (std::size_t i = 0; i < comps.size(); ++i) os << (i ? "," : "") << comps[i];
        os << "],\"re\":" << format_double(re(dist.values[f]))
           << ",\"im\":" << format_double(im(dist.values[f])) << "}\n";
    }
}

}  // namespace

void dump_distribution(std::ostream& os, const TrajectoryDistribution& dist) {
    dump_lines(os, dist, [](double v) { return v; }, [](double) { return 0.0; });
}

void dump_distribution(std::ostream& os, const QuasiDistribution& dist) {
    dump_lines(os, dist, [](Complex v) { return v.real(); }, [](Complex v) { return v.imag(); });
}

}  // namespace ftlab
