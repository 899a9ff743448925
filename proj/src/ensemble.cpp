#include "ftlab/ensemble.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftlab {

namespace {

std::size_t checked_pow(std::size_t base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && out > static_cast<std::size_t>(-1) / base)
            throw BudgetError("enumeration size overflows 64 bits", static_cast<std::size_t>(-1));
        out *= base;
    }
    return out;
}

std::size_t checked_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > static_cast<std::size_t>(-1) / a)
        throw BudgetError("enumeration size overflows 64 bits", static_cast<std::size_t>(-1));
    return a * b;
}

}  // namespace

std::size_t EnsembleConfig::dim_S() const {
    return checked_pow(static_cast<std::size_t>(local_dim), sites);
}

std::size_t EnsembleConfig::dim_E() const {
    return checked_pow(static_cast<std::size_t>(env_dim), sites);
}

std::size_t EnsembleConfig::classical_terms() const {
    const std::size_t de = checked_mul(dim_S(), dim_E());
    return checked_mul(de, de);
}

std::size_t EnsembleConfig::quasi_terms() const {
    // |zeta| = D_S^4 * D_E^2
    const std::size_t ds2 = checked_mul(dim_S(), dim_S());
    return checked_mul(checked_mul(ds2, ds2), checked_mul(dim_E(), dim_E()));
}

void EnsembleConfig::check_budget() const {
    const std::size_t cl = classical_terms();
    if (cl > term_budget)
        throw BudgetError("classical enumeration needs " + std::to_string(cl) +
                              " terms per sample, budget is " + std::to_string(term_budget),
                          cl);
    if (compute_quasi) {
        const std::size_t q = quasi_terms();
        if (q > term_budget)
            throw BudgetError("quasiprobability enumeration needs " + std::to_string(q) +
                                  " terms per sample, budget is " + std::to_string(term_budget),
                              q);
    }
}

std::string EnsembleConfig::scenario_name() const {
    return scenario == Kind::random ? "random" : "swap";
}

std::string EnsembleConfig::canonical_string() const {
    std::ostringstream os;
    os << "sites=" << sites << ",local_dim=" << local_dim << ",env_dim=" << env_dim
       << ",samples=" << samples << ",scenario=" << scenario_name() << ",seed=" << seed
       << ",quasi=" << (compute_quasi ? 1 : 0) << ",detailed=" << (compute_detailed ? 1 : 0)
       << ",budget=" << term_budget;
    return os.str();
}

std::uint64_t EnsembleConfig::config_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char c : canonical_string()) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

void validate_config(const EnsembleConfig& cfg) {
    if (cfg.sites < 1) throw ArgumentError("ensemble config: sites must be >= 1");
    if (cfg.local_dim < 2 || cfg.env_dim < 2)
        throw ArgumentError("ensemble config: local and environment dims must be >= 2");
    if (cfg.scenario == EnsembleConfig::Kind::swap_gates && cfg.local_dim != cfg.env_dim)
        throw ArgumentError("ensemble config: swap scenario needs local_dim == env_dim");
}

}  // namespace

Scenario make_instance(const EnsembleConfig& cfg, std::size_t sample_id) {
    validate_config(cfg);

    SplitMix64 rng(RngSpec{cfg.seed, static_cast<std::uint64_t>(sample_id)});

    std::vector<Site> sys_sites;
    for (int j = 0; j < cfg.sites; ++j) sys_sites.push_back({"S" + std::to_string(j + 1), cfg.local_dim});
    const Layout layout_S(sys_sites);

    DensityState rho_S =
        with_layout(random_density(static_cast<int>(cfg.dim_S()), static_cast<int>(cfg.dim_S()), rng), layout_S);

    std::vector<DensityState> rho_E;
    for (int j = 0; j < cfg.sites; ++j)
        rho_E.push_back(with_layout(random_density(cfg.env_dim, cfg.env_dim, rng),
                                    single_site_layout(cfg.env_dim, "E" + std::to_string(j + 1))));

    std::vector<UnitaryGate> gates;
    for (int j = 0; j < cfg.sites; ++j) {
        const std::string sys = "S" + std::to_string(j + 1);
        const std::string env = "E" + std::to_string(j + 1);
        if (cfg.scenario == EnsembleConfig::Kind::swap_gates)
            gates.push_back(swap_gate(cfg.local_dim, sys, env));
        else
            gates.emplace_back(random_unitary(cfg.local_dim * cfg.env_dim, rng), sys, env);
    }
    return run_scenario(std::move(rho_S), std::move(rho_E), std::move(gates));
}

namespace {

void dump_sample_distributions(const EnsembleConfig& cfg, const Scenario& sc, std::size_t sample_id) {
    const std::string dir = cfg.dump_dir.empty() ? cfg.out_path + ".dist" : cfg.dump_dir;
    std::filesystem::create_directories(dir);
    const std::string stem = dir + "/sample_" + std::to_string(sample_id);
    {
        std::ofstream os(stem + "_forward_classical.jsonl");
        dump_distribution(os, forward_classical(sc, false));
    }
    if (cfg.compute_quasi) {
        std::ofstream os(stem + "_forward_quasi.jsonl");
        dump_distribution(os, forward_quasi(sc, false));
    }
}

}  // namespace

std::vector<EnsembleRecord> run_ensemble(const EnsembleConfig& cfg) {
    if (cfg.samples < 1) throw ArgumentError("run_ensemble: need at least one sample");
    validate_config(cfg);
    cfg.check_budget();

    std::vector<EnsembleRecord> records(cfg.samples);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long i = 0; i < static_cast<long long>(cfg.samples); ++i) {
        const auto id = static_cast<std::size_t>(i);
        EnsembleRecord& rec = records[id];
        rec.sample_id = id;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Scenario sc = make_instance(cfg, id);
            AnalyzeOptions opt;
            opt.compute_quasi = cfg.compute_quasi;
            opt.compute_detailed = cfg.compute_detailed;
            opt.parallel = false;  // samples provide the outer parallelism
            opt.tol = cfg.tol;
            opt.instance_id = "sample_" + std::to_string(id);
            rec.report = analyze_scenario(sc, opt);
            if (cfg.dump_distributions) dump_sample_distributions(cfg, sc, id);
        } catch (const SupportViolation& err) {
            rec.failed = true;
            rec.failure = std::string("support violation: ") + err.what();
        } catch (const std::exception& err) {
            rec.failed = true;
            rec.failure = err.what();
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return records;
}

// ------------------------------- results CSV ---------------------------------

namespace {

const char* const kColumns =
    "sample_id,failed,delta_I_cl,delta_I,delta_C,"
    "ift_cl_re,ift_cl_im,ift_q_re,ift_q_im,ift_c_re,ift_c_im,"
    "m1_cl,m2_cl,m1_q_re,m1_q_im,m2_q_re,m2_q_im,m1_c_re,m1_c_im,m2_c_re,m2_c_im,"
    "mom_bound_cl,mom_bound_q,mom_bound_c,"
    "detailed_cl,detailed_q,detailed_c,dephasing_gap,coherence_applicable,"
    "pass_ift_cl,pass_ift_q,pass_ift_c,pass_exp_cl,pass_exp_q,pass_exp_c,"
    "pass_m2_cl,pass_m2_q,pass_m2_c,pass_detailed_cl,pass_detailed_q,pass_detailed_c,"
    "pass_nonneg,pass_all,note";

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string flag(bool applicable, bool value) {
    if (!applicable) return "na";
    return value ? "1" : "0";
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else if (c == '\n' || c == '\r') out += ' ';
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

void write_results_csv(std::ostream& os, const EnsembleConfig& cfg,
                       const std::vector<EnsembleRecord>& records) {
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash()));
    os << "# ftlab results v1\n";
    os << "# version=" << kVersion << "\n";
    os << "# rng=" << kRngName << "\n";
    os << "# config=" << cfg.canonical_string() << "\n";
    os << "# config_hash=" << hash_buf << "\n";
    os << "# tol_integral=" << format_double(cfg.tol.integral)
       << " tol_expectation=" << format_double(cfg.tol.expectation)
       << " tol_imaginary=" << format_double(cfg.tol.imaginary)
       << " tol_detailed=" << format_double(cfg.tol.detailed)
       << " tol_nonneg=" << format_double(cfg.tol.nonneg)
       << " tol_moment_noise=" << format_double(cfg.tol.moment_noise) << "\n";
    os << "# terms_classical=" << cfg.classical_terms();
    if (cfg.compute_quasi) os << " terms_quasi=" << cfg.quasi_terms();
    os << "\n";
    os << kColumns << "\n";

    std::vector<const EnsembleRecord*> ordered;
    for (const auto& r : records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const EnsembleRecord* a, const EnsembleRecord* b) { return a->sample_id < b->sample_id; });

    for (const auto* rp : ordered) {
        const auto& r = *rp;
        const auto& rep = r.report;
        const bool q = !r.failed && rep.quasi_computed;
        const bool c = q && rep.coherence_applicable;
        const bool d = !r.failed && rep.detailed_computed;
        auto num = [&](double v, bool applicable) { return format_double(applicable ? v : kNaN); };
        const bool ok = !r.failed;

        os << r.sample_id << ',' << (r.failed ? 1 : 0) << ','
           << num(rep.info.cl_change, ok) << ',' << num(rep.info.mi_change, ok) << ','
           << num(rep.info.coh_change, ok) << ','
           << num(rep.ift_cl.real(), ok) << ',' << num(rep.ift_cl.imag(), ok) << ','
           << num(rep.ift_q.real(), q) << ',' << num(rep.ift_q.imag(), q) << ','
           << num(rep.ift_c.real(), c) << ',' << num(rep.ift_c.imag(), c) << ','
           << num(rep.exp_cl.real(), ok) << ',' << num(rep.m2_cl.real(), ok) << ','
           << num(rep.exp_q.real(), q) << ',' << num(rep.exp_q.imag(), q) << ','
           << num(rep.m2_q.real(), q) << ',' << num(rep.m2_q.imag(), q) << ','
           << num(rep.exp_c.real(), c) << ',' << num(rep.exp_c.imag(), c) << ','
           << num(rep.m2_c.real(), c) << ',' << num(rep.m2_c.imag(), c) << ','
           << num(rep.mom_bound_cl, ok) << ',' << num(rep.mom_bound_q, q) << ','
           << num(rep.mom_bound_c, c) << ','
           << num(rep.detailed_cl, d) << ',' << num(rep.detailed_q, d && q) << ','
           << num(rep.detailed_c, d && c) << ',' << num(rep.dephasing_gap, ok) << ','
           << flag(ok, rep.coherence_applicable) << ','
           << flag(ok, rep.pass_ift_cl) << ',' << flag(q, rep.pass_ift_q) << ','
           << flag(c, rep.pass_ift_c) << ',' << flag(ok, rep.pass_exp_cl) << ','
           << flag(q, rep.pass_exp_q) << ',' << flag(c, rep.pass_exp_c) << ','
           << flag(ok, rep.pass_m2_cl) << ',' << flag(q, rep.pass_m2_q) << ','
           << flag(c, rep.pass_m2_c) << ',' << flag(d, rep.pass_detailed_cl) << ','
           << flag(d && q, rep.pass_detailed_q) << ',' << flag(d && c, rep.pass_detailed_c) << ','
           << flag(ok, rep.pass_nonneg) << ',' << (r.passed() ? "1" : "0") << ','
           << csv_quote(r.failure) << "\n";
    }
}

std::string results_csv_string(const EnsembleConfig& cfg, const std::vector<EnsembleRecord>& records) {
    std::ostringstream os;
    write_results_csv(os, cfg, records);
    return os.str();
}

// ------------------------------ verify instance ------------------------------

FTReport verify_instance(const std::string& instance_path, const std::string& report_path,
                         const Tolerances& tol) {
    InstanceSpec spec = load_instance(instance_path);
    const Scenario sc = run_scenario(std::move(spec.rho_S), std::move(spec.rho_E), std::move(spec.gates));

    AnalyzeOptions opt;
    opt.tol = tol;
    opt.parallel = true;
    opt.instance_id = std::filesystem::path(instance_path).filename().string();
    // stay inside the default budget for the quasiprobability sweep
    const std::size_t ds = sc.dim_S(), de = sc.dim_E();
    const std::size_t quasi = ds * ds * ds * ds * de * de;
    opt.compute_quasi = quasi <= 100000000 && ds * de <= 4096;
    opt.compute_detailed = true;

    FTReport rep = analyze_scenario(sc, opt);
    if (!report_path.empty()) save_report(rep, report_path);
    return rep;
}

// -------------------------------- emit figures -------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (const char ch : line) {
        if (quoted) {
            if (ch == '"') quoted = false;
            else cur += ch;
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw FormatError("results file: missing column '" + name + "'");
}

}  // namespace

EmitSummary emit_fig(const std::string& results_path, const std::string& which,
                     const std::string& out_path) {
    if (which != "ift" && which != "moments")
        throw ArgumentError("emit_fig: 'which' must be ift or moments");

    std::ifstream in(results_path);
    if (!in) throw FormatError("cannot open results file '" + results_path + "'");

    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header.empty())
            header = split_csv_line(line);
        else
            rows.push_back(split_csv_line(line));
    }
    if (header.empty()) throw FormatError("results file '" + results_path + "' has no header row");
    if (rows.empty()) throw FormatError("results file '" + results_path + "' has no data rows");

    std::ofstream out(out_path);
    if (!out) throw FormatError("cannot write figure file '" + out_path + "'");

    EmitSummary summary;
    summary.rows_in = rows.size();

    const std::size_t id_col = column_index(header, "sample_id");
    const std::size_t failed_col = column_index(header, "failed");
    const char* quantities[] = {"cl", "q", "c"};

    auto usable = [&](const std::vector<std::string>& row, std::size_t col) {
        return col < row.size() && row[col] != "nan" && !row[col].empty();
    };

    if (which == "ift") {
        out << "# ftlab figure data: integral fluctuation values, reference point (1, 0)\n";
        out << "sample_id,quantity,re,im\n";
        for (const auto& row : rows) {
            if (row[failed_col] == "1") continue;
            for (const char* qn : quantities) {
                const std::size_t re_col = column_index(header, std::string("ift_") + qn + "_re");
                const std::size_t im_col = column_index(header, std::string("ift_") + qn + "_im");
                if (!usable(row, re_col)) continue;
                out << row[id_col] << ',' << qn << ',' << row[re_col] << ',' << row[im_col] << "\n";
                ++summary.rows_out;
            }
        }
    } else {
        out << "# ftlab figure data: first and second moments\n";
        out << "# reference_line: m2 = 2*m1\n";
        out << "m1,m2,quantity\n";
        for (const auto& row : rows) {
            if (row[failed_col] == "1") continue;
            const struct {
                const char* name;
                const char* m1;
                const char* m2;
            } cols[] = {{"cl", "m1_cl", "m2_cl"}, {"q", "m1_q_re", "m2_q_re"}, {"c", "m1_c_re", "m2_c_re"}};
            for (const auto& qc : cols) {
                const std::size_t m1_col = column_index(header, qc.m1);
                const std::size_t m2_col = column_index(header, qc.m2);
                if (!usable(row, m1_col)) continue;
                out << row[m1_col] << ',' << row[m2_col] << ',' << qc.name << "\n";
                ++summary.rows_out;
            }
        }
    }
    return summary;
}

}  // namespace ftlab
