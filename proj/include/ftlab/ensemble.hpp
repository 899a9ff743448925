// ensemble.hpp — seeded ensemble runs, results CSV, single-instance
// verification, and figure-data emission

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ftlab/io.hpp"

namespace ftlab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kRngName = "splitmix64-boxmuller";

struct EnsembleConfig {
    int sites = 3;
    int local_dim = 2;
    int env_dim = 2;
    std::size_t samples = 1000;
    enum class Kind { random, swap_gates };
    Kind scenario = Kind::random;
    std::uint64_t seed = 0;
    bool compute_quasi = true;
    bool compute_detailed = true;
    bool dump_distributions = false;
    std::string out_path;
    std::string dump_dir;  // defaults to out_path + ".dist"
    std::size_t term_budget = 100000000;
    Tolerances tol;

    std::size_t dim_S() const;
    std::size_t dim_E() const;
    // exact enumeration sizes per sample (never underestimates)
    std::size_t classical_terms() const;
    std::size_t quasi_terms() const;
    void check_budget() const;  // BudgetError when a sweep exceeds the budget

    std::string scenario_name() const;
    std::string canonical_string() const;
    std::uint64_t config_hash() const;  // FNV-1a of the canonical string
};

struct EnsembleRecord {
    std::size_t sample_id = 0;
    bool failed = false;
    std::string failure;
    FTReport report;
    double seconds = 0.0;  // wall time; kept out of the results CSV so
                           // identical configs produce identical files
    bool passed() const { return !failed && report.all_pass(); }
};

// Draw the seeded instance for one sample id: rho_S, then the environment
// states, then the gates, all from SplitMix64{seed, sample_id}.
Scenario make_instance(const EnsembleConfig& cfg, std::size_t sample_id);

// Runs every sample (workers in parallel, output ordered by sample_id).
// Support violations mark the record failed; the run continues.
std::vector<EnsembleRecord> run_ensemble(const EnsembleConfig& cfg);

void write_results_csv(std::ostream& os, const EnsembleConfig& cfg,
                       const std::vector<EnsembleRecord>& records);
std::string results_csv_string(const EnsembleConfig& cfg, const std::vector<EnsembleRecord>& records);

// Full pipeline for one instance file; writes the report when report_path
// is non-empty.
FTReport verify_instance(const std::string& instance_path, const std::string& report_path = "",
                         const Tolerances& tol = {});

struct EmitSummary {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
};

// which = "ift": columns (sample_id, quantity, re, im).
// which = "moments": columns (m1, m2, quantity) with the reference line
// m2 = 2*m1 noted in the header.
EmitSummary emit_fig(const std::string& results_path, const std::string& which,
                     const std::string& out_path);

}  // namespace ftlab
