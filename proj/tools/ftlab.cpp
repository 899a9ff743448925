// ftlab — seeded fluctuation-relation ensembles for locally coupled
// system-environment dynamics: run ensembles, verify single instances,
// emit figure data.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ftlab/ensemble.hpp"

namespace {

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("FTLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

int cmd_run(const ftlab::EnsembleConfig& cfg) {
    const auto records = ftlab::run_ensemble(cfg);

    std::ofstream out(cfg.out_path);
    if (!out) {
        std::cerr << "ftlab: cannot write '" << cfg.out_path << "'\n";
        return 2;
    }
    ftlab::write_results_csv(out, cfg, records);

    std::size_t failed = 0, not_passing = 0;
    for (const auto& r : records) {
        if (r.failed) ++failed;
        if (!r.passed()) ++not_passing;
    }
    std::cout << "ftlab run: " << records.size() << " samples, " << failed << " failed, "
              << (records.size() - not_passing) << " all-pass -> " << cfg.out_path << "\n";
    return not_passing == 0 ? 0 : 1;
}

int cmd_verify(const std::string& instance_path, const std::string& report_path) {
    const ftlab::FTReport rep = ftlab::verify_instance(instance_path, report_path);
    const auto show = [](const char* name, bool applicable, bool pass) {
        std::cout << "  " << name << ": " << (applicable ? (pass ? "pass" : "FAIL") : "n/a") << "\n";
    };
    std::cout << "ftlab verify: " << rep.instance_id << "\n";
    show("integral classical", true, rep.pass_ift_cl);
    show("integral quantum", rep.quasi_computed, rep.pass_ift_q);
    show("integral coherence", rep.quasi_computed && rep.coherence_applicable, rep.pass_ift_c);
    show("expectation classical", true, rep.pass_exp_cl);
    show("expectation quantum", rep.quasi_computed, rep.pass_exp_q);
    show("expectation coherence", rep.quasi_computed && rep.coherence_applicable, rep.pass_exp_c);
    show("detailed classical", rep.detailed_computed, rep.pass_detailed_cl);
    show("detailed quantum", rep.detailed_computed && rep.quasi_computed, rep.pass_detailed_q);
    show("detailed coherence",
         rep.detailed_computed && rep.quasi_computed && rep.coherence_applicable, rep.pass_detailed_c);
    show("second moments", true, rep.pass_m2_cl && (!rep.quasi_computed || rep.pass_m2_q));
    show("nonnegative changes", true, rep.pass_nonneg);
    if (!report_path.empty()) std::cout << "  report -> " << report_path << "\n";
    return rep.all_pass() ? 0 : 1;
}

int cmd_emit(const std::string& results, const std::string& which, const std::string& out_path) {
    const auto summary = ftlab::emit_fig(results, which, out_path);
    std::cout << "ftlab emit-fig: " << summary.rows_in << " result rows -> " << summary.rows_out
              << " figure rows in " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"many-body correlation and coherence fluctuation-relation laboratory"};
    app.require_subcommand(1);

    ftlab::EnsembleConfig cfg;
    std::string scenario = "random";
    bool no_quasi = false;
    auto* run = app.add_subcommand("run", "run a seeded ensemble and write a results CSV");
    run->add_option("--sites", cfg.sites, "number of system sites")->check(CLI::PositiveNumber);
    run->add_option("--scenario", scenario, "random | swap")
        ->check(CLI::IsMember({"random", "swap"}));
    run->add_option("--samples", cfg.samples, "ensemble size")->check(CLI::PositiveNumber);
    run->add_option("--seed", cfg.seed, "ensemble seed");
    run->add_option("--local-dim", cfg.local_dim, "system site dimension")->check(CLI::Range(2, 64));
    run->add_option("--env-dim", cfg.env_dim, "environment site dimension")->check(CLI::Range(2, 64));
    run->add_flag("--no-quasi", no_quasi, "skip the quasiprobability sweeps");
    run->add_flag("--dump-dist", cfg.dump_distributions,
                  "dump per-sample distributions as JSONL (grows exponentially with sites)");
    run->add_option("--budget", cfg.term_budget, "max enumeration terms per sweep");
    run->add_option("--out", cfg.out_path, "results CSV path")->required();

    std::string instance_path, report_path;
    auto* verify = app.add_subcommand("verify", "verify one instance file");
    verify->add_option("--instance", instance_path, "instance JSON path")->required();
    verify->add_option("--report", report_path, "report JSON output path");

    std::string results_path, which = "ift", fig_path;
    auto* emit = app.add_subcommand("emit-fig", "turn a results CSV into figure data");
    emit->add_option("--results", results_path, "results CSV path")->required();
    emit->add_option("--which", which, "ift | moments")->check(CLI::IsMember({"ift", "moments"}));
    emit->add_option("--out", fig_path, "figure CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            cfg.compute_quasi = !no_quasi;
            cfg.scenario = scenario == "swap" ? ftlab::EnsembleConfig::Kind::swap_gates
                                              : ftlab::EnsembleConfig::Kind::random;
            return cmd_run(cfg);
        }
        if (verify->parsed()) return cmd_verify(instance_path, report_path);
        return cmd_emit(results_path, which, fig_path);
    } catch (const ftlab::BudgetError& e) {
        std::cerr << "ftlab: budget exceeded: " << e.what() << "\n";
        return 2;
    } catch (const ftlab::FormatError& e) {
        std::cerr << "ftlab: format error: " << e.what() << "\n";
        return 2;
    } catch (const ftlab::ValidationError& e) {
        std::cerr << "ftlab: validation error: " << e.what() << "\n";
        return 2;
    } catch (const ftlab::ArgumentError& e) {
        std::cerr << "ftlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "ftlab: " << e.what() << "\n";
        return 1;
    }
}
