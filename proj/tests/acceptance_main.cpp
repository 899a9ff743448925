// Acceptance suite: runs every exit criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace ftlab;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string description)
        : number_(number), description_(std::move(description)),
          start_(std::chrono::steady_clock::now()) {}

    void fail(const std::string& why) {
        if (ok_) first_failure_ = why;
        ok_ = false;
    }
    void note(const std::string& detail) { detail_ = detail; }

    ~Criterion() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::printf("%s criterion %d: %s (%s%s%.1fs)\n", ok_ ? "PASS" : "FAIL", number_,
                    description_.c_str(), detail_.empty() ? "" : (detail_ + ", ").c_str(),
                    ok_ ? "" : (first_failure_ + ", ").c_str(), secs);
        std::fflush(stdout);
        if (!ok_) ++g_failures;
    }

private:
    int number_;
    std::string description_, detail_, first_failure_;
    bool ok_ = true;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

EnsembleConfig base_config(int sites, EnsembleConfig::Kind kind, std::size_t samples,
                           std::uint64_t seed) {
    EnsembleConfig cfg;
    cfg.sites = sites;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.scenario = kind;
    return cfg;
}

}  // namespace

int main() {
    const std::size_t ensemble_size = 1000;
    const EnsembleConfig random_cfg =
        base_config(3, EnsembleConfig::Kind::random, ensemble_size, 42);
    const EnsembleConfig swap_cfg =
        base_config(3, EnsembleConfig::Kind::swap_gates, ensemble_size, 42);

    std::printf("running %zu-sample random and swap ensembles at 3 sites...\n", ensemble_size);
    std::fflush(stdout);
    const auto random_records = run_ensemble(random_cfg);
    const auto swap_records = run_ensemble(swap_cfg);

    {
        Criterion c(1, "integral relation for the classical correlation change over the random ensemble");
        double worst = 0;
        for (const auto& r : random_records) {
            if (r.failed) c.fail("sample " + std::to_string(r.sample_id) + " failed: " + r.failure);
            worst = std::max(worst, std::abs(r.report.ift_cl - Complex(1, 0)));
        }
        c.note("max deviation " + fmt(worst));
        if (worst > 1e-8) c.fail("deviation above 1e-8");
    }

    {
        Criterion c(2, "integral relation for the quantum correlation change over the random ensemble");
        double worst = 0, worst_im = 0;
        for (const auto& r : random_records) {
            worst = std::max(worst, std::abs(r.report.ift_q - Complex(1, 0)));
            worst_im = std::max(worst_im, std::abs(r.report.ift_q.imag()));
        }
        c.note("max deviation " + fmt(worst) + ", max imag " + fmt(worst_im));
        if (worst > 1e-8) c.fail("deviation above 1e-8");
        if (worst_im > 1e-10) c.fail("imaginary part above 1e-10");
    }

    {
        Criterion c(3, "integral relation for the coherence change over the swap ensemble");
        double worst = 0;
        for (const auto& r : swap_records) {
            if (r.failed) c.fail("sample " + std::to_string(r.sample_id) + " failed: " + r.failure);
            if (!r.report.coherence_applicable) c.fail("dephasing condition not met under swap");
            worst = std::max(worst, std::abs(r.report.ift_c - Complex(1, 0)));
        }
        c.note("max deviation " + fmt(worst));
        if (worst > 1e-8) c.fail("deviation above 1e-8");
    }

    {
        Criterion c(4, "expectation values match the entropy-route targets on every instance");
        double worst = 0;
        for (const auto& r : random_records) {
            worst = std::max(worst, std::abs(r.report.exp_cl.real() - r.report.info.cl_change));
            worst = std::max(worst, std::abs(r.report.exp_q.real() - r.report.info.mi_change));
        }
        for (const auto& r : swap_records)
            worst = std::max(worst, std::abs(r.report.exp_c.real() - r.report.info.coh_change));
        c.note("max deviation " + fmt(worst));
        if (worst > 1e-8) c.fail("deviation above 1e-8");
    }

    {
        Criterion c(5, "detailed relations on exhaustive two-site sweeps");
        double worst = 0;
        for (std::size_t id = 0; id < 100; ++id) {
            const EnsembleConfig cfg = base_config(2, EnsembleConfig::Kind::random, 1, 4242);
            const Scenario sc = make_instance(cfg, id);
            worst = std::max(worst, detailed_ft_classical(sc));
            worst = std::max(worst, detailed_ft_quantum(sc));
        }
        for (std::size_t id = 0; id < 100; ++id) {
            const EnsembleConfig cfg = base_config(2, EnsembleConfig::Kind::swap_gates, 1, 4242);
            worst = std::max(worst, detailed_ft_coherence(make_instance(cfg, id)));
        }
        c.note("max normalized residual " + fmt(worst));
        if (worst > 1e-10) c.fail("residual above 1e-10");
    }

    {
        Criterion c(6, "correlation changes are nonnegative on every instance");
        double worst = 0;
        for (const auto& r : random_records) {
            worst = std::min(worst, r.report.info.mi_change);
            worst = std::min(worst, r.report.info.cl_change);
        }
        for (const auto& r : swap_records) {
            worst = std::min(worst, r.report.info.mi_change);
            worst = std::min(worst, r.report.info.cl_change);
            worst = std::min(worst, r.report.info.coh_change);
        }
        c.note("most negative change " + fmt(worst));
        if (worst < -1e-10) c.fail("negative change below -1e-10");
    }

    {
        Criterion c(7, "amplitude-table fast paths equal direct-trace and direct-local oracles");
        double worst = 0;
        for (std::uint64_t id = 0; id < 6; ++id) {
            const EnsembleConfig cfg = base_config(2, EnsembleConfig::Kind::random, 1, 777);
            const Scenario sc = make_instance(cfg, id);
            const oracle::DirectEvaluator cl(sc, /*classical=*/true);
            const oracle::DirectEvaluator qu(sc, /*classical=*/false);
            const TrajectoryDistribution pf = forward_classical(sc);
            const TrajectoryDistribution pb = backward_classical(sc);
            const QuasiDistribution qf = forward_quasi(sc);
            const QuasiDistribution qb = backward_quasi(sc);
            for (std::size_t f = 0; f < pf.values.size(); ++f) {
                std::size_t x[4];
                pf.space.decode(f, x);
                worst = std::max(worst, std::abs(pf.values[f] - cl.forward(x[0], x[1], x[2], x[3])));
                worst = std::max(worst, std::abs(pb.values[f] - cl.backward(x[0], x[1], x[2], x[3])));
            }
            for (std::size_t f = 0; f < qf.values.size(); ++f) {
                std::size_t z[6];
                qf.space.decode(f, z);
                worst = std::max(worst,
                                 std::abs(qf.values[f] - qu.quasi_forward(z[0], z[1], z[2], z[3], z[4], z[5])));
                worst = std::max(worst,
                                 std::abs(qb.values[f] - qu.quasi_backward(z[0], z[1], z[2], z[3], z[4], z[5])));
            }
            for (int j = 0; j < sc.num_sites; ++j) {
                const TrajectoryDistribution mj = marginal_local(pf, j);
                for (std::size_t f = 0; f < mj.values.size(); ++f) {
                    std::size_t x[4];
                    mj.space.decode(f, x);
                    worst = std::max(worst, std::abs(mj.values[f] -
                                                     cl.local_forward(j, static_cast<int>(x[0]),
                                                                      static_cast<int>(x[1]),
                                                                      static_cast<int>(x[2]),
                                                                      static_cast<int>(x[3]))));
                }
            }
        }

        // dephased initial states: quasiprobability equals the classical record
        for (const bool swap_dynamics : {false, true}) {
            SplitMix64 rng({888, swap_dynamics ? 1u : 0u});
            DensityState raw = with_layout(random_density(4, 4, rng), Layout({{"S1", 2}, {"S2", 2}}));
            DensityState rho_S = dephase(raw, local_eigenbases(raw));
            std::vector<DensityState> rho_E{
                with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
                with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
            std::vector<UnitaryGate> gates;
            for (int j = 0; j < 2; ++j) {
                const std::string s = "S" + std::to_string(j + 1), e = "E" + std::to_string(j + 1);
                gates.push_back(swap_dynamics ? swap_gate(2, s, e)
                                              : UnitaryGate(CMatrix::Identity(4, 4), s, e));
            }
            const Scenario sc = run_scenario(rho_S, rho_E, gates);
            const TrajectoryDistribution pf = forward_classical(sc);
            const QuasiDistribution qf = forward_quasi(sc);

            std::vector<CMatrix> in_bases, out_bases;
            for (const auto& sp : sc.site_in) in_bases.push_back(sp.vectors);
            for (const auto& sp : sc.site_out) out_bases.push_back(sp.vectors);
            const CMatrix ovl_in = kron_all(in_bases).adjoint() * sc.joint_in.vectors;
            const CMatrix ovl_out = kron_all(out_bases).adjoint() * sc.joint_out.vectors;
            const std::size_t dS = sc.dim_S();
            std::vector<std::size_t> k_of_s(dS, dS), ko_of_so(dS, dS);
            for (std::size_t s = 0; s < dS; ++s)
                for (std::size_t k = 0; k < dS; ++k) {
                    if (std::abs(ovl_in(s, k)) > 0.999) k_of_s[s] = k;
                    if (std::abs(ovl_out(s, k)) > 0.999) ko_of_so[s] = k;
                }
            for (std::size_t s = 0; s < dS; ++s)
                if (k_of_s[s] == dS || ko_of_so[s] == dS) c.fail("eigenindex identification failed");

            for (std::size_t f = 0; f < qf.values.size(); ++f) {
                std::size_t z[6];
                qf.space.decode(f, z);
                if (z[0] == k_of_s[z[1]] && z[3] == ko_of_so[z[4]]) {
                    const std::size_t x[4] = {z[1], z[2], z[4], z[5]};
                    worst = std::max(worst,
                                     std::abs(qf.values[f] - Complex(pf.values[pf.space.encode(x)], 0)));
                } else {
                    worst = std::max(worst, std::abs(qf.values[f]));
                }
            }
        }
        c.note("max elementwise deviation " + fmt(worst));
        if (worst > 1e-12) c.fail("deviation above 1e-12");
    }

    {
        Criterion c(8, "analytic fixtures for entropy, mutual information, and coherence");
        const double ln2 = std::log(2.0);
        double worst = 0;
        const DensityState bell = bell_state();
        const DensityState ghz = ghz_state(3);
        SplitMix64 rng({999, 0});
        const DensityState prod = product_state(
            {random_density(2, 2, rng).matrix, random_density(2, 2, rng).matrix});
        worst = std::max(worst, std::abs(von_neumann_entropy(bell)));
        worst = std::max(worst, std::abs(total_mutual_information(bell) - 2 * ln2));
        worst = std::max(worst, std::abs(coherence(bell) - ln2));
        worst = std::max(worst, std::abs(von_neumann_entropy(ghz)));
        worst = std::max(worst, std::abs(total_mutual_information(ghz) - 3 * ln2));
        worst = std::max(worst, std::abs(classical_correlation(ghz) - 2 * ln2));
        worst = std::max(worst, std::abs(coherence(ghz) - ln2));
        worst = std::max(worst, std::abs(total_mutual_information(prod)));
        worst = std::max(worst, std::abs(coherence(prod)));
        c.note("max deviation " + fmt(worst));
        if (worst > 1e-10) c.fail("deviation above 1e-10");
    }

    {
        Criterion c(9, "second moments track twice the first moments within the enumerated remainder bound");
        double worst_excess = 0;
        std::size_t in_range = 0;
        for (const auto& r : random_records) {
            const auto check = [&](Complex m1, Complex m2, double bound) {
                if (std::abs(m1) > 0.1) return;
                ++in_range;
                worst_excess = std::max(worst_excess, std::abs(m2 - 2.0 * m1) - bound);
            };
            check(r.report.exp_cl, r.report.m2_cl, r.report.mom_bound_cl);
            check(r.report.exp_q, r.report.m2_q, r.report.mom_bound_q);
        }
        c.note(std::to_string(in_range) + " series in range, worst excess " + fmt(worst_excess));
        if (in_range == 0) c.fail("no instance fell in the |m1| <= 0.1 window");
        if (worst_excess > 0) c.fail("bound exceeded");
    }

    {
        Criterion c(10, "identical configurations produce byte-identical results files");
        EnsembleConfig cfg = base_config(3, EnsembleConfig::Kind::random, 50, 7);
        const std::string a = results_csv_string(cfg, run_ensemble(cfg));
        const std::string b = results_csv_string(cfg, run_ensemble(cfg));
        c.note(std::to_string(a.size()) + " bytes");
        if (a != b) c.fail("outputs differ");
        if (a.empty()) c.fail("empty output");
    }

    if (g_failures == 0) std::printf("all criteria passed\n");
    return g_failures;
}
