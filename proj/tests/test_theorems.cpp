#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

using namespace ftlab;

namespace {

Scenario identity_scenario(std::uint64_t seed) {
    SplitMix64 rng({seed, 0});
    const DensityState rho_S =
        with_layout(random_density(4, 4, rng), Layout({{"S1", 2}, {"S2", 2}}));
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    std::vector<UnitaryGate> gates{UnitaryGate(CMatrix::Identity(4, 4), "S1", "E1"),
                                   UnitaryGate(CMatrix::Identity(4, 4), "S2", "E2")};
    return run_scenario(rho_S, rho_E, gates);
}

Scenario classical_swap_scenario(std::uint64_t seed) {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = 0.4;
    m(1, 1) = 0.3;
    m(2, 2) = 0.2;
    m(3, 3) = 0.1;
    const DensityState rho_S(m, Layout({{"S1", 2}, {"S2", 2}}));
    SplitMix64 rng({seed, 2});
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    std::vector<UnitaryGate> gates{swap_gate(2, "S1", "E1"), swap_gate(2, "S2", "E2")};
    return run_scenario(rho_S, rho_E, gates);
}

// near-identity local dynamics: exp(i eps X (x) X)
Scenario near_identity_scenario(std::uint64_t seed, double eps) {
    SplitMix64 rng({seed, 3});
    const DensityState rho_S =
        with_layout(random_density(4, 4, rng), Layout({{"S1", 2}, {"S2", 2}}));
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    CMatrix xx = CMatrix::Zero(4, 4);
    xx(0, 3) = xx(1, 2) = xx(2, 1) = xx(3, 0) = 1.0;
    const CMatrix u = std::cos(eps) * CMatrix::Identity(4, 4) + Complex(0, std::sin(eps)) * xx;
    std::vector<UnitaryGate> gates{UnitaryGate(u, "S1", "E1"), UnitaryGate(u, "S2", "E2")};
    return run_scenario(rho_S, rho_E, gates);
}

}  // namespace

TEST_CASE("integral relations hold exactly for identity dynamics") {
    const Scenario sc = identity_scenario(211);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::classical);
    const TrajectoryDistribution pf = forward_classical(sc);
    const Complex v = integral_ft(pf, make_obs_correlation_cl(t));
    CHECK(std::abs(v - Complex(1, 0)) <= 1e-12);
}

TEST_CASE("integral relations on random three-site instances") {
    for (std::uint64_t seed : {401u, 402u, 403u}) {
        const Scenario sc = oracle::random_scenario(3, 2, 2, seed);
        const TrajectoryTables tc(sc, TrajectoryTables::Pipeline::classical);
        const TrajectoryDistribution pf = forward_classical(sc);
        const Complex v_cl = integral_ft(pf, make_obs_correlation_cl(tc));
        CHECK(std::abs(v_cl - Complex(1, 0)) <= 1e-8);

        const TrajectoryTables tq(sc, TrajectoryTables::Pipeline::quantum);
        const QuasiDistribution qf = forward_quasi(sc);
        const Complex v_q = integral_ft(qf, make_obs_correlation(tq));
        CHECK(std::abs(v_q - Complex(1, 0)) <= 1e-8);
        CHECK(std::abs(v_q.imag()) <= 1e-10);
    }
}

TEST_CASE("expectation values reproduce the entropy-route targets") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 409);
    const InfoSummary info = info_summary(sc);

    const TrajectoryTables tc(sc, TrajectoryTables::Pipeline::classical);
    const auto [v_cl, ok_cl] = expectation_check(forward_classical(sc), make_obs_correlation_cl(tc),
                                                 info.cl_change);
    CHECK(ok_cl);

    const TrajectoryTables tq(sc, TrajectoryTables::Pipeline::quantum);
    const auto [v_q, ok_q] = expectation_check(forward_quasi(sc), make_obs_correlation(tq),
                                               info.mi_change);
    CHECK(ok_q);

    const Scenario swap_sc = oracle::random_scenario(2, 2, 2, 419, /*swap=*/true);
    const InfoSummary swap_info = info_summary(swap_sc);
    const TrajectoryTables tsw(swap_sc, TrajectoryTables::Pipeline::quantum);
    const auto [v_c, ok_c] = expectation_check(forward_quasi(swap_sc), make_obs_coherence(tsw),
                                               swap_info.coh_change);
    CHECK(ok_c);

    // identity dynamics: expectation 0 against target 0
    const Scenario idsc = identity_scenario(421);
    const TrajectoryTables ti(idsc, TrajectoryTables::Pipeline::classical);
    const auto [v0, ok0] = expectation_check(forward_classical(idsc), make_obs_correlation_cl(ti), 0.0);
    CHECK(ok0);
    CHECK(std::abs(v0) <= 1e-10);
}

TEST_CASE("detailed classical relation") {
    CHECK(detailed_ft_classical(identity_scenario(431)) <= 1e-12);
    for (std::uint64_t seed : {433u, 439u})
        CHECK(detailed_ft_classical(oracle::random_scenario(2, 2, 2, seed)) <= 1e-10);
    CHECK(detailed_ft_classical(oracle::random_scenario(3, 2, 2, 443)) <= 1e-10);
}

TEST_CASE("detailed quantum relation") {
    for (std::uint64_t seed : {449u, 457u})
        CHECK(detailed_ft_quantum(oracle::random_scenario(2, 2, 2, seed)) <= 1e-10);

    // classical input reduces to the classical relation
    const Scenario sc = classical_swap_scenario(461);
    CHECK(detailed_ft_quantum(sc) <= 1e-10);
    CHECK(detailed_ft_classical(sc) <= 1e-10);

    // entangled system state with genuinely complex quasiprobabilities
    SplitMix64 rng({463, 0});
    DensityState bell = with_layout(bell_state(), Layout({{"S1", 2}, {"S2", 2}}));
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    std::vector<UnitaryGate> gates{UnitaryGate(random_unitary(4, rng), "S1", "E1"),
                                   UnitaryGate(random_unitary(4, rng), "S2", "E2")};
    const Scenario bell_sc = run_scenario(bell, rho_E, gates);
    CHECK(detailed_ft_quantum(bell_sc) <= 1e-10);
}

TEST_CASE("detailed coherence relation and its guard") {
    for (std::uint64_t seed : {467u, 479u})
        CHECK(detailed_ft_coherence(oracle::random_scenario(2, 2, 2, seed, /*swap=*/true)) <= 1e-10);

    // classical input under swap: the coherence observable vanishes on support
    const Scenario sc = classical_swap_scenario(487);
    CHECK(detailed_ft_coherence(sc) <= 1e-12);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::quantum);
    const QuasiDistribution qf = forward_quasi(sc);
    for (std::size_t f = 0; f < qf.values.size(); ++f) {
        if (std::abs(qf.values[f]) < 1e-10) continue;
        CHECK(std::abs(delta_c(decode_zeta(qf.space, f), t)) <= 1e-9);
    }

    CHECK_THROWS_AS(detailed_ft_coherence(oracle::random_scenario(2, 2, 2, 491)), PreconditionError);
}

TEST_CASE("moment reports and the Taylor remainder bound") {
    const Scenario idsc = identity_scenario(499);
    const TrajectoryTables ti(idsc, TrajectoryTables::Pipeline::classical);
    const MomentReport m0 = moment_report(forward_classical(idsc), make_obs_correlation_cl(ti));
    CHECK(std::abs(m0.m1) <= 1e-10);
    CHECK(std::abs(m0.m2) <= 1e-10);

    for (const double eps : {0.05, 0.15}) {
        const Scenario sc = near_identity_scenario(503, eps);
        const TrajectoryTables tc(sc, TrajectoryTables::Pipeline::classical);
        const MomentReport mr = moment_report(forward_classical(sc), make_obs_correlation_cl(tc));
        CHECK(std::abs(mr.m2 - 2.0 * mr.m1) <= mr.remainder_bound() + 1e-12);

        const TrajectoryTables tq(sc, TrajectoryTables::Pipeline::quantum);
        const MomentReport mq = moment_report(forward_quasi(sc), make_obs_correlation(tq));
        CHECK(std::abs(mq.m2 - 2.0 * mq.m1) <= mq.remainder_bound() + 1e-12);
    }
}

TEST_CASE("Jensen consistency") {
    for (std::uint64_t seed : {509u, 521u}) {
        const Scenario sc = oracle::random_scenario(2, 2, 2, seed);
        const TrajectoryTables tc(sc, TrajectoryTables::Pipeline::classical);
        const TrajectoryDistribution pf = forward_classical(sc);
        const ObsFn obs = make_obs_correlation_cl(tc);
        const Complex ift = integral_ft(pf, obs);
        const auto [mean, ok] = expectation_check(pf, obs, info_summary(sc).cl_change);
        CHECK(std::exp(-mean.real()) <= ift.real() + 1e-10);

        // quasi route: assert the scalar consequence instead
        CHECK(info_summary(sc).mi_change >= -1e-10);
    }
}

TEST_CASE("summed detailed identities reproduce the integral relations") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 523);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::classical);
    const TrajectoryDistribution pf = forward_classical(sc);
    const TrajectoryDistribution pb = backward_classical(sc);
    std::vector<TrajectoryDistribution> locals_f, locals_b;
    for (int j = 0; j < sc.num_sites; ++j) {
        locals_f.push_back(marginal_local(pf, j));
        locals_b.push_back(marginal_local(pb, j));
    }

    CompensatedSum total;
    double scale = 0.0;
    for (std::size_t f = 0; f < pf.values.size(); ++f) {
        const XiIndex xi = decode_xi(pf.space, f);
        double prod_f = 1.0, prod_b = 1.0;
        for (int j = 0; j < sc.num_sites; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const XiIndex local{{xi.sys_in[ju]}, {xi.env_in[ju]}, {xi.sys_out[ju]}, {xi.env_out[ju]}};
            prod_f *= locals_f[ju].values[encode_xi(locals_f[ju].space, local)];
            prod_b *= locals_b[ju].values[encode_xi(locals_b[ju].space, local)];
        }
        const double lhs_w = pf.values[f] * prod_b;
        const double rhs = pb.values[f] * prod_f;
        if (std::abs(lhs_w) < kSupportFloor && std::abs(rhs) < kSupportFloor) continue;
        const XiIndex& x = xi;
        const double lhs = lhs_w * std::exp(-delta_iota_cl(x, t));
        total.add(lhs - rhs);
        scale = std::max(scale, std::max(std::abs(lhs), std::abs(rhs)));
    }
    CHECK(std::abs(total.value()) <= 1e-10 * std::max(1.0, scale));
}

TEST_CASE("analyze_scenario produces a self-consistent report") {
    const Scenario sc = oracle::random_scenario(3, 2, 2, 541, /*swap=*/true);
    AnalyzeOptions opt;
    opt.instance_id = "swap-3";
    const FTReport rep = analyze_scenario(sc, opt);
    CHECK(rep.coherence_applicable);
    CHECK(rep.pass_ift_cl);
    CHECK(rep.pass_ift_q);
    CHECK(rep.pass_ift_c);
    CHECK(rep.pass_exp_cl);
    CHECK(rep.pass_exp_q);
    CHECK(rep.pass_exp_c);
    CHECK(rep.pass_detailed_cl);
    CHECK(rep.pass_detailed_q);
    CHECK(rep.pass_detailed_c);
    CHECK(rep.pass_nonneg);
    CHECK(rep.all_pass());

    // flags are recomputable from the stored values
    FTReport copy = rep;
    copy.pass_ift_cl = false;
    copy.recompute_flags();
    CHECK(copy.pass_ift_cl == rep.pass_ift_cl);

    // integral values agree with the distribution + observable route
    const TrajectoryTables tq(sc, TrajectoryTables::Pipeline::quantum);
    const Complex direct = integral_ft(forward_quasi(sc), make_obs_correlation(tq));
    CHECK(std::abs(direct - rep.ift_q) <= 1e-10);
}

TEST_CASE("serial and blocked reductions agree") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 547);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::quantum);
    const QuasiDistribution qf = forward_quasi(sc);
    const ObsFn obs = make_obs_correlation(t);

    // reference single-block pass
    CompensatedCSum ref;
    for (std::size_t f = 0; f < qf.values.size(); ++f) {
        if (std::abs(qf.values[f]) < kWeightFloor) continue;
        ref.add(qf.values[f] * std::exp(-obs(f)));
    }
    const Complex blocked = integral_ft(qf, obs, /*parallel=*/true);
    CHECK(std::abs(blocked - ref.value()) <= 1e-12);
}
