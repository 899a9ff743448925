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

Scenario classical_scenario(std::uint64_t seed, bool identity_gates) {
    // correlated diagonal two-qubit system state with distinct spectra
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = 0.4;
    m(1, 1) = 0.3;
    m(2, 2) = 0.2;
    m(3, 3) = 0.1;
    const DensityState rho_S(m, Layout({{"S1", 2}, {"S2", 2}}));
    SplitMix64 rng({seed, 1});
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    std::vector<UnitaryGate> gates;
    for (int j = 0; j < 2; ++j) {
        const std::string s = "S" + std::to_string(j + 1), e = "E" + std::to_string(j + 1);
        gates.push_back(identity_gates ? UnitaryGate(CMatrix::Identity(4, 4), s, e)
                                       : UnitaryGate(random_unitary(4, rng), s, e));
    }
    return run_scenario(rho_S, rho_E, gates);
}

}  // namespace

TEST_CASE("index space round trips") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 61);
    const IndexSpace xs = xi_space(sc), zs = zeta_space(sc);
    CHECK(xs.total() == 256);   // (4*4)^2
    CHECK(zs.total() == 4096);  // 4^4 * 4^2
    for (std::size_t f : {std::size_t{0}, std::size_t{17}, std::size_t{255}})
        CHECK(encode_xi(xs, decode_xi(xs, f)) == f);
    for (std::size_t f : {std::size_t{0}, std::size_t{999}, std::size_t{4095}})
        CHECK(encode_zeta(zs, decode_zeta(zs, f)) == f);
}

TEST_CASE("classical distributions normalize and match the direct-trace oracle") {
    for (std::uint64_t seed : {201u, 202u}) {
        const Scenario sc = oracle::random_scenario(2, 2, 2, seed);
        const oracle::DirectEvaluator direct(sc, /*classical=*/true);

        const TrajectoryDistribution pf = forward_classical(sc);
        const TrajectoryDistribution pb = backward_classical(sc);
        CHECK(std::abs(pf.sum() - 1.0) <= 1e-10);
        CHECK(std::abs(pb.sum() - 1.0) <= 1e-10);

        const std::size_t dS = sc.dim_S(), dE = sc.dim_E();
        double worst_f = 0, worst_b = 0;
        for (std::size_t f = 0; f < pf.values.size(); ++f) {
            std::size_t c[4];
            pf.space.decode(f, c);
            worst_f = std::max(worst_f, std::abs(pf.values[f] - direct.forward(c[0], c[1], c[2], c[3])));
            worst_b = std::max(worst_b, std::abs(pb.values[f] - direct.backward(c[0], c[1], c[2], c[3])));
            CHECK(pf.values[f] >= -1e-12);
            CHECK(pb.values[f] >= -1e-12);
        }
        CHECK(worst_f <= 1e-12);
        CHECK(worst_b <= 1e-12);
        (void)dS;
        (void)dE;
    }
}

TEST_CASE("identity gates give delta-structured forward records") {
    const Scenario sc = identity_scenario(71);
    const TrajectoryDistribution pf = forward_classical(sc);
    for (std::size_t f = 0; f < pf.values.size(); ++f) {
        std::size_t c[4];
        pf.space.decode(f, c);
        if (c[0] == c[2] && c[1] == c[3]) {
            CHECK(std::abs(pf.values[f] - sc.diag_in(c[0]) * sc.env_diag_in(c[1])) <= 1e-10);
        } else {
            CHECK(std::abs(pf.values[f]) <= 1e-10);
        }
    }
}

TEST_CASE("single-site swap supports exchange of system and environment outcomes") {
    const Scenario sc = oracle::random_scenario(1, 2, 2, 73, /*swap=*/true);
    const TrajectoryDistribution pf = forward_classical(sc);
    const TrajectoryDistribution pb = backward_classical(sc);
    for (std::size_t f = 0; f < pf.values.size(); ++f) {
        std::size_t c[4];
        pf.space.decode(f, c);
        const bool on_support = (c[2] == c[1] && c[3] == c[0]);  // s' = n, n' = s
        if (!on_support) {
            CHECK(std::abs(pf.values[f]) <= 1e-10);
            CHECK(std::abs(pb.values[f]) <= 1e-10);
        }
    }
    // backward support is the transpose of the forward support map
    double asym = 0;
    for (std::size_t f = 0; f < pf.values.size(); ++f) {
        std::size_t c[4];
        pf.space.decode(f, c);
        if (pf.values[f] > 1e-12) {
            const std::size_t mirrored[4] = {c[2], c[3], c[0], c[1]};
            asym = std::max(asym, std::abs(pb.values[pb.space.encode(mirrored)]) > 1e-12 ? 0.0 : 1.0);
        }
    }
    CHECK(asym == 0.0);
}

TEST_CASE("marginal_local equals the direct local computation") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 79);
    const oracle::DirectEvaluator direct(sc, /*classical=*/true);
    const TrajectoryDistribution pf = forward_classical(sc);
    for (int j = 0; j < 2; ++j) {
        const TrajectoryDistribution mj = marginal_local(pf, j);
        CHECK(std::abs(mj.sum() - 1.0) <= 1e-10);
        double worst = 0;
        for (std::size_t f = 0; f < mj.values.size(); ++f) {
            std::size_t c[4];
            mj.space.decode(f, c);
            worst = std::max(worst, std::abs(mj.values[f] -
                                             direct.local_forward(j, static_cast<int>(c[0]),
                                                                  static_cast<int>(c[1]),
                                                                  static_cast<int>(c[2]),
                                                                  static_cast<int>(c[3]))));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("product classical states factorize into local marginals") {
    SplitMix64 rng({83, 0});
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
    a(0, 0) = 0.7;
    a(1, 1) = 0.3;
    b(0, 0) = 0.6;
    b(1, 1) = 0.4;
    DensityState rho_S = product_state({a, b});
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    std::vector<UnitaryGate> gates{UnitaryGate(random_unitary(4, rng), "S1", "E1"),
                                   UnitaryGate(random_unitary(4, rng), "S2", "E2")};
    const Scenario sc = run_scenario(rho_S, rho_E, gates);
    const TrajectoryDistribution pf = forward_classical(sc);
    const TrajectoryDistribution m0 = marginal_local(pf, 0);
    const TrajectoryDistribution m1 = marginal_local(pf, 1);

    double worst = 0;
    for (std::size_t f = 0; f < pf.values.size(); ++f) {
        const XiIndex xi = decode_xi(pf.space, f);
        const std::size_t f0 = encode_xi(m0.space, XiIndex{{xi.sys_in[0]}, {xi.env_in[0]}, {xi.sys_out[0]}, {xi.env_out[0]}});
        const std::size_t f1 = encode_xi(m1.space, XiIndex{{xi.sys_in[1]}, {xi.env_in[1]}, {xi.sys_out[1]}, {xi.env_out[1]}});
        worst = std::max(worst, std::abs(pf.values[f] - m0.values[f0] * m1.values[f1]));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("quasiprobabilities normalize and match the direct-trace oracle") {
    for (std::uint64_t seed : {301u, 302u}) {
        const Scenario sc = oracle::random_scenario(2, 2, 2, seed);
        const oracle::DirectEvaluator direct(sc, /*classical=*/false);

        const QuasiDistribution qf = forward_quasi(sc);
        const QuasiDistribution qb = backward_quasi(sc);
        CHECK(std::abs(qf.sum() - Complex(1, 0)) <= 1e-10);
        CHECK(std::abs(qb.sum() - Complex(1, 0)) <= 1e-10);

        double worst_f = 0, worst_b = 0;
        for (std::size_t f = 0; f < qf.values.size(); ++f) {
            std::size_t c[6];
            qf.space.decode(f, c);
            worst_f = std::max(worst_f, std::abs(qf.values[f] -
                                                 direct.quasi_forward(c[0], c[1], c[2], c[3], c[4], c[5])));
            worst_b = std::max(worst_b, std::abs(qb.values[f] -
                                                 direct.quasi_backward(c[0], c[1], c[2], c[3], c[4], c[5])));
        }
        CHECK(worst_f <= 1e-12);
        CHECK(worst_b <= 1e-12);
    }
}

TEST_CASE("entangled system states show nonclassical quasiprobability entries") {
    // identity dynamics keeps every final basis equal to its initial basis,
    // which forces k' = k, s' = s and the manifestly nonnegative value
    // p(k) p(n) |<s|k>|^2; a generic local gate breaks that alignment
    SplitMix64 rng({89, 0});
    DensityState rho_S = with_layout(bell_state(), Layout({{"S1", 2}, {"S2", 2}}));
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};

    std::vector<UnitaryGate> id_gates{UnitaryGate(CMatrix::Identity(4, 4), "S1", "E1"),
                                      UnitaryGate(CMatrix::Identity(4, 4), "S2", "E2")};
    const QuasiDistribution q_id = forward_quasi(run_scenario(rho_S, rho_E, id_gates));
    for (const auto& v : q_id.values) {
        CHECK(v.real() >= -1e-12);
        CHECK(std::abs(v.imag()) <= 1e-12);
    }

    std::vector<UnitaryGate> gates{UnitaryGate(random_unitary(4, rng), "S1", "E1"),
                                   UnitaryGate(random_unitary(4, rng), "S2", "E2")};
    const Scenario sc = run_scenario(rho_S, rho_E, gates);
    const QuasiDistribution qf = forward_quasi(sc);
    bool negative = false, imaginary = false;
    for (const auto& v : qf.values) {
        if (v.real() < -1e-12) negative = true;
        if (std::abs(v.imag()) > 1e-12) imaginary = true;
    }
    CHECK(negative);
    CHECK(imaginary);
    CHECK(std::abs(qf.sum() - Complex(1, 0)) <= 1e-10);
}

TEST_CASE("quasi marginals over joint eigenindices recover the diagonals") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 97);
    const QuasiDistribution qf = forward_quasi(sc);
    const std::size_t dS = sc.dim_S(), dE = sc.dim_E();
    std::vector<CompensatedCSum> on_s(dS), on_so(dS);
    for (std::size_t f = 0; f < qf.values.size(); ++f) {
        std::size_t c[6];
        qf.space.decode(f, c);
        on_s[c[1]].add(qf.values[f]);
        on_so[c[4]].add(qf.values[f]);
    }
    for (std::size_t s = 0; s < dS; ++s) {
        CHECK(std::abs(on_s[s].value() - Complex(sc.diag_in(s), 0)) <= 1e-10);
        CHECK(std::abs(on_so[s].value() - Complex(sc.diag_out(s), 0)) <= 1e-10);
    }
    (void)dE;
}

TEST_CASE("classical system states reduce the quasiprobability to the classical record") {
    // pointwise collapse requires dynamics that keep the evolved state
    // diagonal in the product of local final eigenbases (identity here)
    const Scenario sc = classical_scenario(101, /*identity_gates=*/true);
    const TrajectoryDistribution pf = forward_classical(sc);
    const QuasiDistribution qf = forward_quasi(sc);

    // identification k <-> s via the initial product eigenbasis
    const CMatrix b_in = [&] {
        std::vector<CMatrix> bases;
        for (const auto& sp : sc.site_in) bases.push_back(sp.vectors);
        return kron_all(bases);
    }();
    const CMatrix ovl_in = b_in.adjoint() * sc.joint_in.vectors;  // (s, k)
    const CMatrix b_out = [&] {
        std::vector<CMatrix> bases;
        for (const auto& sp : sc.site_out) bases.push_back(sp.vectors);
        return kron_all(bases);
    }();
    const CMatrix ovl_out = b_out.adjoint() * sc.joint_out.vectors;  // (s', k')

    const std::size_t dS = sc.dim_S();
    std::vector<std::size_t> k_of_s(dS), ko_of_so(dS);
    for (std::size_t s = 0; s < dS; ++s) {
        for (std::size_t k = 0; k < dS; ++k) {
            if (std::abs(ovl_in(s, k)) > 0.999) k_of_s[s] = k;
            if (std::abs(ovl_out(s, k)) > 0.999) ko_of_so[s] = k;
        }
    }

    double worst_diag = 0, worst_off = 0;
    for (std::size_t f = 0; f < qf.values.size(); ++f) {
        std::size_t c[6];
        qf.space.decode(f, c);
        const bool diagonal = (c[0] == k_of_s[c[1]] && c[3] == ko_of_so[c[4]]);
        if (diagonal) {
            const std::size_t xi[4] = {c[1], c[2], c[4], c[5]};
            worst_diag = std::max(worst_diag, std::abs(qf.values[f] - Complex(pf.values[pf.space.encode(xi)], 0)));
        } else {
            worst_off = std::max(worst_off, std::abs(qf.values[f]));
        }
    }
    CHECK(worst_diag <= 1e-12);
    CHECK(worst_off <= 1e-12);
}

TEST_CASE("for classical inputs the (k, k') marginal of the quasiprobability is classical") {
    // under arbitrary local dynamics the collapse of the joint eigenindices
    // holds in the marginal sense
    const Scenario sc = classical_scenario(102, /*identity_gates=*/false);
    const TrajectoryDistribution pf = forward_classical(sc);
    const QuasiDistribution qf = forward_quasi(sc);
    std::vector<CompensatedCSum> acc(pf.values.size());
    for (std::size_t f = 0; f < qf.values.size(); ++f) {
        std::size_t c[6];
        qf.space.decode(f, c);
        const std::size_t xi[4] = {c[1], c[2], c[4], c[5]};
        acc[pf.space.encode(xi)].add(qf.values[f]);
    }
    double worst = 0;
    for (std::size_t f = 0; f < pf.values.size(); ++f)
        worst = std::max(worst, std::abs(acc[f].value() - Complex(pf.values[f], 0)));
    CHECK(worst <= 1e-12);
}

TEST_CASE("stochastic observables vanish for identity dynamics and factorized states") {
    const Scenario sc = identity_scenario(107);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::classical);
    const TrajectoryDistribution pf = forward_classical(sc);
    for (std::size_t f = 0; f < pf.values.size(); ++f) {
        if (pf.values[f] < 1e-12) continue;
        CHECK(std::abs(delta_iota_cl(decode_xi(pf.space, f), t)) <= 1e-9);
    }

    const Scenario scq = identity_scenario(109);
    const TrajectoryTables tq(scq, TrajectoryTables::Pipeline::quantum);
    const QuasiDistribution qf = forward_quasi(scq);
    for (std::size_t f = 0; f < qf.values.size(); ++f) {
        if (std::abs(qf.values[f]) < 1e-10) continue;
        CHECK(std::abs(delta_iota(decode_zeta(qf.space, f), tq)) <= 1e-7);
    }
}

TEST_CASE("stochastic classical correlation change matches scalar arithmetic") {
    const Scenario sc = classical_scenario(113, /*identity_gates=*/true);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::classical);

    // independent arithmetic from first principles
    auto [m1, l1] = partial_trace(sc.rho_S.matrix, sc.layout_S, {"S1"});
    auto [m2, l2] = partial_trace(sc.rho_S.matrix, sc.layout_S, {"S2"});
    const RVector p1 = clip_probabilities(hermitian_eig(m1).values);
    const RVector p2 = clip_probabilities(hermitian_eig(m2).values);
    // joint diagonal values sorted descending per site order: initial spectra
    // for the diagonal state with entries (0.4, 0.3, 0.2, 0.1)
    const double p_joint[4] = {0.4, 0.3, 0.2, 0.1};

    // identity gates: initial and final data coincide, so the observable at
    // xi with s = s', per-site digits (i, j) -> (i, j), equals 0; check a
    // cross index instead: s = (0,0), s' = (1,1)
    XiIndex xi;
    xi.sys_in = {0, 0};
    xi.env_in = {0, 0};
    xi.sys_out = {1, 1};
    xi.env_out = {0, 0};
    const double expected = (std::log(p_joint[0]) - std::log(p1(0) * p2(0))) -
                            (std::log(p_joint[3]) - std::log(p1(1) * p2(1)));
    CHECK(delta_iota_cl(xi, t) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("observables raise support violations on rank-deficient joints") {
    SplitMix64 rng({127, 0});
    DensityState rho_S = with_layout(bell_state(), Layout({{"S1", 2}, {"S2", 2}}));
    std::vector<DensityState> rho_E{
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E1")),
        with_layout(random_density(2, 2, rng), single_site_layout(2, "E2"))};
    std::vector<UnitaryGate> gates{swap_gate(2, "S1", "E1"), swap_gate(2, "S2", "E2")};
    const Scenario sc = run_scenario(rho_S, rho_E, gates);
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::quantum);

    ZetaIndex zeta;
    zeta.joint_in = 1;  // zero eigenvalue of the pure initial state
    zeta.xi.sys_in = {0, 0};
    zeta.xi.env_in = {0, 0};
    zeta.joint_out = 0;
    zeta.xi.sys_out = {0, 0};
    zeta.xi.env_out = {0, 0};
    CHECK_THROWS_AS(delta_iota(zeta, t), SupportViolation);
    CHECK_THROWS_AS(delta_c(zeta, t), SupportViolation);
}

TEST_CASE("blocked sweeps are bit-identical to serial blocked sweeps") {
    const Scenario sc = oracle::random_scenario(2, 2, 2, 131);
    const QuasiDistribution q_par = forward_quasi(sc, /*parallel=*/true);
    const QuasiDistribution q_ser = forward_quasi(sc, /*parallel=*/false);
    for (std::size_t f = 0; f < q_par.values.size(); ++f)
        CHECK(q_par.values[f] == q_ser.values[f]);
}
