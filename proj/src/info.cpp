#include "ftlab/info.hpp"

#include <cmath>

namespace ftlab {

std::vector<int> Scenario::sys_dims() const {
    std::vector<int> d;
    for (const auto& s : layout_S.sites()) d.push_back(s.dim);
    return d;
}

std::vector<int> Scenario::env_dims() const {
    std::vector<int> d;
    for (const auto& s : layout_E.sites()) d.push_back(s.dim);
    return d;
}

// ------------------------------- measures -----------------------------------

namespace {

double entropy_of_probabilities(const RVector& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) s -= p(i) * std::log(p(i));
    return s;
}

RVector density_probabilities(const CMatrix& m) {
    return clip_probabilities(hermitian_eig(m).values);
}

}  // namespace

double von_neumann_entropy(const DensityState& rho) {
    return entropy_of_probabilities(density_probabilities(rho.matrix));
}

double total_mutual_information(const DensityState& rho) {
    if (rho.layout.num_sites() < 1) throw ArgumentError("total_mutual_information: no sites");
    double marginal_sum = 0.0;
    for (const auto& site : rho.layout.sites()) {
        auto [m, l] = partial_trace(rho.matrix, rho.layout, {site.label});
        marginal_sum += entropy_of_probabilities(density_probabilities(m));
    }
    return marginal_sum - von_neumann_entropy(rho);
}

double classical_correlation(const DensityState& rho) {
    return total_mutual_information(dephase(rho, local_eigenbases(rho)));
}

double coherence(const DensityState& rho) {
    return total_mutual_information(rho) - classical_correlation(rho);
}

// ------------------------------- pipeline -----------------------------------

namespace {

// Product-basis diagonal <x|rho|x> over columns of b = kron of site bases.
RVector product_basis_diagonal(const CMatrix& rho, const CMatrix& b) {
    const CMatrix m = b.adjoint() * rho * b;
    RVector diag(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) diag(i) = std::max(0.0, m(i, i).real());
    return diag;
}

RVector product_of_local_spectra(const std::vector<Spectral>& locals) {
    RVector out = RVector::Ones(1);
    for (const auto& sp : locals) {
        RVector next(out.size() * sp.values.size());
        const RVector vals = clip_probabilities(sp.values);
        for (Eigen::Index i = 0; i < out.size(); ++i)
            for (Eigen::Index j = 0; j < vals.size(); ++j) next(i * vals.size() + j) = out(i) * vals(j);
        out = std::move(next);
    }
    return out;
}

std::vector<CMatrix> basis_columns(const std::vector<Spectral>& locals) {
    std::vector<CMatrix> bases;
    for (const auto& sp : locals) bases.push_back(sp.vectors);
    return bases;
}

struct PipelineStates {
    DensityState joint_out;          // evolved joint state
    DensityState sys_out;            // reduced system state
    std::vector<DensityState> sys_site_out, env_site_out;
    DensityState env_ref;            // product of evolved subenvironment marginals
};

PipelineStates evolve_and_reduce(const DensityState& sys_in, const CMatrix& rho_E_joint,
                                 const CMatrix& u, const Layout& layout_SE,
                                 const Layout& layout_S, const Layout& layout_E) {
    PipelineStates out;
    CMatrix joint = kron(sys_in.matrix, rho_E_joint);
    joint = u * joint * u.adjoint();
    joint = Complex(0.5, 0.0) * (joint + CMatrix(joint.adjoint()));
    out.joint_out = DensityState(joint, layout_SE);

    std::vector<std::string> sys_labels;
    for (const auto& s : layout_S.sites()) sys_labels.push_back(s.label);
    auto [ms, ls] = partial_trace(joint, layout_SE, sys_labels);
    out.sys_out = DensityState(std::move(ms), std::move(ls));

    std::vector<CMatrix> env_factors;
    for (std::size_t j = 0; j < layout_S.num_sites(); ++j) {
        auto [mj, lj] = partial_trace(joint, layout_SE, {layout_S.sites()[j].label});
        out.sys_site_out.emplace_back(std::move(mj), std::move(lj));
        auto [me, le] = partial_trace(joint, layout_SE, {layout_E.sites()[j].label});
        env_factors.push_back(me);
        out.env_site_out.emplace_back(std::move(me), std::move(le));
    }
    out.env_ref = DensityState(kron_all(env_factors), layout_E);
    return out;
}

std::vector<Spectral> local_spectra(const std::vector<DensityState>& locals) {
    std::vector<Spectral> out;
    for (const auto& st : locals) out.push_back(hermitian_eig(st.matrix));
    return out;
}

}  // namespace

Scenario run_scenario(DensityState rho_S, std::vector<DensityState> rho_E,
                      std::vector<UnitaryGate> gates) {
    Scenario sc;
    sc.num_sites = static_cast<int>(rho_S.layout.num_sites());
    if (sc.num_sites < 1) throw ArgumentError("run_scenario: system needs at least one site");
    if (rho_E.size() != static_cast<std::size_t>(sc.num_sites))
        throw ArgumentError("run_scenario: need one environment state per system site");
    if (gates.size() != static_cast<std::size_t>(sc.num_sites))
        throw ArgumentError("run_scenario: need one gate per site");

    sc.layout_S = rho_S.layout;
    std::vector<Site> env_sites;
    for (int j = 0; j < sc.num_sites; ++j) {
        if (rho_E[static_cast<std::size_t>(j)].layout.num_sites() != 1)
            throw ArgumentError("run_scenario: environment states must be single-site");
        const int edim = rho_E[static_cast<std::size_t>(j)].layout.sites()[0].dim;
        env_sites.push_back({"E" + std::to_string(j + 1), edim});
    }
    sc.layout_E = Layout(env_sites);
    sc.layout_SE = Layout::concat(sc.layout_S, sc.layout_E);

    // validate gates and collect their matrices in site order
    for (int j = 0; j < sc.num_sites; ++j) {
        const auto& g = gates[static_cast<std::size_t>(j)];
        const int dj = sc.layout_S.sites()[static_cast<std::size_t>(j)].dim;
        const int ej = sc.layout_E.sites()[static_cast<std::size_t>(j)].dim;
        const auto need = static_cast<Eigen::Index>(dj) * ej;
        if (g.matrix.rows() != need || g.matrix.cols() != need)
            throw ArgumentError("run_scenario: gate " + std::to_string(j) + " dim mismatch");
        if (!is_unitary(g.matrix))
            throw ValidationError("run_scenario: gate " + std::to_string(j) + " is not unitary");
        sc.gates.push_back(g.matrix);
    }

    // global unitary: kron in pair order (S1,E1,S2,E2,...), then permuted to
    // the canonical (system block, environment block) order
    std::vector<Site> pair_sites;
    for (int j = 0; j < sc.num_sites; ++j) {
        pair_sites.push_back(sc.layout_S.sites()[static_cast<std::size_t>(j)]);
        pair_sites.push_back(sc.layout_E.sites()[static_cast<std::size_t>(j)]);
    }
    const Layout pair_layout{pair_sites};
    std::vector<std::string> canonical_order;
    for (const auto& s : sc.layout_SE.sites()) canonical_order.push_back(s.label);
    auto [u_canon, lu] = permute_sites(kron_all(sc.gates), pair_layout, canonical_order);
    sc.u_global = std::move(u_canon);

    sc.rho_S = std::move(rho_S);
    sc.rho_E = std::move(rho_E);
    std::vector<CMatrix> env_factors;
    for (const auto& e : sc.rho_E) env_factors.push_back(e.matrix);
    const CMatrix rho_E_joint = kron_all(env_factors);

    // initial spectra
    sc.joint_in = hermitian_eig(sc.rho_S.matrix);
    std::vector<DensityState> sys_marginals;
    for (const auto& site : sc.layout_S.sites()) {
        auto [m, l] = partial_trace(sc.rho_S.matrix, sc.layout_S, {site.label});
        sys_marginals.emplace_back(std::move(m), std::move(l));
    }
    sc.site_in = local_spectra(sys_marginals);
    sc.env_in = local_spectra(sc.rho_E);

    // quantum pipeline
    auto q = evolve_and_reduce(sc.rho_S, rho_E_joint, sc.u_global, sc.layout_SE, sc.layout_S, sc.layout_E);
    sc.rho_SE_out = std::move(q.joint_out);
    sc.rho_S_out = std::move(q.sys_out);
    sc.rho_S_site_out = std::move(q.sys_site_out);
    sc.rho_E_site_out = std::move(q.env_site_out);
    sc.rho_E_ref = std::move(q.env_ref);
    sc.joint_out = hermitian_eig(sc.rho_S_out.matrix);
    sc.site_out = local_spectra(sc.rho_S_site_out);
    sc.env_out = local_spectra(sc.rho_E_site_out);

    // classical pipeline: dephase in the initial local eigenbases, then evolve
    sc.rho_S_deph = dephase(sc.rho_S, basis_columns(sc.site_in));
    auto c = evolve_and_reduce(sc.rho_S_deph, rho_E_joint, sc.u_global, sc.layout_SE, sc.layout_S, sc.layout_E);
    sc.rho_SE_out_cl = std::move(c.joint_out);
    sc.rho_S_out_cl = std::move(c.sys_out);
    sc.rho_S_site_out_cl = std::move(c.sys_site_out);
    sc.rho_E_site_out_cl = std::move(c.env_site_out);
    sc.rho_E_ref_cl = std::move(c.env_ref);
    sc.site_out_cl = local_spectra(sc.rho_S_site_out_cl);
    sc.env_out_cl = local_spectra(sc.rho_E_site_out_cl);

    // product-basis diagonals
    sc.diag_in = product_basis_diagonal(sc.rho_S.matrix, kron_all(basis_columns(sc.site_in)));
    sc.diag_out = product_basis_diagonal(sc.rho_S_out.matrix, kron_all(basis_columns(sc.site_out)));
    sc.diag_out_cl = product_basis_diagonal(sc.rho_S_out_cl.matrix, kron_all(basis_columns(sc.site_out_cl)));
    sc.env_diag_in = product_of_local_spectra(sc.env_in);
    sc.env_diag_out = product_of_local_spectra(sc.env_out);
    sc.env_diag_out_cl = product_of_local_spectra(sc.env_out_cl);
    return sc;
}

InfoSummary info_summary(const Scenario& sc) {
    InfoSummary s;
    s.mi_initial = total_mutual_information(sc.rho_S);
    s.mi_final = total_mutual_information(sc.rho_S_out);
    s.cl_initial = total_mutual_information(sc.rho_S_deph);
    s.cl_final = classical_correlation(sc.rho_S_out_cl);
    s.coh_initial = s.mi_initial - s.cl_initial;
    s.coh_final = coherence(sc.rho_S_out);
    s.mi_change = s.mi_initial - s.mi_final;
    s.cl_change = s.cl_initial - s.cl_final;
    s.coh_change = s.coh_initial - s.coh_final;
    return s;
}

}  // namespace ftlab
