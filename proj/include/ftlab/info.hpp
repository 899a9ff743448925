// info.hpp — entropies, correlation measures, and the scenario pipeline

#pragma once

#include <vector>

#include "ftlab/states.hpp"

namespace ftlab {

// Everything derived from one (rho_S, rho_E, gates) instance: evolved and
// reduced states, spectral bases, and product-basis diagonal distributions,
// for the quantum pipeline (from rho_S) and the classical pipeline (from
// the dephased initial state). All fields are immutable after construction
// and safe to share across threads.
struct Scenario {
    int num_sites = 0;
    Layout layout_S, layout_E, layout_SE;  // canonical order: system block, then environment block

    // inputs
    DensityState rho_S;
    std::vector<DensityState> rho_E;  // one per site
    std::vector<CMatrix> gates;       // gate j acts on (S_j, E_j) in pair order
    CMatrix u_global;                 // gates embedded into the canonical layout

    // quantum pipeline
    DensityState rho_SE_out;
    DensityState rho_S_out;
    std::vector<DensityState> rho_S_site_out, rho_E_site_out;
    DensityState rho_E_ref;  // product of evolved subenvironment marginals

    // classical pipeline (initial system state dephased in its local eigenbases)
    DensityState rho_S_deph;
    DensityState rho_SE_out_cl;
    DensityState rho_S_out_cl;
    std::vector<DensityState> rho_S_site_out_cl, rho_E_site_out_cl;
    DensityState rho_E_ref_cl;

    // spectra (probabilities clipped to [0, 1])
    Spectral joint_in;                       // of rho_S
    std::vector<Spectral> site_in, env_in;   // of the initial local marginals
    Spectral joint_out;                      // of rho_S_out
    std::vector<Spectral> site_out, env_out; // evolved local marginals, quantum pipeline
    std::vector<Spectral> site_out_cl, env_out_cl;  // evolved local marginals, classical pipeline

    // diagonals of the system states in the product local eigenbases
    RVector diag_in;       // <s|rho_S|s>
    RVector diag_out;      // <s'|rho_S_out|s'>
    RVector diag_out_cl;   // of rho_S_out_cl in the classical-pipeline final bases

    // joint environment distributions (products of local spectra)
    RVector env_diag_in, env_diag_out, env_diag_out_cl;

    std::size_t dim_S() const { return layout_S.total_dim(); }
    std::size_t dim_E() const { return layout_E.total_dim(); }
    std::vector<int> sys_dims() const;
    std::vector<int> env_dims() const;
};

// Correlation audit of one instance, all values in nats. Each change is
// initial minus final by construction. The final classical correlation is
// measured on the classical pipeline (after an additional dephasing of the
// evolved state), the final coherence on the quantum pipeline.
struct InfoSummary {
    double mi_initial = 0, mi_final = 0;
    double cl_initial = 0, cl_final = 0;
    double coh_initial = 0, coh_final = 0;
    double mi_change = 0, cl_change = 0, coh_change = 0;
};

// ------------------------------- measures -----------------------------------

// -Tr(rho ln rho) in nats, with 0 ln 0 := 0.
double von_neumann_entropy(const DensityState& rho);

// Sum of single-site entropies minus the joint entropy.
double total_mutual_information(const DensityState& rho);

// Mutual information of the state dephased in its own local eigenbases.
double classical_correlation(const DensityState& rho);

// Total minus classical correlation; equals S(dephased) - S(rho).
double coherence(const DensityState& rho);

// ------------------------------- pipeline -----------------------------------

Scenario run_scenario(DensityState rho_S, std::vector<DensityState> rho_E,
                      std::vector<UnitaryGate> gates);

InfoSummary info_summary(const Scenario& sc);

}  // namespace ftlab
