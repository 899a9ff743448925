// states.hpp — density states, unitaries, random ensembles, dephasing

#pragma once

#include <string>
#include <vector>

#include "ftlab/core.hpp"
#include "ftlab/rng.hpp"

namespace ftlab {

// Density operator with its multipartite layout. Construction validates
// Hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
struct DensityState {
    CMatrix matrix;
    Layout layout;

    DensityState() = default;
    DensityState(CMatrix m, Layout l);
};

// Local interaction between one system site and one environment site,
// acting on the pair in (system, environment) order.
struct UnitaryGate {
    CMatrix matrix;
    std::string system_site;
    std::string env_site;

    UnitaryGate() = default;
    UnitaryGate(CMatrix m, std::string sys, std::string env);
};

void validate_density(const CMatrix& m, double tol = 1e-10);

// Single-site layout helper (label defaults to "A").
Layout single_site_layout(int dim, const std::string& label = "A");
DensityState with_layout(DensityState state, Layout layout);

// ------------------------------ random draws --------------------------------

// Haar-distributed unitary: QR of a complex Ginibre matrix with the
// R-diagonal phases absorbed into Q.
CMatrix random_unitary(int dim, SplitMix64& rng);

// G G^dag / Tr(G G^dag) with G a dim x rank complex Gaussian matrix.
// At rank = dim this is the Hilbert-Schmidt ensemble; draws whose smallest
// eigenvalue falls below min_eig are resampled so stochastic logs stay finite.
DensityState random_density(int dim, int rank, SplitMix64& rng, double min_eig = 1e-12);

// ------------------------------ named fixtures ------------------------------

DensityState bell_state();
DensityState ghz_state(int n);
DensityState product_state(const std::vector<CMatrix>& site_states);

// SWAP|a>|b> = |b>|a> on two d-dimensional sites.
CMatrix swap_matrix(int d);
UnitaryGate swap_gate(int d, const std::string& system_site, const std::string& env_site);

// ------------------------------- dephasing ----------------------------------

// Zero all off-diagonal entries in the product basis formed by the given
// per-site orthonormal bases (columns). Trace and single-site marginals in
// their own eigenbases are preserved.
DensityState dephase(const DensityState& rho, const std::vector<CMatrix>& site_bases);

// Eigenbasis of each single-site marginal, with the deterministic
// degenerate tie-break from hermitian_eig.
std::vector<CMatrix> local_eigenbases(const DensityState& rho);

}  // namespace ftlab
