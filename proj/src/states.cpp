#include "ftlab/states.hpp"

#include <Eigen/QR>

#include <cmath>

namespace ftlab {

void validate_density(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw ValidationError("density: matrix not square");
    if (!is_finite(m)) throw ValidationError("density: non-finite entries");
    if (!is_hermitian(m, tol)) throw ValidationError("density: not Hermitian within tolerance");
    if (std::abs(m.trace().real() - 1.0) > tol || std::abs(m.trace().imag()) > tol)
        throw ValidationError("density: trace differs from 1 by more than tolerance");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("density: eigensolver failed");
    if (solver.eigenvalues().minCoeff() < -tol)
        throw ValidationError("density: negative eigenvalue beyond tolerance");
}

DensityState::DensityState(CMatrix m, Layout l) : matrix(std::move(m)), layout(std::move(l)) {
    if (static_cast<std::size_t>(matrix.rows()) != layout.total_dim())
        throw ArgumentError("DensityState: matrix dim does not match layout");
    validate_density(matrix);
}

UnitaryGate::UnitaryGate(CMatrix m, std::string sys, std::string env)
    : matrix(std::move(m)), system_site(std::move(sys)), env_site(std::move(env)) {
    if (!is_finite(matrix)) throw ValidationError("UnitaryGate: non-finite entries");
    if (!is_unitary(matrix)) throw ValidationError("UnitaryGate: matrix is not unitary within tolerance");
}

Layout single_site_layout(int dim, const std::string& label) {
    return Layout({{label, dim}});
}

DensityState with_layout(DensityState state, Layout layout) {
    if (layout.total_dim() != static_cast<std::size_t>(state.matrix.rows()))
        throw ArgumentError("with_layout: layout dim does not match matrix");
    state.layout = std::move(layout);
    return state;
}

// ------------------------------ random draws --------------------------------

namespace {

CMatrix ginibre(int rows, int cols, SplitMix64& rng) {
    CMatrix g(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) g(r, c) = rng.next_complex_gaussian();
    return g;
}

}  // namespace

CMatrix random_unitary(int dim, SplitMix64& rng) {
    if (dim < 1) throw ArgumentError("random_unitary: dim must be >= 1");
    const CMatrix g = ginibre(dim, dim, rng);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < dim; ++c) {
        const Complex d = r(c, c);
        const double m = std::abs(d);
        q.col(c) *= (m > 0.0) ? d / m : Complex(1.0, 0.0);
    }
    return q;
}

DensityState random_density(int dim, int rank, SplitMix64& rng, double min_eig) {
    if (dim < 1) throw ArgumentError("random_density: dim must be >= 1");
    if (rank < 1 || rank > dim) throw ArgumentError("random_density: rank out of range [1, dim]");
    for (;;) {
        const CMatrix g = ginibre(dim, rank, rng);
        CMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        rho = Complex(0.5, 0.0) * (rho + CMatrix(rho.adjoint()));  // scrub rounding asymmetry
        if (rank == dim) {
            Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
            if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() < min_eig)
                continue;  // resample near-singular draws
        }
        return DensityState(std::move(rho), single_site_layout(dim));
    }
}

// ------------------------------ named fixtures ------------------------------

DensityState bell_state() {
    CVector v = CVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    CMatrix rho = v * v.adjoint();
    return DensityState(std::move(rho), Layout({{"A", 2}, {"B", 2}}));
}

DensityState ghz_state(int n) {
    if (n < 1) throw ArgumentError("ghz_state: need n >= 1 sites");
    const std::size_t dim = std::size_t{1} << n;
    if (dim > kMaxTotalDim) throw ArgumentError("ghz_state: dimension exceeds cap");
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v(0) = v(static_cast<Eigen::Index>(dim - 1)) = 1.0 / std::sqrt(2.0);
    CMatrix rho = v * v.adjoint();
    std::vector<Site> sites;
    for (int j = 0; j < n; ++j) sites.push_back({"S" + std::to_string(j + 1), 2});
    return DensityState(std::move(rho), Layout(std::move(sites)));
}

DensityState product_state(const std::vector<CMatrix>& site_states) {
    if (site_states.empty()) throw ArgumentError("product_state: empty factor list");
    std::vector<Site> sites;
    for (std::size_t j = 0; j < site_states.size(); ++j) {
        validate_density(site_states[j]);
        sites.push_back({"S" + std::to_string(j + 1), static_cast<int>(site_states[j].rows())});
    }
    return DensityState(kron_all(site_states), Layout(std::move(sites)));
}

CMatrix swap_matrix(int d) {
    if (d < 1) throw ArgumentError("swap_matrix: dim must be >= 1");
    const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
    CMatrix u = CMatrix::Zero(dd, dd);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) u(b * d + a, a * d + b) = 1.0;
    return u;
}

UnitaryGate swap_gate(int d, const std::string& system_site, const std::string& env_site) {
    return UnitaryGate(swap_matrix(d), system_site, env_site);
}

// ------------------------------- dephasing ----------------------------------

namespace {

void validate_basis(const CMatrix& b, int dim, std::size_t site) {
    if (b.rows() != dim || b.cols() != dim)
        throw ArgumentError("dephase: basis dim mismatch at site " + std::to_string(site));
    if (!is_unitary(b))
        throw ValidationError("dephase: basis at site " + std::to_string(site) + " is not orthonormal");
}

}  // namespace

DensityState dephase(const DensityState& rho, const std::vector<CMatrix>& site_bases) {
    const auto& sites = rho.layout.sites();
    if (site_bases.size() != sites.size())
        throw ArgumentError("dephase: need one basis per site");
    for (std::size_t j = 0; j < sites.size(); ++j) validate_basis(site_bases[j], sites[j].dim, j);

    const CMatrix b = kron_all(site_bases);
    CMatrix in_basis = b.adjoint() * rho.matrix * b;
    const CVector diag = in_basis.diagonal();
    in_basis.setZero();
    in_basis.diagonal() = diag;
    CMatrix out = b * in_basis * b.adjoint();
    out = Complex(0.5, 0.0) * (out + CMatrix(out.adjoint()));
    return DensityState(std::move(out), rho.layout);
}

std::vector<CMatrix> local_eigenbases(const DensityState& rho) {
    std::vector<CMatrix> bases;
    for (const auto& site : rho.layout.sites()) {
        auto [m, l] = partial_trace(rho.matrix, rho.layout, {site.label});
        bases.push_back(hermitian_eig(m).vectors);
    }
    return bases;
}

}  // namespace ftlab
