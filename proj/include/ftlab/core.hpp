// core.hpp — dense complex linear algebra and multipartite index bookkeeping

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ftlab/errors.hpp"

namespace ftlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Composite dimensions above this cap are rejected by kron.
inline constexpr std::size_t kMaxTotalDim = std::size_t{1} << 20;
// Hermiticity / unitarity / orthonormality tolerance (max-abs norm).
inline constexpr double kHermTol = 1e-10;
// Eigenvalues closer than this are treated as one degenerate group.
inline constexpr double kDegTol = 1e-10;

struct Site {
    std::string label;
    int dim = 0;
};

// Ordered multipartite index structure. Flattening convention, fixed once
// for the whole library: the leftmost site is the slowest-varying index
// (row-major over site indices), matching the Kronecker product order.
class Layout {
public:
    Layout() = default;
    explicit Layout(std::vector<Site> sites);

    const std::vector<Site>& sites() const { return sites_; }
    std::size_t num_sites() const { return sites_.size(); }
    std::size_t total_dim() const { return total_dim_; }

    bool has(const std::string& label) const;
    std::size_t index_of(const std::string& label) const;  // ArgumentError if unknown
    int dim_of(const std::string& label) const;

    void decode(std::size_t flat, std::vector<int>& digits) const;
    std::size_t encode(const std::vector<int>& digits) const;

    static Layout concat(const Layout& a, const Layout& b);

private:
    std::vector<Site> sites_;
    std::size_t total_dim_ = 1;
};

// Eigen-pairs of a Hermitian operator, sorted by descending value.
// Within each degeneracy group the basis is fixed deterministically:
// Gram-Schmidt on the group projector applied to canonical basis vectors,
// then a global phase making the largest-magnitude component real positive.
struct Spectral {
    RVector values;    // descending
    CMatrix vectors;   // orthonormal columns, same order as values
    std::vector<std::vector<int>> degeneracy_groups;
};

// ---------------------------- validation helpers ----------------------------

double max_abs(const CMatrix& a);
bool is_finite(const CMatrix& a);
bool is_hermitian(const CMatrix& a, double tol = kHermTol);
bool is_unitary(const CMatrix& a, double tol = kHermTol);

// ------------------------------- operations ---------------------------------

// Tensor product consistent with the Layout flattening convention.
CMatrix kron(const CMatrix& a, const CMatrix& b, std::size_t max_total_dim = kMaxTotalDim);

// Tensor product of a list, left to right.
CMatrix kron_all(const std::vector<CMatrix>& factors, std::size_t max_total_dim = kMaxTotalDim);

// Reduce to the kept sites (original relative order preserved).
std::pair<CMatrix, Layout> partial_trace(const CMatrix& rho, const Layout& layout,
                                         const std::vector<std::string>& keep);

// Reorder sites; conjugation by the basis permutation, spectrum unchanged.
std::pair<CMatrix, Layout> permute_sites(const CMatrix& op, const Layout& layout,
                                         const std::vector<std::string>& new_order);

Spectral hermitian_eig(const CMatrix& h, double deg_tol = kDegTol);

// For spectra of density operators: values in [-floor_tol, 0) clip to 0,
// anything more negative is a genuine positivity violation.
RVector clip_probabilities(const RVector& values, double floor_tol = 1e-10);

}  // namespace ftlab
