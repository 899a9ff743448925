#include "ftlab/core.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <set>

namespace ftlab {

// --------------------------------- Layout -----------------------------------

Layout::Layout(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::set<std::string> seen;
    for (const auto& s : sites_) {
        if (s.dim < 1) throw ArgumentError("Layout: site '" + s.label + "' has non-positive dim");
        if (!seen.insert(s.label).second)
            throw ArgumentError("Layout: duplicate site label '" + s.label + "'");
        total_dim_ *= static_cast<std::size_t>(s.dim);
    }
}

bool Layout::has(const std::string& label) const {
    for (const auto& s : sites_)
        if (s.label == label) return true;
    return false;
}

std::size_t Layout::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < sites_.size(); ++i)
        if (sites_[i].label == label) return i;
    throw ArgumentError("Layout: unknown site label '" + label + "'");
}

int Layout::dim_of(const std::string& label) const {
    return sites_[index_of(label)].dim;
}

void Layout::decode(std::size_t flat, std::vector<int>& digits) const {
    digits.resize(sites_.size());
    for (std::size_t i = sites_.size(); i-- > 0;) {
        const auto d = static_cast<std::size_t>(sites_[i].dim);
        digits[i] = static_cast<int>(flat % d);
        flat /= d;
    }
}

std::size_t Layout::encode(const std::vector<int>& digits) const {
    if (digits.size() != sites_.size()) throw ArgumentError("Layout::encode: digit count mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        if (digits[i] < 0 || digits[i] >= sites_[i].dim)
            throw ArgumentError("Layout::encode: digit out of range at site '" + sites_[i].label + "'");
        flat = flat * static_cast<std::size_t>(sites_[i].dim) + static_cast<std::size_t>(digits[i]);
    }
    return flat;
}

Layout Layout::concat(const Layout& a, const Layout& b) {
    std::vector<Site> sites = a.sites();
    sites.insert(sites.end(), b.sites().begin(), b.sites().end());
    return Layout(std::move(sites));
}

// ---------------------------- validation helpers ----------------------------

double max_abs(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

bool is_finite(const CMatrix& a) {
    return a.allFinite();
}

bool is_hermitian(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return max_abs(a - a.adjoint()) <= tol;
}

bool is_unitary(const CMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const CMatrix g = a * a.adjoint();
    return max_abs(g - CMatrix::Identity(a.rows(), a.cols())) <= tol;
}

// ------------------------------- operations ---------------------------------

CMatrix kron(const CMatrix& a, const CMatrix& b, std::size_t max_total_dim) {
    if (!is_finite(a) || !is_finite(b)) throw ValidationError("kron: non-finite entries");
    const std::size_t rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
    const std::size_t cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
    if (rows > max_total_dim || cols > max_total_dim)
        throw ArgumentError("kron: composite dimension " + std::to_string(std::max(rows, cols)) +
                            " exceeds cap " + std::to_string(max_total_dim));
    return Eigen::kroneckerProduct(a, b);
}

CMatrix kron_all(const std::vector<CMatrix>& factors, std::size_t max_total_dim) {
    if (factors.empty()) throw ArgumentError("kron_all: empty factor list");
    CMatrix out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i], max_total_dim);
    return out;
}

namespace {

// Flat offsets contributed by one subset of sites; the full flat index is
// the sum of kept and traced offsets because the subsets occupy disjoint
// digit positions.
std::vector<std::size_t> subset_offsets(const Layout& layout, const std::vector<std::size_t>& members) {
    std::vector<std::size_t> strides(layout.num_sites());
    std::size_t acc = 1;
    for (std::size_t i = layout.num_sites(); i-- > 0;) {
        strides[i] = acc;
        acc *= static_cast<std::size_t>(layout.sites()[i].dim);
    }
    std::size_t count = 1;
    for (auto m : members) count *= static_cast<std::size_t>(layout.sites()[m].dim);
    std::vector<std::size_t> offsets(count, 0);
    std::size_t repeat = count;
    for (auto m : members) {
        const auto d = static_cast<std::size_t>(layout.sites()[m].dim);
        repeat /= d;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t digit = (i / repeat) % d;
            offsets[i] += digit * strides[m];
        }
    }
    return offsets;
}

}  // namespace

std::pair<CMatrix, Layout> partial_trace(const CMatrix& rho, const Layout& layout,
                                         const std::vector<std::string>& keep) {
    if (rho.rows() != rho.cols()) throw ArgumentError("partial_trace: matrix not square");
    if (static_cast<std::size_t>(rho.rows()) != layout.total_dim())
        throw ArgumentError("partial_trace: matrix dim does not match layout");

    std::set<std::string> keep_set(keep.begin(), keep.end());
    for (const auto& label : keep_set)
        if (!layout.has(label)) throw ArgumentError("partial_trace: unknown label '" + label + "'");

    std::vector<std::size_t> kept, traced;
    std::vector<Site> kept_sites;
    for (std::size_t i = 0; i < layout.num_sites(); ++i) {
        if (keep_set.count(layout.sites()[i].label)) {
            kept.push_back(i);
            kept_sites.push_back(layout.sites()[i]);
        } else {
            traced.push_back(i);
        }
    }

    const auto kept_off = subset_offsets(layout, kept);
    const auto traced_off = subset_offsets(layout, traced);
    const std::size_t dk = kept_off.size();

    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < dk; ++r)
        for (std::size_t c = 0; c < dk; ++c) {
            Complex sum = 0.0;
            for (const auto t : traced_off)
                sum += rho(static_cast<Eigen::Index>(kept_off[r] + t),
                           static_cast<Eigen::Index>(kept_off[c] + t));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sum;
        }
    return {std::move(out), Layout(std::move(kept_sites))};
}

std::pair<CMatrix, Layout> permute_sites(const CMatrix& op, const Layout& layout,
                                         const std::vector<std::string>& new_order) {
    if (op.rows() != op.cols()) throw ArgumentError("permute_sites: matrix not square");
    if (static_cast<std::size_t>(op.rows()) != layout.total_dim())
        throw ArgumentError("permute_sites: matrix dim does not match layout");
    if (new_order.size() != layout.num_sites())
        throw ArgumentError("permute_sites: new_order is not a permutation of the labels");
    std::set<std::string> seen;
    std::vector<std::size_t> position(new_order.size());  // old site index -> new position
    std::vector<Site> new_sites(new_order.size());
    for (std::size_t p = 0; p < new_order.size(); ++p) {
        if (!seen.insert(new_order[p]).second)
            throw ArgumentError("permute_sites: duplicate label in new_order");
        const std::size_t old = layout.index_of(new_order[p]);
        position[old] = p;
        new_sites[p] = layout.sites()[old];
    }
    const Layout new_layout(new_sites);

    // new strides indexed by old site position
    std::vector<std::size_t> new_stride(layout.num_sites());
    {
        std::vector<std::size_t> stride_at(new_sites.size());
        std::size_t acc = 1;
        for (std::size_t p = new_sites.size(); p-- > 0;) {
            stride_at[p] = acc;
            acc *= static_cast<std::size_t>(new_sites[p].dim);
        }
        for (std::size_t old = 0; old < layout.num_sites(); ++old)
            new_stride[old] = stride_at[position[old]];
    }

    const std::size_t dim = layout.total_dim();
    std::vector<std::size_t> map(dim);
    std::vector<int> digits;
    for (std::size_t f = 0; f < dim; ++f) {
        layout.decode(f, digits);
        std::size_t nf = 0;
        for (std::size_t old = 0; old < digits.size(); ++old)
            nf += static_cast<std::size_t>(digits[old]) * new_stride[old];
        map[f] = nf;
    }

    CMatrix out(op.rows(), op.cols());
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            out(static_cast<Eigen::Index>(map[r]), static_cast<Eigen::Index>(map[c])) =
                op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return {std::move(out), new_layout};
}

namespace {

// Phase convention: largest-magnitude component real positive.
void fix_phase(CMatrix& vectors, Eigen::Index col) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
        const double m = std::abs(vectors(i, col));
        if (m > best) {
            best = m;
            imax = i;
        }
    }
    if (best <= 0.0) return;
    const Complex z = vectors(imax, col);
    vectors.col(col) *= std::conj(z) / std::abs(z);
}

}  // namespace

Spectral hermitian_eig(const CMatrix& h, double deg_tol) {
    if (h.rows() != h.cols()) throw ArgumentError("hermitian_eig: matrix not square");
    if (!is_finite(h)) throw ValidationError("hermitian_eig: non-finite entries");
    if (!is_hermitian(h)) throw ValidationError("hermitian_eig: input is not Hermitian within tolerance");

    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericError("hermitian_eig: eigensolver failed to converge (dim " +
                           std::to_string(h.rows()) + ")");

    const Eigen::Index n = h.rows();
    Spectral out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {  // ascending -> descending
        out.values(i) = solver.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }

    // degeneracy groups: consecutive values chained by gap <= deg_tol
    for (Eigen::Index i = 0; i < n;) {
        std::vector<int> group{static_cast<int>(i)};
        Eigen::Index j = i + 1;
        while (j < n && out.values(j - 1) - out.values(j) <= deg_tol) {
            group.push_back(static_cast<int>(j));
            ++j;
        }
        out.degeneracy_groups.push_back(std::move(group));
        i = j;
    }

    // Deterministic basis inside each degenerate group: Gram-Schmidt of the
    // group projector applied to canonical basis vectors, in canonical order.
    for (const auto& group : out.degeneracy_groups) {
        if (group.size() < 2) continue;
        CMatrix vg(n, static_cast<Eigen::Index>(group.size()));
        for (std::size_t c = 0; c < group.size(); ++c) vg.col(static_cast<Eigen::Index>(c)) = out.vectors.col(group[c]);
        const CMatrix proj = vg * vg.adjoint();

        std::vector<CVector> basis;
        for (Eigen::Index e = 0; e < n && basis.size() < group.size(); ++e) {
            CVector w = proj.col(e);
            for (const auto& u : basis) w -= (u.dot(w)) * u;
            const double norm = w.norm();
            if (norm > 1e-8) basis.push_back(w / norm);
        }
        // rank-deficient projection onto canonical vectors: keep solver vectors
        for (std::size_t c = 0; basis.size() < group.size() && c < group.size(); ++c) {
            CVector w = vg.col(static_cast<Eigen::Index>(c));
            for (const auto& u : basis) w -= (u.dot(w)) * u;
            const double norm = w.norm();
            if (norm > 1e-8) basis.push_back(w / norm);
        }
        if (basis.size() != group.size())
            throw NumericError("hermitian_eig: failed to fix a degenerate eigenbasis");
        for (std::size_t c = 0; c < group.size(); ++c) out.vectors.col(group[c]) = basis[c];
    }

    for (Eigen::Index c = 0; c < n; ++c) fix_phase(out.vectors, c);
    return out;
}

RVector clip_probabilities(const RVector& values, double floor_tol) {
    RVector out = values;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out(i) < -floor_tol)
            throw ValidationError("clip_probabilities: eigenvalue " + std::to_string(out(i)) +
                                  " below -" + std::to_string(floor_tol));
        if (out(i) < 0.0) out(i) = 0.0;
    }
    return out;
}

}  // namespace ftlab
