#include "ftlab/traj.hpp"

#include <cmath>
#include <limits>

namespace ftlab {

// ------------------------------ index spaces --------------------------------

std::size_t IndexSpace::total() const {
    std::size_t t = 1;
    for (auto d : dims) t *= d;
    return t;
}

void IndexSpace::decode(std::size_t flat, std::span<std::size_t> out) const {
    for (std::size_t i = dims.size(); i-- > 0;) {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

std::size_t IndexSpace::encode(std::span<const std::size_t> comps) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (comps[i] >= dims[i]) throw ArgumentError("IndexSpace::encode: component out of range");
        flat = flat * dims[i] + comps[i];
    }
    return flat;
}

IndexSpace xi_space(const Scenario& sc) {
    IndexSpace sp;
    sp.names = {"s", "n", "s_out", "n_out"};
    sp.dims = {sc.dim_S(), sc.dim_E(), sc.dim_S(), sc.dim_E()};
    sp.sys_dims = sc.sys_dims();
    sp.env_dims = sc.env_dims();
    return sp;
}

IndexSpace zeta_space(const Scenario& sc) {
    IndexSpace sp;
    sp.names = {"k", "s", "n", "k_out", "s_out", "n_out"};
    sp.dims = {sc.dim_S(), sc.dim_S(), sc.dim_E(), sc.dim_S(), sc.dim_S(), sc.dim_E()};
    sp.sys_dims = sc.sys_dims();
    sp.env_dims = sc.env_dims();
    return sp;
}

namespace {

std::vector<int> joint_digits(std::size_t joint, const std::vector<int>& dims) {
    std::vector<int> out(dims.size());
    for (std::size_t j = dims.size(); j-- > 0;) {
        out[j] = static_cast<int>(joint % static_cast<std::size_t>(dims[j]));
        joint /= static_cast<std::size_t>(dims[j]);
    }
    return out;
}

std::size_t joint_from_digits(const std::vector<int>& digits, const std::vector<int>& dims) {
    if (digits.size() != dims.size()) throw ArgumentError("trajectory index: per-site digit count mismatch");
    std::size_t joint = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        if (digits[j] < 0 || digits[j] >= dims[j]) throw ArgumentError("trajectory index: digit out of range");
        joint = joint * static_cast<std::size_t>(dims[j]) + static_cast<std::size_t>(digits[j]);
    }
    return joint;
}

}  // namespace

XiIndex decode_xi(const IndexSpace& space, std::size_t flat) {
    std::size_t comps[4];
    space.decode(flat, comps);
    XiIndex xi;
    xi.sys_in = joint_digits(comps[0], space.sys_dims);
    xi.env_in = joint_digits(comps[1], space.env_dims);
    xi.sys_out = joint_digits(comps[2], space.sys_dims);
    xi.env_out = joint_digits(comps[3], space.env_dims);
    return xi;
}

ZetaIndex decode_zeta(const IndexSpace& space, std::size_t flat) {
    std::size_t comps[6];
    space.decode(flat, comps);
    ZetaIndex z;
    z.joint_in = comps[0];
    z.xi.sys_in = joint_digits(comps[1], space.sys_dims);
    z.xi.env_in = joint_digits(comps[2], space.env_dims);
    z.joint_out = comps[3];
    z.xi.sys_out = joint_digits(comps[4], space.sys_dims);
    z.xi.env_out = joint_digits(comps[5], space.env_dims);
    return z;
}

std::size_t encode_xi(const IndexSpace& space, const XiIndex& xi) {
    const std::size_t comps[4] = {
        joint_from_digits(xi.sys_in, space.sys_dims), joint_from_digits(xi.env_in, space.env_dims),
        joint_from_digits(xi.sys_out, space.sys_dims), joint_from_digits(xi.env_out, space.env_dims)};
    return space.encode(comps);
}

std::size_t encode_zeta(const IndexSpace& space, const ZetaIndex& zeta) {
    const std::size_t comps[6] = {
        zeta.joint_in,
        joint_from_digits(zeta.xi.sys_in, space.sys_dims),
        joint_from_digits(zeta.xi.env_in, space.env_dims),
        zeta.joint_out,
        joint_from_digits(zeta.xi.sys_out, space.sys_dims),
        joint_from_digits(zeta.xi.env_out, space.env_dims)};
    return space.encode(comps);
}

double TrajectoryDistribution::sum() const {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

Complex QuasiDistribution::sum() const {
    CompensatedCSum acc;
    for (const auto& v : values) acc.add(v);
    return acc.value();
}

// ------------------------------ term tables ---------------------------------

namespace {

std::vector<double> as_prob_vector(const Spectral& sp) {
    const RVector v = clip_probabilities(sp.values);
    return {v.data(), v.data() + v.size()};
}

std::vector<double> log_of(const std::vector<double>& p) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = TrajectoryTables::safe_log(p[i]);
    return out;
}

std::vector<double> vec_of(const RVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TrajectoryTables::TrajectoryTables(const Scenario& sc, Pipeline pipeline) : pipeline_(pipeline) {
    num_sites_ = sc.num_sites;
    sys_dims_ = sc.sys_dims();
    env_dims_ = sc.env_dims();
    dim_S_ = sc.dim_S();
    dim_E_ = sc.dim_E();
    xi_space_ = xi_space(sc);
    zeta_space_ = zeta_space(sc);

    sys_digit_.assign(static_cast<std::size_t>(num_sites_), std::vector<int>(dim_S_));
    env_digit_.assign(static_cast<std::size_t>(num_sites_), std::vector<int>(dim_E_));
    for (std::size_t s = 0; s < dim_S_; ++s) {
        const auto d = joint_digits(s, sys_dims_);
        for (int j = 0; j < num_sites_; ++j) sys_digit_[static_cast<std::size_t>(j)][s] = d[static_cast<std::size_t>(j)];
    }
    for (std::size_t n = 0; n < dim_E_; ++n) {
        const auto d = joint_digits(n, env_dims_);
        for (int j = 0; j < num_sites_; ++j) env_digit_[static_cast<std::size_t>(j)][n] = d[static_cast<std::size_t>(j)];
    }

    const bool quantum = pipeline == Pipeline::quantum;
    const auto& site_out_spec = quantum ? sc.site_out : sc.site_out_cl;
    const auto& env_out_spec = quantum ? sc.env_out : sc.env_out_cl;

    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        site_prob_in_.push_back(clip_probabilities(sc.site_in[ju].values));
        site_prob_out_.push_back(clip_probabilities(site_out_spec[ju].values));
        env_prob_in_.push_back(clip_probabilities(sc.env_in[ju].values));
        env_prob_out_.push_back(clip_probabilities(env_out_spec[ju].values));

        const CMatrix in_basis = kron(sc.site_in[ju].vectors, sc.env_in[ju].vectors);
        const CMatrix out_basis = kron(site_out_spec[ju].vectors, env_out_spec[ju].vectors);
        CMatrix amp = out_basis.adjoint() * sc.gates[ju] * in_basis;
        site_amp2_.push_back(amp.cwiseAbs2());
        site_amp_.push_back(std::move(amp));
    }

    diag_in = vec_of(sc.diag_in);
    diag_out = quantum ? vec_of(sc.diag_out) : vec_of(sc.diag_out_cl);
    env_prod_in = vec_of(sc.env_diag_in);
    env_prod_out = quantum ? vec_of(sc.env_diag_out) : vec_of(sc.env_diag_out_cl);

    site_prod_in.assign(dim_S_, 1.0);
    site_prod_out.assign(dim_S_, 1.0);
    logsum_site_in.assign(dim_S_, 0.0);
    logsum_site_out.assign(dim_S_, 0.0);
    for (std::size_t s = 0; s < dim_S_; ++s) {
        for (int j = 0; j < num_sites_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            site_prod_in[s] *= site_prob_in_[ju](sys_digit_[ju][s]);
            site_prod_out[s] *= site_prob_out_[ju](sys_digit_[ju][s]);
        }
        logsum_site_in[s] = safe_log(site_prod_in[s]);
        logsum_site_out[s] = safe_log(site_prod_out[s]);
    }
    log_diag_in = log_of(diag_in);
    log_diag_out = log_of(diag_out);

    if (quantum) {
        joint_in_prob = as_prob_vector(sc.joint_in);
        joint_out_prob = as_prob_vector(sc.joint_out);
        log_joint_in = log_of(joint_in_prob);
        log_joint_out = log_of(joint_out_prob);

        std::vector<CMatrix> site_bases_in, site_bases_out, env_bases_in, env_bases_out;
        for (int j = 0; j < num_sites_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            site_bases_in.push_back(sc.site_in[ju].vectors);
            site_bases_out.push_back(site_out_spec[ju].vectors);
            env_bases_in.push_back(sc.env_in[ju].vectors);
            env_bases_out.push_back(env_out_spec[ju].vectors);
        }
        const CMatrix b_sys_in = kron_all(site_bases_in);
        const CMatrix b_sys_out = kron_all(site_bases_out);
        ovl_in_ = b_sys_in.adjoint() * sc.joint_in.vectors;    // (s, k) = <s|k>
        ovl_out_ = sc.joint_out.vectors.adjoint() * b_sys_out; // (k', s') = <k'|s'>

        const std::size_t full = dim_S_ * dim_E_;
        if (full > 4096)
            throw ArgumentError("TrajectoryTables: joint dimension " + std::to_string(full) +
                                " too large for dense quasiprobability tables");
        const CMatrix in_full = kron(sc.joint_in.vectors, kron_all(env_bases_in));
        const CMatrix out_full = kron(sc.joint_out.vectors, kron_all(env_bases_out));
        big_amp_ = out_full.adjoint() * sc.u_global * in_full;  // (k' n', k n) = <k' n'|U|k n>
    }
}

bool TrajectoryTables::full_support() const {
    const auto positive = [](const std::vector<double>& v) {
        for (double x : v)
            if (!(x > 0.0)) return false;
        return true;
    };
    bool ok = positive(diag_in) && positive(diag_out) && positive(site_prod_in) &&
              positive(site_prod_out) && positive(env_prod_in) && positive(env_prod_out);
    if (pipeline_ == Pipeline::quantum)
        ok = ok && positive(joint_in_prob) && positive(joint_out_prob);
    return ok;
}

double TrajectoryTables::local_forward(int j, int sj, int nj, int soj, int noj) const {
    const auto ju = static_cast<std::size_t>(j);
    const int e = env_dims_[ju];
    return site_prob_in_[ju](sj) * env_prob_in_[ju](nj) * site_amp2_[ju](soj * e + noj, sj * e + nj);
}

double TrajectoryTables::local_backward(int j, int sj, int nj, int soj, int noj) const {
    const auto ju = static_cast<std::size_t>(j);
    const int e = env_dims_[ju];
    return site_prob_out_[ju](soj) * env_prob_out_[ju](noj) * site_amp2_[ju](soj * e + noj, sj * e + nj);
}

double TrajectoryTables::forward_term(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const {
    double a2 = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        a2 *= site_amp2_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    return diag_in[s] * env_prod_in[n] * a2;
}

double TrajectoryTables::backward_term(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const {
    double a2 = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        a2 *= site_amp2_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    return diag_out[so] * env_prod_out[no] * a2;
}

double TrajectoryTables::prod_local_forward(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const {
    double p = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        p *= local_forward(j, sys_digit_[ju][s], env_digit_[ju][n], sys_digit_[ju][so], env_digit_[ju][no]);
    }
    return p;
}

double TrajectoryTables::prod_local_backward(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const {
    double p = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        p *= local_backward(j, sys_digit_[ju][s], env_digit_[ju][n], sys_digit_[ju][so], env_digit_[ju][no]);
    }
    return p;
}

Complex TrajectoryTables::quasi_forward_term(std::size_t k, std::size_t s, std::size_t n,
                                             std::size_t ko, std::size_t so, std::size_t no) const {
    if (pipeline_ != Pipeline::quantum)
        throw PreconditionError("quasi terms require quantum-pipeline tables");
    Complex amp = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        amp *= site_amp_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    const Complex back = std::conj(big_amp_(static_cast<Eigen::Index>(ko * dim_E_ + no),
                                            static_cast<Eigen::Index>(k * dim_E_ + n)));
    return joint_in_prob[k] * env_prod_in[n] * ovl_in_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) *
           ovl_out_(static_cast<Eigen::Index>(ko), static_cast<Eigen::Index>(so)) * amp * back;
}

Complex TrajectoryTables::quasi_backward_term(std::size_t k, std::size_t s, std::size_t n,
                                              std::size_t ko, std::size_t so, std::size_t no) const {
    if (pipeline_ != Pipeline::quantum)
        throw PreconditionError("quasi terms require quantum-pipeline tables");
    Complex amp = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        amp *= site_amp_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    const Complex back = std::conj(big_amp_(static_cast<Eigen::Index>(ko * dim_E_ + no),
                                            static_cast<Eigen::Index>(k * dim_E_ + n)));
    return joint_out_prob[ko] * env_prod_out[no] * ovl_in_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) *
           ovl_out_(static_cast<Eigen::Index>(ko), static_cast<Eigen::Index>(so)) * amp * back;
}

double TrajectoryTables::obs_correlation_cl(std::size_t s, std::size_t so) const {
    return (log_diag_in[s] - logsum_site_in[s]) - (log_diag_out[so] - logsum_site_out[so]);
}

double TrajectoryTables::obs_correlation(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const {
    return (log_joint_in[k] - logsum_site_in[s]) - (log_joint_out[ko] - logsum_site_out[so]);
}

double TrajectoryTables::obs_coherence(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const {
    return (log_joint_in[k] - log_diag_in[s]) - (log_joint_out[ko] - log_diag_out[so]);
}

double TrajectoryTables::exp_neg_obs_correlation_cl(std::size_t s, std::size_t so) const {
    return (site_prod_in[s] * diag_out[so]) / (diag_in[s] * site_prod_out[so]);
}

double TrajectoryTables::exp_neg_obs_correlation(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const {
    return (site_prod_in[s] * joint_out_prob[ko]) / (joint_in_prob[k] * site_prod_out[so]);
}

double TrajectoryTables::exp_neg_obs_coherence(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const {
    return (diag_in[s] * joint_out_prob[ko]) / (joint_in_prob[k] * diag_out[so]);
}

double TrajectoryTables::tilted_forward_cl(std::size_t s, std::size_t n, std::size_t so,
                                           std::size_t no, double& denom) const {
    double a2 = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        a2 *= site_amp2_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    denom = site_prod_out[so];
    return env_prod_in[n] * a2 * site_prod_in[s] * diag_out[so];
}

Complex TrajectoryTables::tilted_quasi_correlation(std::size_t k, std::size_t s, std::size_t n,
                                                   std::size_t ko, std::size_t so, std::size_t no,
                                                   double& denom) const {
    Complex amp = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        amp *= site_amp_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    const Complex back = std::conj(big_amp_(static_cast<Eigen::Index>(ko * dim_E_ + no),
                                            static_cast<Eigen::Index>(k * dim_E_ + n)));
    denom = site_prod_out[so];
    return env_prod_in[n] * site_prod_in[s] * joint_out_prob[ko] *
           ovl_in_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) *
           ovl_out_(static_cast<Eigen::Index>(ko), static_cast<Eigen::Index>(so)) * amp * back;
}

Complex TrajectoryTables::tilted_quasi_coherence(std::size_t k, std::size_t s, std::size_t n,
                                                 std::size_t ko, std::size_t so, std::size_t no,
                                                 double& denom) const {
    Complex amp = 1.0;
    for (int j = 0; j < num_sites_; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const int e = env_dims_[ju];
        amp *= site_amp_[ju](sys_digit_[ju][so] * e + env_digit_[ju][no],
                             sys_digit_[ju][s] * e + env_digit_[ju][n]);
    }
    const Complex back = std::conj(big_amp_(static_cast<Eigen::Index>(ko * dim_E_ + no),
                                            static_cast<Eigen::Index>(k * dim_E_ + n)));
    denom = diag_out[so];
    return env_prod_in[n] * diag_in[s] * joint_out_prob[ko] *
           ovl_in_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) *
           ovl_out_(static_cast<Eigen::Index>(ko), static_cast<Eigen::Index>(so)) * amp * back;
}

// ------------------------------ constructions -------------------------------

namespace {

// independent writes per block; deterministic for any thread count
template <class Body>
void parallel_fill(std::size_t total, Body&& body, bool parallel) {
#ifdef _OPENMP
    if (parallel && total > kSweepBlock) {
        const std::size_t num_blocks = (total + kSweepBlock - 1) / kSweepBlock;
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(num_blocks); ++b) {
            const std::size_t begin = static_cast<std::size_t>(b) * kSweepBlock;
            const std::size_t end = std::min(begin + kSweepBlock, total);
            for (std::size_t i = begin; i < end; ++i) body(i);
        }
        return;
    }
#endif
    (void)parallel;
    for (std::size_t i = 0; i < total; ++i) body(i);
}

struct XiDecoded {
    std::size_t s, n, so, no;
};

inline XiDecoded split_xi(std::size_t flat, std::size_t dS, std::size_t dE) {
    XiDecoded x{};
    x.no = flat % dE;
    flat /= dE;
    x.so = flat % dS;
    flat /= dS;
    x.n = flat % dE;
    flat /= dE;
    x.s = flat;
    return x;
}

struct ZetaDecoded {
    std::size_t k, s, n, ko, so, no;
};

inline ZetaDecoded split_zeta(std::size_t flat, std::size_t dS, std::size_t dE) {
    ZetaDecoded z{};
    z.no = flat % dE;
    flat /= dE;
    z.so = flat % dS;
    flat /= dS;
    z.ko = flat % dS;
    flat /= dS;
    z.n = flat % dE;
    flat /= dE;
    z.s = flat % dS;
    flat /= dS;
    z.k = flat;
    return z;
}

}  // namespace

TrajectoryDistribution forward_classical(const Scenario& sc, bool parallel) {
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::classical);
    TrajectoryDistribution dist{t.xi(), std::vector<double>(t.xi().total())};
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    parallel_fill(dist.values.size(), [&](std::size_t f) {
        const auto x = split_xi(f, dS, dE);
        dist.values[f] = t.forward_term(x.s, x.n, x.so, x.no);
    }, parallel);
    return dist;
}

TrajectoryDistribution backward_classical(const Scenario& sc, bool parallel) {
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::classical);
    TrajectoryDistribution dist{t.xi(), std::vector<double>(t.xi().total())};
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    parallel_fill(dist.values.size(), [&](std::size_t f) {
        const auto x = split_xi(f, dS, dE);
        dist.values[f] = t.backward_term(x.s, x.n, x.so, x.no);
    }, parallel);
    return dist;
}

QuasiDistribution forward_quasi(const Scenario& sc, bool parallel) {
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::quantum);
    QuasiDistribution dist{t.zeta(), std::vector<Complex>(t.zeta().total())};
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    parallel_fill(dist.values.size(), [&](std::size_t f) {
        const auto z = split_zeta(f, dS, dE);
        dist.values[f] = t.quasi_forward_term(z.k, z.s, z.n, z.ko, z.so, z.no);
    }, parallel);
    return dist;
}

QuasiDistribution backward_quasi(const Scenario& sc, bool parallel) {
    const TrajectoryTables t(sc, TrajectoryTables::Pipeline::quantum);
    QuasiDistribution dist{t.zeta(), std::vector<Complex>(t.zeta().total())};
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    parallel_fill(dist.values.size(), [&](std::size_t f) {
        const auto z = split_zeta(f, dS, dE);
        dist.values[f] = t.quasi_backward_term(z.k, z.s, z.n, z.ko, z.so, z.no);
    }, parallel);
    return dist;
}

TrajectoryDistribution marginal_local(const TrajectoryDistribution& dist, int site) {
    const auto& sp = dist.space;
    if (site < 0 || static_cast<std::size_t>(site) >= sp.sys_dims.size())
        throw ArgumentError("marginal_local: site out of range");
    if (sp.dims.size() != 4) throw ArgumentError("marginal_local: expected a two-point-measurement space");

    const auto ju = static_cast<std::size_t>(site);
    const int d = sp.sys_dims[ju];
    const int e = sp.env_dims[ju];

    IndexSpace local;
    local.names = sp.names;
    local.dims = {static_cast<std::size_t>(d), static_cast<std::size_t>(e),
                  static_cast<std::size_t>(d), static_cast<std::size_t>(e)};
    local.sys_dims = {d};
    local.env_dims = {e};

    // digit extractors for the joint components
    std::size_t sys_div = 1, env_div = 1;
    for (std::size_t j = sp.sys_dims.size(); j-- > ju + 1;) sys_div *= static_cast<std::size_t>(sp.sys_dims[j]);
    for (std::size_t j = sp.env_dims.size(); j-- > ju + 1;) env_div *= static_cast<std::size_t>(sp.env_dims[j]);

    std::vector<CompensatedSum> acc(local.total());
    const std::size_t dS = sp.dims[0], dE = sp.dims[1];
    for (std::size_t f = 0; f < dist.values.size(); ++f) {
        const auto x = split_xi(f, dS, dE);
        const std::size_t sj = (x.s / sys_div) % static_cast<std::size_t>(d);
        const std::size_t nj = (x.n / env_div) % static_cast<std::size_t>(e);
        const std::size_t soj = (x.so / sys_div) % static_cast<std::size_t>(d);
        const std::size_t noj = (x.no / env_div) % static_cast<std::size_t>(e);
        const std::size_t lf = ((sj * static_cast<std::size_t>(e) + nj) * static_cast<std::size_t>(d) + soj) *
                                   static_cast<std::size_t>(e) +
                               noj;
        acc[lf].add(dist.values[f]);
    }
    TrajectoryDistribution out{std::move(local), std::vector<double>(acc.size())};
    for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = acc[i].value();
    return out;
}

// ------------------------------ observables ---------------------------------

double delta_iota_cl(const XiIndex& xi, const TrajectoryTables& tables) {
    const std::size_t s = joint_from_digits(xi.sys_in, tables.xi().sys_dims);
    const std::size_t so = joint_from_digits(xi.sys_out, tables.xi().sys_dims);
    const double v = tables.obs_correlation_cl(s, so);
    if (!std::isfinite(v))
        throw SupportViolation("delta_iota_cl: zero probability on a supported index", s);
    return v;
}

double delta_iota(const ZetaIndex& zeta, const TrajectoryTables& tables) {
    const std::size_t s = joint_from_digits(zeta.xi.sys_in, tables.zeta().sys_dims);
    const std::size_t so = joint_from_digits(zeta.xi.sys_out, tables.zeta().sys_dims);
    const double v = tables.obs_correlation(zeta.joint_in, s, zeta.joint_out, so);
    if (!std::isfinite(v))
        throw SupportViolation("delta_iota: zero probability on a supported index", zeta.joint_in);
    return v;
}

double delta_c(const ZetaIndex& zeta, const TrajectoryTables& tables) {
    const std::size_t s = joint_from_digits(zeta.xi.sys_in, tables.zeta().sys_dims);
    const std::size_t so = joint_from_digits(zeta.xi.sys_out, tables.zeta().sys_dims);
    const double v = tables.obs_coherence(zeta.joint_in, s, zeta.joint_out, so);
    if (!std::isfinite(v))
        throw SupportViolation("delta_c: zero probability on a supported index", zeta.joint_in);
    return v;
}

}  // namespace ftlab
