// traj.hpp — trajectory index spaces, (quasi)probability distributions, and
// the per-index stochastic observables
//
// Index conventions, fixed across the library:
//   xi   = (s, n, s_out, n_out)            for two-point-measurement records
//   zeta = (k, s, n, k_out, s_out, n_out)  for quasiprobability records
// where s/n are joint indices over the per-site initial local eigenbases,
// s_out/n_out over the final local eigenbases, and k/k_out index the joint
// eigenbases of the initial/final system states. Flat enumeration is
// lexicographic with the leftmost component slowest.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ftlab/info.hpp"
#include "ftlab/sweep.hpp"

namespace ftlab {

// Weights with modulus below this floor are treated as exact zeros when
// evaluating observables (0 * anything = 0).
inline constexpr double kWeightFloor = 1e-14;
// A probability below this floor inside a logarithm on a supported index
// is a support violation.
inline constexpr double kSupportFloor = 1e-300;

// ------------------------------ index spaces --------------------------------

struct IndexSpace {
    std::vector<std::string> names;    // component names, slowest first
    std::vector<std::size_t> dims;     // joint extent per component
    std::vector<int> sys_dims, env_dims;  // per-site structure of the scenario

    std::size_t total() const;
    void decode(std::size_t flat, std::span<std::size_t> out) const;
    std::size_t encode(std::span<const std::size_t> comps) const;
};

IndexSpace xi_space(const Scenario& sc);
IndexSpace zeta_space(const Scenario& sc);

// Structured views of one trajectory index (per-site outcome digits).
struct XiIndex {
    std::vector<int> sys_in, env_in, sys_out, env_out;
};
struct ZetaIndex {
    std::size_t joint_in = 0;
    XiIndex xi;
    std::size_t joint_out = 0;
};

XiIndex decode_xi(const IndexSpace& space, std::size_t flat);
ZetaIndex decode_zeta(const IndexSpace& space, std::size_t flat);
std::size_t encode_xi(const IndexSpace& space, const XiIndex& xi);
std::size_t encode_zeta(const IndexSpace& space, const ZetaIndex& zeta);

// ------------------------------ distributions -------------------------------

struct TrajectoryDistribution {
    IndexSpace space;
    std::vector<double> values;
    double sum() const;
};

struct QuasiDistribution {
    IndexSpace space;
    std::vector<Complex> values;
    Complex sum() const;
};

// ------------------------------ term tables ---------------------------------

// Per-scenario amplitude and probability tables. Each distribution entry is a
// product of O(N) scalar lookups instead of a global trace. The classical
// variant uses the classical-pipeline final bases; the quantum variant uses
// the quantum-pipeline final bases plus the joint-eigenbasis overlap tables.
class TrajectoryTables {
public:
    enum class Pipeline { classical, quantum };

    TrajectoryTables(const Scenario& sc, Pipeline pipeline);

    Pipeline pipeline() const { return pipeline_; }
    int num_sites() const { return num_sites_; }
    std::size_t dim_S() const { return dim_S_; }
    std::size_t dim_E() const { return dim_E_; }
    const IndexSpace& xi() const { return xi_space_; }
    const IndexSpace& zeta() const { return zeta_space_; }

    // two-point-measurement terms over xi
    double forward_term(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const;
    double backward_term(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const;

    // per-site local terms and their products over all sites
    double local_forward(int j, int sj, int nj, int soj, int noj) const;
    double local_backward(int j, int sj, int nj, int soj, int noj) const;
    double prod_local_forward(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const;
    double prod_local_backward(std::size_t s, std::size_t n, std::size_t so, std::size_t no) const;

    // quasiprobability terms over zeta (quantum pipeline only)
    Complex quasi_forward_term(std::size_t k, std::size_t s, std::size_t n,
                               std::size_t ko, std::size_t so, std::size_t no) const;
    Complex quasi_backward_term(std::size_t k, std::size_t s, std::size_t n,
                                std::size_t ko, std::size_t so, std::size_t no) const;

    // stochastic observables (may return +-inf when a probability vanishes;
    // callers decide between skip and support violation based on the weight)
    double obs_correlation_cl(std::size_t s, std::size_t so) const;       // over xi
    double obs_correlation(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const;  // over zeta
    double obs_coherence(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const;    // over zeta

    // exact e^{-obs} ratios (no exp/log round trip)
    double exp_neg_obs_correlation_cl(std::size_t s, std::size_t so) const;
    double exp_neg_obs_correlation(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const;
    double exp_neg_obs_coherence(std::size_t k, std::size_t s, std::size_t ko, std::size_t so) const;

    // weight * e^{-obs} with the initial-state probability cancelled
    // analytically, so the product stays finite on rank-deficient inputs.
    // The remaining denominator is a final-state probability; denom receives
    // it so callers can distinguish a genuine support violation (numerator
    // above the weight floor with vanishing denominator) from measure zero.
    double tilted_forward_cl(std::size_t s, std::size_t n, std::size_t so, std::size_t no,
                             double& denom) const;
    Complex tilted_quasi_correlation(std::size_t k, std::size_t s, std::size_t n, std::size_t ko,
                                     std::size_t so, std::size_t no, double& denom) const;
    Complex tilted_quasi_coherence(std::size_t k, std::size_t s, std::size_t n, std::size_t ko,
                                   std::size_t so, std::size_t no, double& denom) const;

    int sys_digit(std::size_t joint, int j) const { return sys_digit_[static_cast<std::size_t>(j)][joint]; }
    int env_digit(std::size_t joint, int j) const { return env_digit_[static_cast<std::size_t>(j)][joint]; }

    // True when every probability entering a logarithm is strictly positive,
    // i.e. the trajectory space has no measure-zero indices.
    bool full_support() const;

    // probability tables (exposed for aggregate kernels and tests)
    std::vector<double> joint_in_prob, joint_out_prob;   // quantum only: p(k), p(k')
    std::vector<double> diag_in, diag_out;               // product-basis diagonals
    std::vector<double> env_prod_in, env_prod_out;       // products of local env spectra
    std::vector<double> site_prod_in, site_prod_out;     // products of local system spectra
    std::vector<double> log_joint_in, log_joint_out;
    std::vector<double> log_diag_in, log_diag_out;
    std::vector<double> logsum_site_in, logsum_site_out;

    // tie-broken eigenbases can be rebuilt by tests after modifying a Scenario
    static double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

private:
    Pipeline pipeline_;
    int num_sites_ = 0;
    std::size_t dim_S_ = 1, dim_E_ = 1;
    std::vector<int> sys_dims_, env_dims_;
    IndexSpace xi_space_, zeta_space_;

    std::vector<std::vector<int>> sys_digit_, env_digit_;  // [site][joint index]
    std::vector<Eigen::VectorXd> site_prob_in_, site_prob_out_, env_prob_in_, env_prob_out_;
    std::vector<CMatrix> site_amp_;          // [j](out_pair, in_pair) = <s'_j n'_j|U_j|s_j n_j>
    std::vector<Eigen::MatrixXd> site_amp2_; // squared moduli
    CMatrix ovl_in_, ovl_out_;               // <s|k>, <k'|s'>
    CMatrix big_amp_;                        // <k' n'|U|k n> over (joint, env-product) bases
};

// ------------------------------ constructions -------------------------------

TrajectoryDistribution forward_classical(const Scenario& sc, bool parallel = true);
TrajectoryDistribution backward_classical(const Scenario& sc, bool parallel = true);
QuasiDistribution forward_quasi(const Scenario& sc, bool parallel = true);
QuasiDistribution backward_quasi(const Scenario& sc, bool parallel = true);

// Exact marginal over all components unrelated to site j.
TrajectoryDistribution marginal_local(const TrajectoryDistribution& dist, int site);

// ------------------------------ observables ---------------------------------

double delta_iota_cl(const XiIndex& xi, const TrajectoryTables& tables);
double delta_iota(const ZetaIndex& zeta, const TrajectoryTables& tables);
double delta_c(const ZetaIndex& zeta, const TrajectoryTables& tables);

}  // namespace ftlab
