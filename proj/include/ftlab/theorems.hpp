// theorems.hpp — integral and detailed fluctuation relations, moment checks,
// and per-instance verification reports

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "ftlab/traj.hpp"

namespace ftlab {

// The coherence relations require the evolved system marginals of the two
// pipelines to agree within this bound (completely dephasing dynamics).
inline constexpr double kDephasingTol = 1e-8;

struct Tolerances {
    double integral = 1e-8;      // |<e^{-x}> - 1|
    double expectation = 1e-8;   // |Re<x> - target|
    double imaginary = 1e-10;    // imaginary noise on analytically real aggregates
    double detailed = 1e-10;     // normalized cross-multiplied residuals
    double nonneg = 1e-10;       // slack on nonnegative correlation changes
    double moment_noise = 1e-12; // additive floor on the second-moment bound;
                                 // the cubic remainder vanishes faster than
                                 // summation noise on near-zero observables
};

using ObsFn = std::function<double(std::size_t)>;

// Observables as flat-index functions over the matching index space.
ObsFn make_obs_correlation_cl(const TrajectoryTables& t);  // over xi
ObsFn make_obs_correlation(const TrajectoryTables& t);     // over zeta
ObsFn make_obs_coherence(const TrajectoryTables& t);       // over zeta

// ----------------------------- integral relations ---------------------------

// Sum of dist * e^{-obs} with compensated summation. Indices whose weight
// modulus is below kWeightFloor are skipped; a vanishing probability inside
// the observable on a weighted index raises SupportViolation.
Complex integral_ft(const TrajectoryDistribution& dist, const ObsFn& obs, bool parallel = true);
Complex integral_ft(const QuasiDistribution& dist, const ObsFn& obs, bool parallel = true);

std::pair<Complex, bool> expectation_check(const TrajectoryDistribution& dist, const ObsFn& obs,
                                           double target, const Tolerances& tol = {});
std::pair<Complex, bool> expectation_check(const QuasiDistribution& dist, const ObsFn& obs,
                                           double target, const Tolerances& tol = {});

// ----------------------------- moment relations -----------------------------

struct MomentReport {
    Complex m1{0, 0};
    Complex m2{0, 0};
    double abs_third = 0.0;    // sum |dist| * |obs|^3
    double max_abs_obs = 0.0;  // over weighted indices
    // Third-order Taylor remainder bound on |m2 - 2 m1|.
    double remainder_bound() const { return std::exp(max_abs_obs) / 3.0 * abs_third; }
};

MomentReport moment_report(const TrajectoryDistribution& dist, const ObsFn& obs, bool parallel = true);
MomentReport moment_report(const QuasiDistribution& dist, const ObsFn& obs, bool parallel = true);

// ----------------------------- detailed relations ---------------------------

// Max cross-multiplied residual, normalized by the largest term magnitude
// encountered. Division-free; indices where both sides vanish are skipped.
double detailed_ft_classical(const Scenario& sc, bool parallel = true);
double detailed_ft_quantum(const Scenario& sc, bool parallel = true);
// Requires the completely dephasing condition; PreconditionError otherwise.
double detailed_ft_coherence(const Scenario& sc, bool parallel = true);

// ||rho'_S - rho'_S(dephased pipeline)||_max over the joint evolved system
// states. The per-site marginals of the two pipelines coincide identically
// for product dynamics, so the condition must be checked jointly.
double dephasing_deviation(const Scenario& sc);

// ----------------------------- instance reports -----------------------------

struct FTReport {
    std::string instance_id;
    InfoSummary info;
    Tolerances tol;

    Complex ift_cl{0, 0}, ift_q{0, 0}, ift_c{0, 0};
    Complex exp_cl{0, 0}, exp_q{0, 0}, exp_c{0, 0};
    Complex m2_cl{0, 0}, m2_q{0, 0}, m2_c{0, 0};
    double mom_bound_cl = 0, mom_bound_q = 0, mom_bound_c = 0;
    double detailed_cl = std::numeric_limits<double>::quiet_NaN();
    double detailed_q = std::numeric_limits<double>::quiet_NaN();
    double detailed_c = std::numeric_limits<double>::quiet_NaN();

    bool quasi_computed = false;
    bool detailed_computed = false;
    bool coherence_applicable = false;
    // Second-moment bound checks require every trajectory probability to be
    // strictly positive; the restricted moments of a rank-deficient instance
    // are not tied to the integral value by the Taylor argument.
    bool support_complete_cl = true;
    bool support_complete_q = true;
    double dephasing_gap = 0.0;
    std::vector<std::string> support_diagnostics;

    bool pass_ift_cl = false, pass_ift_q = false, pass_ift_c = false;
    bool pass_exp_cl = false, pass_exp_q = false, pass_exp_c = false;
    bool pass_m2_cl = false, pass_m2_q = false, pass_m2_c = false;
    bool pass_detailed_cl = false, pass_detailed_q = false, pass_detailed_c = false;
    bool pass_nonneg = false;

    bool all_pass() const;
    void recompute_flags();
};

struct AnalyzeOptions {
    bool compute_quasi = true;
    bool compute_detailed = true;
    bool parallel = true;
    Tolerances tol;
    std::string instance_id;
};

// Full verification of one scenario: entropy targets, integral and
// expectation checks for every applicable relation, moment bounds, and
// detailed residuals. Coherence relations are evaluated only when the
// dephasing condition holds.
FTReport analyze_scenario(const Scenario& sc, const AnalyzeOptions& opt);

}  // namespace ftlab
