#include "ftlab/theorems.hpp"

#include <cmath>

namespace ftlab {

namespace {

constexpr std::size_t kNoViolation = static_cast<std::size_t>(-1);

struct XiParts {
    std::size_t s, n, so, no;
};

inline XiParts split_xi(std::size_t flat, std::size_t dS, std::size_t dE) {
    XiParts x{};
    x.no = flat % dE;
    flat /= dE;
    x.so = flat % dS;
    flat /= dS;
    x.n = flat % dE;
    flat /= dE;
    x.s = flat;
    return x;
}

struct ZetaParts {
    std::size_t k, s, n, ko, so, no;
};

inline ZetaParts split_zeta(std::size_t flat, std::size_t dS, std::size_t dE) {
    ZetaParts z{};
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

void merge_violation(std::size_t& mine, std::size_t other) {
    if (other < mine) mine = other;
}

[[noreturn]] void raise_support(const char* where, std::size_t index) {
    throw SupportViolation(std::string(where) + ": zero probability on an index with nonzero weight", index);
}

// Tiered term gating. Structural zeros are skipped outright; weights below
// the noise floor are skipped only when the observable is undefined there
// (measure-zero indices); an undefined observable under a live weight is a
// support violation.
enum class Gate { accumulate, skip, violation };

inline Gate gate_weight_obs(double weight_mod, double obs) {
    if (weight_mod < kSupportFloor) return Gate::skip;
    if (!std::isfinite(obs)) return weight_mod < kWeightFloor ? Gate::skip : Gate::violation;
    return Gate::accumulate;
}

inline Gate gate_tilted(double num_mod, double denom) {
    if (num_mod < kSupportFloor) return Gate::skip;
    if (denom < kSupportFloor) return num_mod < kWeightFloor ? Gate::skip : Gate::violation;
    return Gate::accumulate;
}

}  // namespace

// ------------------------------- observables ---------------------------------

ObsFn make_obs_correlation_cl(const TrajectoryTables& t) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    return [&t, dS, dE](std::size_t flat) {
        const auto x = split_xi(flat, dS, dE);
        return t.obs_correlation_cl(x.s, x.so);
    };
}

ObsFn make_obs_correlation(const TrajectoryTables& t) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    return [&t, dS, dE](std::size_t flat) {
        const auto z = split_zeta(flat, dS, dE);
        return t.obs_correlation(z.k, z.s, z.ko, z.so);
    };
}

ObsFn make_obs_coherence(const TrajectoryTables& t) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    return [&t, dS, dE](std::size_t flat) {
        const auto z = split_zeta(flat, dS, dE);
        return t.obs_coherence(z.k, z.s, z.ko, z.so);
    };
}

// ----------------------------- integral relations ---------------------------

namespace {

struct CAcc {
    CompensatedCSum sum;
    std::size_t violation = kNoViolation;
    void merge(const CAcc& o) {
        sum.merge(o.sum);
        merge_violation(violation, o.violation);
    }
};

template <class Values>
Complex weighted_exp_sum(const Values& values, const ObsFn& obs, bool parallel) {
    const auto acc = blocked_sweep(values.size(), CAcc{}, [&](std::size_t b, std::size_t e, CAcc& a) {
        for (std::size_t f = b; f < e; ++f) {
            const Complex w = values[f];
            const double x = obs(f);
            switch (gate_weight_obs(std::abs(w), x)) {
                case Gate::skip: continue;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: a.sum.add(w * std::exp(-x));
            }
        }
    }, parallel);
    if (acc.violation != kNoViolation) raise_support("integral_ft", acc.violation);
    return acc.sum.value();
}

template <class Values>
Complex weighted_obs_sum(const Values& values, const ObsFn& obs, bool parallel) {
    const auto acc = blocked_sweep(values.size(), CAcc{}, [&](std::size_t b, std::size_t e, CAcc& a) {
        for (std::size_t f = b; f < e; ++f) {
            const Complex w = values[f];
            const double x = obs(f);
            switch (gate_weight_obs(std::abs(w), x)) {
                case Gate::skip: continue;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: a.sum.add(w * x);
            }
        }
    }, parallel);
    if (acc.violation != kNoViolation) raise_support("expectation", acc.violation);
    return acc.sum.value();
}

struct MomentAcc {
    CompensatedCSum m1, m2;
    CompensatedSum abs3;
    double max_abs_obs = 0.0;
    std::size_t violation = kNoViolation;
    void merge(const MomentAcc& o) {
        m1.merge(o.m1);
        m2.merge(o.m2);
        abs3.merge(o.abs3);
        max_abs_obs = std::max(max_abs_obs, o.max_abs_obs);
        merge_violation(violation, o.violation);
    }
};

template <class Values>
MomentReport moments_of(const Values& values, const ObsFn& obs, bool parallel) {
    const auto acc = blocked_sweep(values.size(), MomentAcc{}, [&](std::size_t b, std::size_t e, MomentAcc& a) {
        for (std::size_t f = b; f < e; ++f) {
            const Complex w = values[f];
            const double wm = std::abs(w);
            const double x = obs(f);
            switch (gate_weight_obs(wm, x)) {
                case Gate::skip: continue;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: break;
            }
            a.m1.add(w * x);
            a.m2.add(w * x * x);
            a.abs3.add(wm * std::abs(x * x * x));
            a.max_abs_obs = std::max(a.max_abs_obs, std::abs(x));
        }
    }, parallel);
    if (acc.violation != kNoViolation) raise_support("moment_report", acc.violation);
    MomentReport rep;
    rep.m1 = acc.m1.value();
    rep.m2 = acc.m2.value();
    rep.abs_third = acc.abs3.value();
    rep.max_abs_obs = acc.max_abs_obs;
    return rep;
}

}  // namespace

Complex integral_ft(const TrajectoryDistribution& dist, const ObsFn& obs, bool parallel) {
    return weighted_exp_sum(dist.values, obs, parallel);
}

Complex integral_ft(const QuasiDistribution& dist, const ObsFn& obs, bool parallel) {
    return weighted_exp_sum(dist.values, obs, parallel);
}

namespace {

bool expectation_pass(Complex value, double target, const Tolerances& tol) {
    return std::abs(value.real() - target) <= tol.expectation && std::abs(value.imag()) <= tol.imaginary;
}

}  // namespace

std::pair<Complex, bool> expectation_check(const TrajectoryDistribution& dist, const ObsFn& obs,
                                           double target, const Tolerances& tol) {
    const Complex v = weighted_obs_sum(dist.values, obs, true);
    return {v, expectation_pass(v, target, tol)};
}

std::pair<Complex, bool> expectation_check(const QuasiDistribution& dist, const ObsFn& obs,
                                           double target, const Tolerances& tol) {
    const Complex v = weighted_obs_sum(dist.values, obs, true);
    return {v, expectation_pass(v, target, tol)};
}

MomentReport moment_report(const TrajectoryDistribution& dist, const ObsFn& obs, bool parallel) {
    return moments_of(dist.values, obs, parallel);
}

MomentReport moment_report(const QuasiDistribution& dist, const ObsFn& obs, bool parallel) {
    return moments_of(dist.values, obs, parallel);
}

// ----------------------------- detailed relations ---------------------------

namespace {

struct ResidualAcc {
    double max_residual = 0.0;
    double max_term = 0.0;
    std::size_t violation = kNoViolation;
    void merge(const ResidualAcc& o) {
        max_residual = std::max(max_residual, o.max_residual);
        max_term = std::max(max_term, o.max_term);
        merge_violation(violation, o.violation);
    }
    void record(Complex lhs, Complex rhs) {
        max_residual = std::max(max_residual, std::abs(lhs - rhs));
        max_term = std::max(max_term, std::max(std::abs(lhs), std::abs(rhs)));
    }
    double normalized(const char* where) const {
        if (violation != kNoViolation) raise_support(where, violation);
        return max_term > 0.0 ? max_residual / max_term : 0.0;
    }
};

// numerator * e^{-obs} in analytically cancelled form: num already carries
// every factor except the final-state probability in denom.
template <class Num>
bool tilted_value(Num num, double denom, std::size_t flat, Complex& out, ResidualAcc& acc) {
    switch (gate_tilted(std::abs(num), denom)) {
        case Gate::skip:
            out = 0.0;
            return true;
        case Gate::violation:
            merge_violation(acc.violation, flat);
            return false;
        case Gate::accumulate:
            break;
    }
    out = Complex(num) / denom;
    return true;
}

double residual_classical(const TrajectoryTables& t, bool parallel) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    const std::size_t total = t.xi().total();
    const auto acc = blocked_sweep(total, ResidualAcc{}, [&](std::size_t b, std::size_t e, ResidualAcc& a) {
        for (std::size_t f = b; f < e; ++f) {
            const auto x = split_xi(f, dS, dE);
            double denom = 0.0;
            const double num = t.tilted_forward_cl(x.s, x.n, x.so, x.no, denom) *
                               t.prod_local_backward(x.s, x.n, x.so, x.no);
            const double bw = t.backward_term(x.s, x.n, x.so, x.no) * t.prod_local_forward(x.s, x.n, x.so, x.no);
            Complex lhs;
            if (!tilted_value(num, denom, f, lhs, a)) return;
            a.record(lhs, bw);
        }
    }, parallel);
    return acc.normalized("detailed_ft_classical");
}

double residual_quantum(const TrajectoryTables& t, bool parallel) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    const std::size_t total = t.zeta().total();
    const auto acc = blocked_sweep(total, ResidualAcc{}, [&](std::size_t b, std::size_t e, ResidualAcc& a) {
        for (std::size_t f = b; f < e; ++f) {
            const auto z = split_zeta(f, dS, dE);
            double denom = 0.0;
            const Complex num = t.tilted_quasi_correlation(z.k, z.s, z.n, z.ko, z.so, z.no, denom) *
                                t.prod_local_backward(z.s, z.n, z.so, z.no);
            const Complex bw = t.quasi_backward_term(z.k, z.s, z.n, z.ko, z.so, z.no) *
                               t.prod_local_forward(z.s, z.n, z.so, z.no);
            Complex lhs;
            if (!tilted_value(num, denom, f, lhs, a)) return;
            a.record(lhs, bw);
        }
    }, parallel);
    return acc.normalized("detailed_ft_quantum");
}

double residual_coherence(const TrajectoryTables& t, bool parallel) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    const std::size_t total = t.zeta().total();
    const auto acc = blocked_sweep(total, ResidualAcc{}, [&](std::size_t b, std::size_t e, ResidualAcc& a) {
        for (std::size_t f = b; f < e; ++f) {
            const auto z = split_zeta(f, dS, dE);
            double denom = 0.0;
            const Complex num = t.tilted_quasi_coherence(z.k, z.s, z.n, z.ko, z.so, z.no, denom) *
                                t.backward_term(z.s, z.n, z.so, z.no);
            const Complex bw = t.quasi_backward_term(z.k, z.s, z.n, z.ko, z.so, z.no) *
                               t.forward_term(z.s, z.n, z.so, z.no);
            Complex lhs;
            if (!tilted_value(num, denom, f, lhs, a)) return;
            a.record(lhs, bw);
        }
    }, parallel);
    return acc.normalized("detailed_ft_coherence");
}

}  // namespace

double dephasing_deviation(const Scenario& sc) {
    return max_abs(sc.rho_S_out.matrix - sc.rho_S_out_cl.matrix);
}

double detailed_ft_classical(const Scenario& sc, bool parallel) {
    return residual_classical(TrajectoryTables(sc, TrajectoryTables::Pipeline::classical), parallel);
}

double detailed_ft_quantum(const Scenario& sc, bool parallel) {
    return residual_quantum(TrajectoryTables(sc, TrajectoryTables::Pipeline::quantum), parallel);
}

double detailed_ft_coherence(const Scenario& sc, bool parallel) {
    const double gap = dephasing_deviation(sc);
    if (gap > kDephasingTol)
        throw PreconditionError(
            "detailed_ft_coherence: dynamics is not completely dephasing; evolved system states of "
            "the two pipelines differ by " +
            std::to_string(gap) + " in max-abs norm");
    return residual_coherence(TrajectoryTables(sc, TrajectoryTables::Pipeline::quantum), parallel);
}

// ----------------------------- instance reports -----------------------------

namespace {

// One pass over xi: normalization, integral value, first/second moments and
// the third-absolute-moment remainder data for the classical relation.
struct ClassicalAgg {
    CompensatedSum norm, ift, m1, m2, abs3;
    double max_obs = 0.0;
    std::size_t skipped = 0;
    std::size_t violation = kNoViolation;
    void merge(const ClassicalAgg& o) {
        norm.merge(o.norm);
        ift.merge(o.ift);
        m1.merge(o.m1);
        m2.merge(o.m2);
        abs3.merge(o.abs3);
        max_obs = std::max(max_obs, o.max_obs);
        skipped += o.skipped;
        merge_violation(violation, o.violation);
    }
};

ClassicalAgg sweep_classical_aggregates(const TrajectoryTables& t, bool parallel) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    auto acc = blocked_sweep(t.xi().total(), ClassicalAgg{}, [&](std::size_t b, std::size_t e, ClassicalAgg& a) {
        for (std::size_t f = b; f < e; ++f) {
            const auto x = split_xi(f, dS, dE);

            // integral value via the cancelled product; finite on
            // rank-deficient inputs where weight * e^{-obs} is 0 * inf
            double denom = 0.0;
            const double num = t.tilted_forward_cl(x.s, x.n, x.so, x.no, denom);
            switch (gate_tilted(std::abs(num), denom)) {
                case Gate::skip: break;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: a.ift.add(num / denom);
            }

            const double w = t.forward_term(x.s, x.n, x.so, x.no);
            const double obs = t.obs_correlation_cl(x.s, x.so);
            switch (gate_weight_obs(std::abs(w), obs)) {
                case Gate::skip: ++a.skipped; continue;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: break;
            }
            a.norm.add(w);
            a.m1.add(w * obs);
            a.m2.add(w * obs * obs);
            a.abs3.add(w * std::abs(obs * obs * obs));
            a.max_obs = std::max(a.max_obs, std::abs(obs));
        }
    }, parallel);
    if (acc.violation != kNoViolation) raise_support("classical aggregates", acc.violation);
    return acc;
}

struct QuasiAgg {
    CompensatedCSum norm, ift, m1, m2;
    CompensatedSum abs3;
    double max_obs = 0.0;
    CompensatedCSum ift_c, m1_c, m2_c;
    CompensatedSum abs3_c;
    double max_obs_c = 0.0;
    std::size_t skipped = 0;
    std::size_t violation = kNoViolation;
    void merge(const QuasiAgg& o) {
        norm.merge(o.norm);
        ift.merge(o.ift);
        m1.merge(o.m1);
        m2.merge(o.m2);
        abs3.merge(o.abs3);
        max_obs = std::max(max_obs, o.max_obs);
        ift_c.merge(o.ift_c);
        m1_c.merge(o.m1_c);
        m2_c.merge(o.m2_c);
        abs3_c.merge(o.abs3_c);
        max_obs_c = std::max(max_obs_c, o.max_obs_c);
        skipped += o.skipped;
        merge_violation(violation, o.violation);
    }
};

QuasiAgg sweep_quasi_aggregates(const TrajectoryTables& t, bool with_coherence, bool parallel) {
    const std::size_t dS = t.dim_S(), dE = t.dim_E();
    auto acc = blocked_sweep(t.zeta().total(), QuasiAgg{}, [&](std::size_t b, std::size_t e, QuasiAgg& a) {
        for (std::size_t f = b; f < e; ++f) {
            const auto z = split_zeta(f, dS, dE);

            double denom = 0.0;
            const Complex num = t.tilted_quasi_correlation(z.k, z.s, z.n, z.ko, z.so, z.no, denom);
            switch (gate_tilted(std::abs(num), denom)) {
                case Gate::skip: break;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: a.ift.add(num / denom);
            }
            if (with_coherence) {
                double denom_c = 0.0;
                const Complex num_c = t.tilted_quasi_coherence(z.k, z.s, z.n, z.ko, z.so, z.no, denom_c);
                switch (gate_tilted(std::abs(num_c), denom_c)) {
                    case Gate::skip: break;
                    case Gate::violation: merge_violation(a.violation, f); return;
                    case Gate::accumulate: a.ift_c.add(num_c / denom_c);
                }
            }

            const Complex w = t.quasi_forward_term(z.k, z.s, z.n, z.ko, z.so, z.no);
            const double wm = std::abs(w);
            const double obs = t.obs_correlation(z.k, z.s, z.ko, z.so);
            switch (gate_weight_obs(wm, obs)) {
                case Gate::skip: ++a.skipped; continue;
                case Gate::violation: merge_violation(a.violation, f); return;
                case Gate::accumulate: break;
            }
            a.norm.add(w);
            a.m1.add(w * obs);
            a.m2.add(w * obs * obs);
            a.abs3.add(wm * std::abs(obs * obs * obs));
            a.max_obs = std::max(a.max_obs, std::abs(obs));
            if (with_coherence) {
                const double oc = t.obs_coherence(z.k, z.s, z.ko, z.so);
                switch (gate_weight_obs(wm, oc)) {
                    case Gate::skip: continue;
                    case Gate::violation: merge_violation(a.violation, f); return;
                    case Gate::accumulate: break;
                }
                a.m1_c.add(w * oc);
                a.m2_c.add(w * oc * oc);
                a.abs3_c.add(wm * std::abs(oc * oc * oc));
                a.max_obs_c = std::max(a.max_obs_c, std::abs(oc));
            }
        }
    }, parallel);
    if (acc.violation != kNoViolation) raise_support("quasi aggregates", acc.violation);
    return acc;
}

bool integral_pass(Complex v, const Tolerances& tol, bool check_imag) {
    if (std::abs(v - Complex(1.0, 0.0)) > tol.integral) return false;
    return !check_imag || std::abs(v.imag()) <= tol.imaginary;
}

bool moment_pass(Complex m1, Complex m2, double bound, double noise) {
    return std::abs(m2 - 2.0 * m1) <= bound + noise;
}

}  // namespace

bool FTReport::all_pass() const {
    bool ok = pass_ift_cl && pass_exp_cl && pass_nonneg;
    if (support_complete_cl) ok = ok && pass_m2_cl;
    if (quasi_computed) {
        ok = ok && pass_ift_q && pass_exp_q;
        if (support_complete_q) ok = ok && pass_m2_q;
    }
    if (quasi_computed && coherence_applicable) {
        ok = ok && pass_ift_c && pass_exp_c;
        if (support_complete_q) ok = ok && pass_m2_c;
    }
    if (detailed_computed) {
        ok = ok && pass_detailed_cl;
        if (quasi_computed) ok = ok && pass_detailed_q;
        if (quasi_computed && coherence_applicable) ok = ok && pass_detailed_c;
    }
    return ok;
}

void FTReport::recompute_flags() {
    pass_ift_cl = integral_pass(ift_cl, tol, false);
    pass_exp_cl = expectation_pass(exp_cl, info.cl_change, tol);
    pass_m2_cl = moment_pass(exp_cl, m2_cl, mom_bound_cl, tol.moment_noise);
    if (quasi_computed) {
        pass_ift_q = integral_pass(ift_q, tol, true);
        pass_exp_q = expectation_pass(exp_q, info.mi_change, tol);
        pass_m2_q = moment_pass(exp_q, m2_q, mom_bound_q, tol.moment_noise);
        if (coherence_applicable) {
            pass_ift_c = integral_pass(ift_c, tol, true);
            pass_exp_c = expectation_pass(exp_c, info.coh_change, tol);
            pass_m2_c = moment_pass(exp_c, m2_c, mom_bound_c, tol.moment_noise);
        }
    }
    if (detailed_computed) {
        pass_detailed_cl = detailed_cl <= tol.detailed;
        if (quasi_computed) pass_detailed_q = detailed_q <= tol.detailed;
        if (quasi_computed && coherence_applicable) pass_detailed_c = detailed_c <= tol.detailed;
    }
    pass_nonneg = info.mi_change >= -tol.nonneg && info.cl_change >= -tol.nonneg &&
                  (!coherence_applicable || info.coh_change >= -tol.nonneg);
}

FTReport analyze_scenario(const Scenario& sc, const AnalyzeOptions& opt) {
    FTReport rep;
    rep.instance_id = opt.instance_id;
    rep.tol = opt.tol;
    rep.info = info_summary(sc);
    rep.dephasing_gap = dephasing_deviation(sc);
    rep.coherence_applicable = rep.dephasing_gap <= kDephasingTol;
    rep.quasi_computed = opt.compute_quasi;
    rep.detailed_computed = opt.compute_detailed;

    const TrajectoryTables cl(sc, TrajectoryTables::Pipeline::classical);
    rep.support_complete_cl = cl.full_support();
    const auto cagg = sweep_classical_aggregates(cl, opt.parallel);
    rep.ift_cl = Complex(cagg.ift.value(), 0.0);
    rep.exp_cl = Complex(cagg.m1.value(), 0.0);
    rep.m2_cl = Complex(cagg.m2.value(), 0.0);
    rep.mom_bound_cl = std::exp(cagg.max_obs) / 3.0 * cagg.abs3.value();
    if (cagg.skipped > 0)
        rep.support_diagnostics.push_back("classical sweep skipped " + std::to_string(cagg.skipped) +
                                          " zero-weight indices");

    if (opt.compute_detailed) rep.detailed_cl = residual_classical(cl, opt.parallel);

    if (opt.compute_quasi) {
        const TrajectoryTables qt(sc, TrajectoryTables::Pipeline::quantum);
        const auto qagg = sweep_quasi_aggregates(qt, rep.coherence_applicable, opt.parallel);
        rep.ift_q = qagg.ift.value();
        rep.exp_q = qagg.m1.value();
        rep.m2_q = qagg.m2.value();
        rep.mom_bound_q = std::exp(qagg.max_obs) / 3.0 * qagg.abs3.value();
        if (qagg.skipped > 0)
            rep.support_diagnostics.push_back("quasi sweep skipped " + std::to_string(qagg.skipped) +
                                              " zero-weight indices");
        if (rep.coherence_applicable) {
            rep.ift_c = qagg.ift_c.value();
            rep.exp_c = qagg.m1_c.value();
            rep.m2_c = qagg.m2_c.value();
            rep.mom_bound_c = std::exp(qagg.max_obs_c) / 3.0 * qagg.abs3_c.value();
        }
        if (opt.compute_detailed) {
            rep.detailed_q = residual_quantum(qt, opt.parallel);
            if (rep.coherence_applicable) rep.detailed_c = residual_coherence(qt, opt.parallel);
        }
    }

    rep.recompute_flags();
    return rep;
}

}  // namespace ftlab
