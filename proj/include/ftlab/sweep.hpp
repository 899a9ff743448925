// sweep.hpp — compensated summation and deterministic blocked reductions
//
// Index sweeps run over fixed-size blocks. Each block is reduced on its own
// and the per-block partials are combined in block order, so the result is
// bit-identical for any thread count, including a plain serial run. The
// unblocked serial_sweep is the reference implementation used in tests and
// benchmarks.

#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ftlab {

// Kahan-Babuska (Neumaier) accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    void merge(const CompensatedSum& o) {
        add(o.sum);
        carry += o.carry;
    }
    double value() const { return sum + carry; }
};

struct CompensatedCSum {
    CompensatedSum re, im;

    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    void merge(const CompensatedCSum& o) {
        re.merge(o.re);
        im.merge(o.im);
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

inline constexpr std::size_t kSweepBlock = 4096;

// Acc requirements: copyable, and void merge(const Acc&).
// Body signature: void(std::size_t begin, std::size_t end, Acc&).
template <class Acc, class Body>
Acc blocked_sweep(std::size_t total, const Acc& init, Body&& body, bool parallel = true) {
    if (total == 0) return init;
    const std::size_t num_blocks = (total + kSweepBlock - 1) / kSweepBlock;
    std::vector<Acc> parts(num_blocks, init);

#ifdef _OPENMP
    if (parallel && num_blocks > 1) {
#pragma omp parallel for schedule(static)
        for (long long b = 0; b < static_cast<long long>(num_blocks); ++b) {
            const std::size_t begin = static_cast<std::size_t>(b) * kSweepBlock;
            const std::size_t end = std::min(begin + kSweepBlock, total);
            body(begin, end, parts[static_cast<std::size_t>(b)]);
        }
    } else
#endif
    {
        (void)parallel;
        for (std::size_t b = 0; b < num_blocks; ++b) {
            const std::size_t begin = b * kSweepBlock;
            const std::size_t end = std::min(begin + kSweepBlock, total);
            body(begin, end, parts[b]);
        }
    }

    Acc out = parts.front();
    for (std::size_t b = 1; b < num_blocks; ++b) out.merge(parts[b]);
    return out;
}

// Single-pass reference reduction (no blocking).
template <class Acc, class Body>
Acc serial_sweep(std::size_t total, const Acc& init, Body&& body) {
    Acc out = init;
    if (total > 0) body(std::size_t{0}, total, out);
    return out;
}

}  // namespace ftlab
