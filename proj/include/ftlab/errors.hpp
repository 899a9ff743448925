// errors.hpp — exception taxonomy shared by all modules

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ftlab {

// Bad call arguments: dimension mismatches, unknown labels, out-of-range values.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input data violates a structural invariant (non-Hermitian, non-unitary,
// negative eigenvalue beyond tolerance, non-orthonormal basis, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical routine failed (no convergence, non-finite intermediate).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A logarithm hit a zero probability on an index carrying nonzero weight.
struct SupportViolation : std::runtime_error {
    SupportViolation(const std::string& what, std::size_t flat_index)
        : std::runtime_error(what), index(flat_index) {}
    std::size_t index;
};

// An operation was invoked outside its stated applicability condition.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input or results file.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested enumeration exceeds the configured term budget.
struct BudgetError : std::runtime_error {
    BudgetError(const std::string& what, std::size_t required_terms)
        : std::runtime_error(what), required(required_terms) {}
    std::size_t required;
};

}  // namespace ftlab
