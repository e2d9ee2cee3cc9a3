#pragma once

#include <stdexcept>
#include <string>

namespace horofarey {

// Invalid argument outside the mathematical domain of an operation
// (y_d <= 0, singular matrix, zero vector, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// An exponent or size that would overflow double arithmetic.
struct RangeError : std::range_error {
    using std::range_error::range_error;
};

// A requested configuration that the library does not implement
// (e.g. Case (B) reference sampling for d >= 4).
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Memory or enumeration guard tripped.
struct ResourceCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical breakdown: ill-conditioning, non-convergence.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace horofarey
