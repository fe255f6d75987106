#pragma once
#include <stdexcept>
#include <string>

namespace eslope {

/// Vector/matrix sizes disagree.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A scalar argument lies outside its admissible range.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Malformed or non-finite input data.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Rank deficiency or another failure of a numerical kernel.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

} // namespace detail
} // namespace eslope
