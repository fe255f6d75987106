#pragma once
#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>

#include "eslope/types.hpp"

namespace eslope {

struct LowMagnitude {};
struct HighMagnitude {};
struct CustomMagnitude {
    double value;
};
/// Low: sqrt(2 log n). High: 5 sqrt(2 log n).
using Magnitude = std::variant<LowMagnitude, HighMagnitude, CustomMagnitude>;

double magnitude_value(const Magnitude& magnitude, std::size_t n);

struct SimulationConfig {
    std::size_t n = 1000;
    std::size_t p = 20;
    /// Toeplitz correlation rho^{|i-j|} between columns, in [0, 1).
    double rho = 0.4;
    /// Number of non-zero entries of beta*; unset means every entry is non-zero.
    std::optional<std::size_t> sparsity;
    double outlier_fraction = 0.05;
    Magnitude magnitude = HighMagnitude{};
    double sigma = 1.0;
    std::uint64_t seed = 1;
    /// Outlier signs drawn uniformly from {-1, +1} instead of all positive.
    bool random_sign = false;

    std::size_t outlier_count() const;
    /// Throws DomainError on an inconsistent configuration.
    void validate() const;
};

/// Rows i.i.d. N(0, Sigma) with Sigma_ij = rho^{|i-j|}, columns scaled to unit norm.
Matrix toeplitz_gaussian_design(std::size_t n, std::size_t p, double rho, std::uint64_t seed);

/// Mean-shift data y = X beta* + mu* + eps with the ground truth attached.
Dataset make_dataset(const SimulationConfig& cfg);

} // namespace eslope
