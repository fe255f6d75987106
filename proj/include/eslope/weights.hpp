#pragma once
#include <cstddef>

#include "eslope/sorted_l1.hpp"

namespace eslope {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse of the standard normal CDF. Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

/// [sigma * sqrt(log(2m / i))]_{i=1..m}.
WeightSequence slope_log_weights(std::size_t m, double sigma);

/// Benjamini-Hochberg levels [sigma * Phi^{-1}(1 - i q / (2m))]_{i=1..m}.
WeightSequence bh_weights(std::size_t m, double q, double sigma);

/// (1 + eps) * lambda.
WeightSequence inflate(const WeightSequence& lambda, double eps);

} // namespace eslope
