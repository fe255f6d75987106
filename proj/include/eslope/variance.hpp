#pragma once
#include "eslope/types.hpp"

namespace eslope {

struct HuberOptions {
    /// Huber threshold in units of the residual scale.
    double tuning = 1.345;
    int max_iter = 200;
    /// Stop once max |beta_new - beta_old| falls below this.
    double tol = 1e-10;
};

struct HuberFit {
    Vector beta;
    /// Scale used in the final weighting step (normalized MAD of residuals).
    double scale = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Huber M-regression by IRLS, re-estimating the residual scale at each step.
HuberFit huber_fit(const Dataset& data, const HuberOptions& opts = {});

struct SigmaEstimate {
    double sigma = 0.0;
    /// All Huber residuals identical: no usable scale.
    bool degenerate = false;
    HuberFit huber;
};

/// Consistency factor turning a MAD into a normal standard deviation.
inline constexpr double kMadToSigma = 1.4826;

/// kMadToSigma * median |r_i - median(r)| over Huber residuals r.
SigmaEstimate robust_sigma(const Dataset& data, const HuberOptions& opts = {},
                           double mad_factor = kMadToSigma);

/// Median absolute deviation about the median.
double median_absolute_deviation(const Vector& values);

} // namespace eslope
