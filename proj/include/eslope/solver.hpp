#pragma once
#include <cstddef>
#include <numbers>
#include <vector>

#include "eslope/types.hpp"

namespace eslope {

/// Penalty scale rho >= 2(4 + sqrt 2) under which the estimation bounds hold.
inline constexpr double kTheoryRho = 2.0 * (4.0 + std::numbers::sqrt2);

struct FitOptions {
    int max_iter = 20000;
    /// Relative objective decrease over a 10-iteration window.
    double tol = 1e-8;
    /// Allowed dual infeasibility / complementarity slack at the solution.
    double kkt_tol = 1e-6;
    bool restart = true;
    /// false gives plain (monotone) proximal gradient.
    bool accelerate = true;
    bool backtracking = false;
};

/// ||y - X beta - mu||^2 + 2 rho1 J(beta) + 2 rho2 J(mu), with 2 nu ||beta||_1 for an
/// l1 penalty on beta and no beta term for NoPenalty.
double objective_value(const Dataset& data, const Vector& beta, const Vector& mu,
                       const PenaltySpec& pen);

/// sigma_max(X)^2 + 1, the largest eigenvalue of X X^T + I, by power iteration.
double lipschitz_bound(const Matrix& X);

/// Minimizes the joint objective by FISTA over (beta, mu) with blockwise prox.
/// Non-convergence is reported through FitResult::converged.
FitResult fit_joint(const Dataset& data, const PenaltySpec& pen, const FitOptions& opts = {});

/// Like fit_joint but records the objective after every accepted iterate.
FitResult fit_joint_traced(const Dataset& data, const PenaltySpec& pen, const FitOptions& opts,
                           std::vector<double>& objective_trace);

/// One sorted-l1 penalty over the stacked vector (beta, mu), weights of length p + n.
FitResult fit_concatenated_slope(const Dataset& data, const WeightSequence& weights,
                                 const FitOptions& opts = {});

struct ESlopeOptions {
    double q = 0.05;
    double eps = 0.0;
    /// SLOPE on beta with BH weights of length p; otherwise beta is unpenalized.
    bool penalize_beta = false;
    FitOptions fit;
};

/// BH-weighted SLOPE on mu (rho = 1), optionally also on beta.
FitResult e_slope(const Dataset& data, double sigma, const ESlopeOptions& opts = {});

// Penalties with log-type weights sigma sqrt(log(2m/i)) and rho = kTheoryRho.
PenaltySpec no_beta_penalty(std::size_t n, double sigma, double rho = kTheoryRho);
PenaltySpec l1_beta_penalty(std::size_t n, std::size_t p, double sigma, double rho = kTheoryRho);
PenaltySpec two_slope_penalty(std::size_t n, std::size_t p, double sigma,
                              double rho = kTheoryRho);

struct DebiasedFit {
    Vector beta;
    Vector mu;
};

/// OLS of y on the rows outside `outlier_support`; mu_i = y_i - x_i^T beta on the support.
DebiasedFit debias(const Dataset& data, const IndexSet& outlier_support);

} // namespace eslope
