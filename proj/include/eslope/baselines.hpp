#pragma once
#include <cstddef>
#include <cstdint>
#include <vector>

#include "eslope/solver.hpp"

namespace eslope {

/// `count` log-spaced levels from sigma sqrt(2 log n) / 100 to 10 sigma sqrt(2 log n),
/// in decreasing order.
std::vector<double> default_level_grid(std::size_t n, double sigma, std::size_t count = 50);

/// Two constant-weight blocks: 2 sigma sqrt(log p) on beta, 2 sigma sqrt(log n) on mu.
FitResult fit_e_lasso(const Dataset& data, double sigma, const FitOptions& opts = {});

/// n x (n - p) matrix P with P^T P = I and P^T X = 0.
Matrix qr_complement(const Matrix& X);

/// n log(rss / n) + support_size log(n). The one place the IPOD criterion lives.
double ipod_bic(std::size_t n, double rss, std::size_t support_size);

/// One grid level of the IPOD lasso min ||P^T (y - mu)||^2 + 2 level ||mu||_1.
struct IpodPathPoint {
    double level = 0.0;
    Vector mu;
    IndexSet support;
    /// OLS of y on the rows outside `support`.
    Vector beta_refit;
    double rss = 0.0;
    /// +inf when the refit is not admissible (see ipod_path).
    double bic = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Lasso path of the projected problem over `grid` (any order; solved from the
/// largest level down with warm starts, returned in the order given). Supports
/// larger than n / 2 or leaving no residual degrees of freedom get bic = +inf.
std::vector<IpodPathPoint> ipod_path(const Dataset& data, const std::vector<double>& grid,
                                     const FitOptions& opts = {});

/// Soft-IPOD: the projected lasso tuned by ipod_bic.
FitResult fit_ipod(const Dataset& data, double sigma, const std::vector<double>& grid,
                   const FitOptions& opts = {});
FitResult fit_ipod(const Dataset& data, double sigma, const FitOptions& opts = {});

struct LassoCvOptions {
    int folds = 5;
    std::uint64_t seed = 1;
    FitOptions fit{.max_iter = 5000, .tol = 1e-7, .kkt_tol = 1e-5};
};

/// Held-out squared error of each grid level under K-fold CV on (P^T y, P^T).
std::vector<double> lasso_cv_errors(const Dataset& data, const std::vector<double>& grid,
                                    const LassoCvOptions& opts = {});

/// IPOD with the level chosen by cross-validation instead of BIC.
FitResult fit_lasso_cv(const Dataset& data, const std::vector<double>& grid,
                       const LassoCvOptions& opts = {}, const FitOptions& final_opts = {});

/// SLOPE with BH weights of length n + p on the stacked vector (beta, mu).
FitResult fit_slope_concat(const Dataset& data, double sigma, double q = 0.05,
                           const FitOptions& opts = {});

} // namespace eslope
