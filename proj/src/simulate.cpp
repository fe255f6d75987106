#include "eslope/simulate.hpp"

#include <cmath>
#include <string>

#include "eslope/errors.hpp"
#include "eslope/random.hpp"

namespace eslope {

namespace {

// Independent streams per component so that, e.g., changing the outlier
// fraction leaves the design and noise untouched.
enum Stream : std::uint64_t { kDesign = 0, kBeta = 1, kOutliers = 2, kNoise = 3 };

Matrix design_from(Rng& rng, std::size_t n, std::size_t p, double rho)
{
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(p);
    Matrix sigma(cols, cols);
    for (Eigen::Index i = 0; i < cols; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    const Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("toeplitz_gaussian_design: covariance is not positive definite");
    }
    Matrix Z(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            Z(i, j) = rng.normal();
        }
    }
    // Row z ~ N(0, I) maps to L z ~ N(0, Sigma); stacked rows give Z L^T.
    Matrix X = Z * llt.matrixL().transpose();
    for (Eigen::Index j = 0; j < cols; ++j) {
        X.col(j) /= X.col(j).norm();
    }
    return X;
}

} // namespace

double magnitude_value(const Magnitude& magnitude, std::size_t n)
{
    const double base = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    if (std::holds_alternative<LowMagnitude>(magnitude)) {
        return base;
    }
    if (std::holds_alternative<HighMagnitude>(magnitude)) {
        return 5.0 * base;
    }
    return std::get<CustomMagnitude>(magnitude).value;
}

std::size_t SimulationConfig::outlier_count() const
{
    return static_cast<std::size_t>(std::floor(outlier_fraction * static_cast<double>(n)));
}

void SimulationConfig::validate() const
{
    if (n < 1 || p < 1) {
        throw DomainError("SimulationConfig: n and p must be positive");
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw DomainError("SimulationConfig: rho must lie in [0, 1)");
    }
    if (!(outlier_fraction > 0.0 && outlier_fraction <= 0.5)) {
        throw DomainError("SimulationConfig: outlier_fraction must lie in (0, 0.5]");
    }
    if (outlier_count() < 1) {
        throw DomainError("SimulationConfig: outlier_fraction * n must be at least 1");
    }
    if (sparsity && (*sparsity < 1 || *sparsity > p)) {
        throw DomainError("SimulationConfig: sparsity must lie in [1, p]");
    }
    if (!(sigma > 0.0)) {
        throw DomainError("SimulationConfig: sigma must be positive");
    }
    if (const auto* c = std::get_if<CustomMagnitude>(&magnitude); c && !std::isfinite(c->value)) {
        throw DomainError("SimulationConfig: custom magnitude must be finite");
    }
}

Matrix toeplitz_gaussian_design(std::size_t n, std::size_t p, double rho, std::uint64_t seed)
{
    if (n < 1 || p < 1) {
        throw DomainError("toeplitz_gaussian_design: n and p must be positive");
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw DomainError("toeplitz_gaussian_design: rho must lie in [0, 1)");
    }
    Rng rng(derive_seed(seed, kDesign));
    return design_from(rng, n, p, rho);
}

Dataset make_dataset(const SimulationConfig& cfg)
{
    cfg.validate();
    Matrix X = toeplitz_gaussian_design(cfg.n, cfg.p, cfg.rho, cfg.seed);

    GroundTruth truth;
    const auto p = static_cast<Eigen::Index>(cfg.p);
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const double beta_level = std::sqrt(2.0 * std::log(static_cast<double>(cfg.p)));
    if (cfg.sparsity) {
        Rng rng(derive_seed(cfg.seed, kBeta));
        truth.beta = Vector::Zero(p);
        for (auto j : rng.sample_without_replacement(cfg.p, *cfg.sparsity)) {
            truth.beta[static_cast<Eigen::Index>(j)] = beta_level;
        }
    } else {
        truth.beta = Vector::Constant(p, beta_level);
    }

    Rng outlier_rng(derive_seed(cfg.seed, kOutliers));
    truth.support = outlier_rng.sample_without_replacement(cfg.n, cfg.outlier_count());
    truth.mu = Vector::Zero(n);
    const double magnitude = magnitude_value(cfg.magnitude, cfg.n);
    for (auto i : truth.support) {
        double sign = 1.0;
        if (cfg.random_sign) {
            sign = outlier_rng.below(2) == 0 ? -1.0 : 1.0;
        }
        truth.mu[static_cast<Eigen::Index>(i)] = sign * magnitude;
    }

    Rng noise_rng(derive_seed(cfg.seed, kNoise));
    Vector y = X * truth.beta + truth.mu;
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] += cfg.sigma * noise_rng.normal();
    }
    return Dataset(std::move(X), std::move(y), true, std::move(truth));
}

} // namespace eslope
