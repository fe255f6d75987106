#pragma once
#include <cstddef>
#include <optional>
#include <vector>

#include "eslope/types.hpp"

namespace eslope {

/// |est \ truth| / max(|est|, 1).
double fdp(const IndexSet& estimated, const IndexSet& truth);

/// |est & truth| / |truth|; DomainError when truth is empty.
double power_prop(const IndexSet& estimated, const IndexSet& truth);

/// ||a - b||_2^2.
double mse(const Vector& a, const Vector& b);

struct ReplicationRecord {
    double fdp = 0.0;
    /// Unset when there are no true outliers.
    std::optional<double> power;
    double mse_beta = 0.0;
    double mse_mu = 0.0;
    std::size_t discoveries = 0;
    std::size_t false_discoveries = 0;
};

/// Scores one fit against known support and parameters.
ReplicationRecord score(const IndexSet& estimated, const IndexSet& truth, const Vector& beta_hat,
                        const Vector& beta_star, const Vector& mu_hat, const Vector& mu_star);

struct MetricsSummary {
    std::vector<ReplicationRecord> records;
    std::size_t replications = 0;
    double mean_fdr = 0.0;
    double mean_power = 0.0;
    double mean_mse_beta = 0.0;
    double mean_mse_mu = 0.0;
    double sd_fdr = 0.0;
    double sd_power = 0.0;
    double sd_mse_beta = 0.0;
    double sd_mse_mu = 0.0;
    /// Records contributing to mean_power (those with a defined power).
    std::size_t power_count = 0;
};

/// Arithmetic means and sample standard deviations; DomainError when empty.
MetricsSummary aggregate(std::vector<ReplicationRecord> records);

} // namespace eslope
