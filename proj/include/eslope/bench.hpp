#pragma once
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eslope/baselines.hpp"
#include "eslope/simulate.hpp"

namespace eslope {

enum class Method { ESlope, ELasso, Ipod, LassoCv, SlopeConcat };

std::string_view method_name(Method method);
/// Accepts eslope, elasso, ipod, lassocv, slope-concat.
std::optional<Method> parse_method(std::string_view name);

struct MethodSettings {
    double q = 0.05;
    double eps = 0.0;
    /// E-SLOPE penalizes beta with BH weights when set.
    bool penalize_beta = false;
    std::size_t grid_size = 50;
    int cv_folds = 5;
    std::uint64_t cv_seed = 1;
    FitOptions fit;
};

/// Runs one procedure with noise level `sigma`, using the method's default
/// tuning (BH weights, fixed l1 levels, BIC or CV over the default grid).
FitResult run_method(Method method, const Dataset& data, double sigma,
                     const MethodSettings& settings);

struct BenchConfig {
    /// n, p, rho, sparsity, magnitude, sigma and random_sign are taken from here;
    /// outlier_fraction and seed are set per cell.
    SimulationConfig base;
    std::vector<double> fractions{0.05};
    int reps = 1;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::ESlope, Method::ELasso};
    MethodSettings settings;
    /// Known noise level; unset means the Huber + MAD estimate shared by all methods.
    std::optional<double> sigma;
    unsigned jobs = 1;
    bool record_runtime = true;
};

/// Paper-style presets: setting 1 (p = 20, dense beta) and setting 2
/// (p = 1000, 50-sparse beta, SLOPE on beta), both with rho = 0.4, sigma = 1.
BenchConfig setting_preset(int setting, std::size_t n);

struct BenchRow {
    Method method = Method::ESlope;
    double fraction = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
    double sigma_used = 0.0;
    std::size_t discoveries = 0;
    std::size_t false_discoveries = 0;
    double fdp = 0.0;
    std::optional<double> power;
    double mse_beta_raw = 0.0;
    std::optional<double> mse_beta_debiased;
    double mse_mu = 0.0;
    std::optional<double> mse_mu_debiased;
    bool converged = false;
    double runtime_s = 0.0;
};

/// Seed of replication `rep` in fraction cell `cell`.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t cell, int rep);

/// Every (method, fraction, replication) result, ordered by method (as listed),
/// then fraction, then replication, regardless of completion order.
std::vector<BenchRow> run_bench(const BenchConfig& config);

struct BenchSummaryRow {
    Method method = Method::ESlope;
    double fraction = 0.0;
    std::size_t replications = 0;
    double mean_fdr = 0.0, sd_fdr = 0.0;
    double mean_power = 0.0, sd_power = 0.0;
    double mean_mse_beta_raw = 0.0;
    std::optional<double> mean_mse_beta_debiased;
    double mean_mse_mu = 0.0;
    std::optional<double> mean_mse_mu_debiased;
    double mean_runtime_s = 0.0;
};

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRow>& rows);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, bool with_runtime);
void write_summary_csv(std::ostream& out, const std::vector<BenchSummaryRow>& rows,
                       bool with_runtime);

} // namespace eslope
