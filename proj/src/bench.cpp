#include "eslope/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "eslope/errors.hpp"
#include "eslope/io.hpp"
#include "eslope/metrics.hpp"
#include "eslope/random.hpp"
#include "eslope/variance.hpp"

namespace eslope {

namespace {

struct Cell {
    std::size_t fraction_index;
    int rep;
};

std::vector<BenchRow> run_cell(const BenchConfig& config, const Cell& cell)
{
    SimulationConfig cfg = config.base;
    cfg.outlier_fraction = config.fractions[cell.fraction_index];
    cfg.seed = replication_seed(config.seed, cell.fraction_index, cell.rep);
    const Dataset data = make_dataset(cfg);
    const GroundTruth& truth = *data.truth();

    double sigma = 0.0;
    if (config.sigma) {
        sigma = *config.sigma;
    } else {
        const auto est = robust_sigma(data);
        if (est.degenerate) {
            throw NumericalError("run_bench: degenerate noise estimate");
        }
        sigma = est.sigma;
    }

    std::vector<BenchRow> rows;
    for (auto method : config.methods) {
        const auto start = std::chrono::steady_clock::now();
        const FitResult fit = run_method(method, data, sigma, config.settings);
        const auto stop = std::chrono::steady_clock::now();

        const auto rec = score(fit.outlier_support, truth.support, fit.beta_hat, truth.beta,
                               fit.mu_hat, truth.mu);
        BenchRow row;
        row.method = method;
        row.fraction = cfg.outlier_fraction;
        row.replication = cell.rep;
        row.seed = cfg.seed;
        row.sigma_used = sigma;
        row.discoveries = rec.discoveries;
        row.false_discoveries = rec.false_discoveries;
        row.fdp = rec.fdp;
        row.power = rec.power;
        row.mse_beta_raw = rec.mse_beta;
        row.mse_mu = rec.mse_mu;
        row.converged = fit.converged;
        row.runtime_s = std::chrono::duration<double>(stop - start).count();
        try {
            const auto d = debias(data, fit.outlier_support);
            row.mse_beta_debiased = mse(d.beta, truth.beta);
            row.mse_mu_debiased = mse(d.mu, truth.mu);
        } catch (const DomainError&) {
        } catch (const NumericalError&) {
        }
        rows.push_back(row);
    }
    return rows;
}

std::string opt_field(const std::optional<double>& v)
{
    return v ? io::format_double(*v) : std::string("NA");
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& values)
{
    double sum = 0.0;
    std::size_t count = 0;
    std::vector<double> defined;
    for (const auto& v : values) {
        if (v) {
            defined.push_back(*v);
        }
    }
    if (defined.empty()) {
        return std::nullopt;
    }
    std::sort(defined.begin(), defined.end());
    for (double v : defined) {
        sum += v;
        ++count;
    }
    return sum / static_cast<double>(count);
}

} // namespace

std::string_view method_name(Method method)
{
    switch (method) {
    case Method::ESlope: return "eslope";
    case Method::ELasso: return "elasso";
    case Method::Ipod: return "ipod";
    case Method::LassoCv: return "lassocv";
    case Method::SlopeConcat: return "slope-concat";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
    for (auto m : {Method::ESlope, Method::ELasso, Method::Ipod, Method::LassoCv,
                   Method::SlopeConcat}) {
        if (method_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

FitResult run_method(Method method, const Dataset& data, double sigma,
                     const MethodSettings& settings)
{
    switch (method) {
    case Method::ESlope:
        return e_slope(data, sigma,
                       ESlopeOptions{settings.q, settings.eps, settings.penalize_beta, settings.fit});
    case Method::ELasso:
        return fit_e_lasso(data, sigma, settings.fit);
    case Method::Ipod:
        return fit_ipod(data, sigma, default_level_grid(data.n(), sigma, settings.grid_size),
                        settings.fit);
    case Method::LassoCv: {
        LassoCvOptions cv;
        cv.folds = settings.cv_folds;
        cv.seed = settings.cv_seed;
        return fit_lasso_cv(data, default_level_grid(data.n(), sigma, settings.grid_size), cv,
                            settings.fit);
    }
    case Method::SlopeConcat:
        return fit_slope_concat(data, sigma, settings.q, settings.fit);
    }
    throw DomainError("run_method: unknown method");
}

BenchConfig setting_preset(int setting, std::size_t n)
{
    BenchConfig config;
    config.base.n = n;
    config.base.rho = 0.4;
    config.base.sigma = 1.0;
    if (setting == 1) {
        config.base.p = 20;
        config.base.sparsity.reset();
        config.methods = {Method::ESlope, Method::ELasso, Method::Ipod, Method::LassoCv};
        config.settings.penalize_beta = false;
    } else if (setting == 2) {
        config.base.p = 1000;
        config.base.sparsity = 50;
        config.base.magnitude = LowMagnitude{};
        config.methods = {Method::ESlope, Method::ELasso, Method::SlopeConcat};
        config.settings.penalize_beta = true;
    } else {
        throw DomainError("setting_preset: setting must be 1 or 2");
    }
    return config;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t cell, int rep)
{
    return derive_seed(derive_seed(seed, cell), static_cast<std::uint64_t>(rep));
}

std::vector<BenchRow> run_bench(const BenchConfig& config)
{
    if (config.reps < 1) {
        throw DomainError("run_bench: reps must be at least 1");
    }
    if (config.fractions.empty() || config.methods.empty()) {
        throw DomainError("run_bench: need at least one fraction and one method");
    }
    if (config.sigma && !(*config.sigma > 0.0)) {
        throw DomainError("run_bench: sigma must be positive");
    }

    std::vector<Cell> cells;
    for (std::size_t f = 0; f < config.fractions.size(); ++f) {
        for (int r = 0; r < config.reps; ++r) {
            cells.push_back({f, r});
        }
    }
    std::vector<std::vector<BenchRow>> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= cells.size()) {
                return;
            }
            try {
                results[i] = run_cell(config, cells[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = cells.size();
                return;
            }
        }
    };
    const auto threads = std::max(1u, std::min<unsigned>(config.jobs,
                                                         static_cast<unsigned>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<BenchRow> rows;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            rows.push_back(results[c][m]);
        }
    }
    return rows;
}

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRow>& rows)
{
    std::vector<BenchSummaryRow> out;
    std::vector<bool> used(rows.size(), false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (used[i]) {
            continue;
        }
        std::vector<ReplicationRecord> records;
        std::vector<std::optional<double>> mb_deb, mm_deb;
        std::vector<std::optional<double>> runtime;
        for (std::size_t j = i; j < rows.size(); ++j) {
            if (used[j] || rows[j].method != rows[i].method || rows[j].fraction != rows[i].fraction) {
                continue;
            }
            used[j] = true;
            ReplicationRecord rec;
            rec.fdp = rows[j].fdp;
            rec.power = rows[j].power;
            rec.mse_beta = rows[j].mse_beta_raw;
            rec.mse_mu = rows[j].mse_mu;
            rec.discoveries = rows[j].discoveries;
            rec.false_discoveries = rows[j].false_discoveries;
            records.push_back(rec);
            mb_deb.push_back(rows[j].mse_beta_debiased);
            mm_deb.push_back(rows[j].mse_mu_debiased);
            runtime.emplace_back(rows[j].runtime_s);
        }
        const auto agg = aggregate(std::move(records));
        BenchSummaryRow s;
        s.method = rows[i].method;
        s.fraction = rows[i].fraction;
        s.replications = agg.replications;
        s.mean_fdr = agg.mean_fdr;
        s.sd_fdr = agg.sd_fdr;
        s.mean_power = agg.mean_power;
        s.sd_power = agg.sd_power;
        s.mean_mse_beta_raw = agg.mean_mse_beta;
        s.mean_mse_beta_debiased = mean_defined(mb_deb);
        s.mean_mse_mu = agg.mean_mse_mu;
        s.mean_mse_mu_debiased = mean_defined(mm_deb);
        s.mean_runtime_s = mean_defined(runtime).value_or(0.0);
        out.push_back(s);
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, bool with_runtime)
{
    out << "method,fraction,replication,seed,sigma,discoveries,false_discoveries,fdp,power,"
           "mse_beta_raw,mse_beta_debiased,mse_mu,mse_mu_debiased,converged,runtime\n";
    for (const auto& r : rows) {
        out << method_name(r.method) << ',' << io::format_double(r.fraction) << ','
            << r.replication + 1 << ',' << r.seed << ',' << io::format_double(r.sigma_used) << ','
            << r.discoveries << ',' << r.false_discoveries << ',' << io::format_double(r.fdp)
            << ',' << opt_field(r.power) << ',' << io::format_double(r.mse_beta_raw) << ','
            << opt_field(r.mse_beta_debiased) << ',' << io::format_double(r.mse_mu) << ','
            << opt_field(r.mse_mu_debiased) << ',' << (r.converged ? "true" : "false") << ','
            << (with_runtime ? io::format_double(r.runtime_s) : std::string("NA")) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<BenchSummaryRow>& rows,
                       bool with_runtime)
{
    out << "method,fraction,replications,mean_fdr,sd_fdr,mean_power,sd_power,"
           "mean_mse_beta_raw,mean_mse_beta_debiased,mean_mse_mu,mean_mse_mu_debiased,"
           "mean_runtime\n";
    for (const auto& r : rows) {
        out << method_name(r.method) << ',' << io::format_double(r.fraction) << ','
            << r.replications << ',' << io::format_double(r.mean_fdr) << ','
            << io::format_double(r.sd_fdr) << ',' << io::format_double(r.mean_power) << ','
            << io::format_double(r.sd_power) << ',' << io::format_double(r.mean_mse_beta_raw)
            << ',' << opt_field(r.mean_mse_beta_debiased) << ','
            << io::format_double(r.mean_mse_mu) << ',' << opt_field(r.mean_mse_mu_debiased) << ','
            << (with_runtime ? io::format_double(r.mean_runtime_s) : std::string("NA")) << '\n';
    }
}

} // namespace eslope
