#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eslope/baselines.hpp"
#include "eslope/bench.hpp"
#include "eslope/errors.hpp"
#include "eslope/io.hpp"
#include "eslope/simulate.hpp"
#include "eslope/solver.hpp"
#include "eslope/variance.hpp"
#include "eslope/weights.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eslope;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<double> parse_number(const std::string& text)
{
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return value;
}

Magnitude parse_magnitude(const std::string& text)
{
    if (text == "low") return LowMagnitude{};
    if (text == "high") return HighMagnitude{};
    if (const auto v = parse_number(text)) return CustomMagnitude{*v};
    throw UsageError("magnitude must be low, high or a number, got '" + text + "'");
}

json magnitude_json(const Magnitude& m)
{
    if (std::holds_alternative<LowMagnitude>(m)) return "low";
    if (std::holds_alternative<HighMagnitude>(m)) return "high";
    return std::get<CustomMagnitude>(m).value;
}

json one_based(const IndexSet& set)
{
    json out = json::array();
    for (auto i : set) out.push_back(i + 1);
    return out;
}

json to_json(const Vector& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << text;
}

// Options shared by commands that read data.
struct DataArgs {
    std::string dataset;
    std::string x;
    std::string y;

    void attach(CLI::App& cmd)
    {
        auto* d = cmd.add_option("--dataset", dataset, "directory written by 'simulate'");
        auto* xo = cmd.add_option("--x", x, "design matrix CSV (no header)");
        auto* yo = cmd.add_option("--y", y, "response CSV (one column)");
        d->excludes(xo)->excludes(yo);
        xo->needs(yo);
        yo->needs(xo);
    }

    Dataset load() const
    {
        if (!dataset.empty()) return io::load_dataset(dataset);
        if (!x.empty()) return io::load_xy(x, y);
        throw UsageError("give --dataset DIR or --x FILE --y FILE");
    }
};

struct SigmaChoice {
    double value = 0.0;
    std::string source;
    double seconds = 0.0;
};

SigmaChoice resolve_sigma(const std::string& arg, const Dataset& data)
{
    const auto start = Clock::now();
    if (arg == "auto") {
        const auto est = robust_sigma(data);
        if (est.degenerate) {
            throw NumericalError("robust sigma estimate is degenerate (residuals are all equal); pass --sigma");
        }
        return {est.sigma, "auto", seconds_since(start)};
    }
    const auto v = parse_number(arg);
    if (!v || !(*v > 0.0) || !std::isfinite(*v)) {
        throw UsageError("--sigma must be 'auto' or a positive number");
    }
    return {*v, "given", 0.0};
}

bool penalize_beta_for(const std::string& rule, const Dataset& data)
{
    if (rule == "slope") return true;
    if (rule == "none") return false;
    return data.p() >= data.n();
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string out;
    SimulationConfig cfg;
    std::string magnitude = "high";
    std::optional<std::size_t> sparsity;
};

int run_simulate(SimulateArgs& a)
{
    a.cfg.magnitude = parse_magnitude(a.magnitude);
    a.cfg.sparsity = a.sparsity;
    a.cfg.validate();
    const auto data = make_dataset(a.cfg);
    json config{{"n", a.cfg.n},
                {"p", a.cfg.p},
                {"rho", a.cfg.rho},
                {"sparsity", a.cfg.sparsity ? json(*a.cfg.sparsity) : json("dense")},
                {"outlier_fraction", a.cfg.outlier_fraction},
                {"magnitude", magnitude_json(a.cfg.magnitude)},
                {"magnitude_value", magnitude_value(a.cfg.magnitude, a.cfg.n)},
                {"sigma", a.cfg.sigma},
                {"random_sign", a.cfg.random_sign}};
    fs::create_directories(a.out);
    io::save_dataset(a.out, data, json{{"config", config}, {"seed", a.cfg.seed}});
    return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    DataArgs data;
    std::string method = "eslope";
    double q = 0.05;
    double eps = 0.0;
    std::string sigma = "auto";
    std::string beta_penalty = "auto";
    bool debias = false;
    std::size_t grid_size = 50;
    int folds = 5;
    std::uint64_t cv_seed = 1;
    int max_iter = 20000;
    double tol = 1e-8;
    std::string out;
};

int run_fit(const FitArgs& a)
{
    const auto total_start = Clock::now();
    const auto method = parse_method(a.method);
    if (!method) throw UsageError("unknown method '" + a.method + "'");
    const Dataset data = a.data.load();
    const auto sigma = resolve_sigma(a.sigma, data);

    MethodSettings settings;
    settings.q = a.q;
    settings.eps = a.eps;
    settings.penalize_beta = penalize_beta_for(a.beta_penalty, data);
    settings.grid_size = a.grid_size;
    settings.cv_folds = a.folds;
    settings.cv_seed = a.cv_seed;
    settings.fit.max_iter = a.max_iter;
    settings.fit.tol = a.tol;

    const auto fit_start = Clock::now();
    const FitResult fit = run_method(*method, data, sigma.value, settings);
    const double fit_seconds = seconds_since(fit_start);

    std::vector<std::string> warnings = fit.warnings;
    json result{{"schema", "eslope.fit"},
                {"version", 1},
                {"method", method_name(*method)},
                {"n", data.n()},
                {"p", data.p()},
                {"sigma", sigma.value},
                {"sigma_source", sigma.source},
                {"q", a.q},
                {"eps", a.eps},
                {"beta_penalized", *method == Method::ESlope ? json(settings.penalize_beta) : json(nullptr)},
                {"beta", to_json(fit.beta_hat)},
                {"mu", to_json(fit.mu_hat)},
                {"support", one_based(fit.outlier_support)},
                {"objective", fit.objective},
                {"iterations", fit.iterations},
                {"converged", fit.converged},
                {"kkt", {{"beta", fit.kkt_beta_ok}, {"mu", fit.kkt_mu_ok}}},
                {"selected_level", fit.selected_level ? json(*fit.selected_level) : json(nullptr)}};
    if (a.debias) {
        try {
            const auto d = eslope::debias(data, fit.outlier_support);
            result["debiased"] = {{"beta", to_json(d.beta)}, {"mu", to_json(d.mu)}};
        } catch (const std::exception& e) {
            result["debiased"] = nullptr;
            warnings.push_back(std::string("debias skipped: ") + e.what());
        }
    }
    result["warnings"] = warnings;
    result["timings"] = {{"sigma_s", sigma.seconds}, {"fit_s", fit_seconds}, {"total_s", seconds_since(total_start)}};
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    write_text(a.out, result.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string setting = "1";
    std::size_t n = 1000;
    std::size_t p = 20;
    double rho = 0.4;
    std::optional<std::size_t> sparsity;
    std::optional<std::string> magnitude;
    std::vector<double> fractions{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    int reps = 100;
    double q = 0.05;
    double eps = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::string> methods;
    std::string sigma = "auto";
    bool random_sign = false;
    unsigned jobs = 1;
    bool no_runtime = false;
    std::size_t grid_size = 50;
    std::string out;
    std::string summary;
};

int run_bench_cmd(const BenchArgs& a)
{
    BenchConfig cfg;
    if (a.setting == "1" || a.setting == "2") {
        cfg = setting_preset(a.setting == "1" ? 1 : 2, a.n);
    } else if (a.setting == "custom") {
        cfg.base.n = a.n;
        cfg.base.p = a.p;
        cfg.base.rho = a.rho;
        cfg.base.sparsity = a.sparsity;
        cfg.settings.penalize_beta = a.p >= a.n;
    } else {
        throw UsageError("--setting must be 1, 2 or custom");
    }
    if (a.magnitude) cfg.base.magnitude = parse_magnitude(*a.magnitude);
    cfg.base.random_sign = a.random_sign;
    cfg.fractions = a.fractions;
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.settings.q = a.q;
    cfg.settings.eps = a.eps;
    cfg.settings.grid_size = a.grid_size;
    cfg.jobs = std::max(1u, a.jobs);
    cfg.record_runtime = !a.no_runtime;
    if (!a.methods.empty()) {
        cfg.methods.clear();
        for (const auto& name : a.methods) {
            const auto m = parse_method(name);
            if (!m) throw UsageError("unknown method '" + name + "'");
            cfg.methods.push_back(*m);
        }
    }
    if (a.sigma != "auto") {
        const auto v = parse_number(a.sigma);
        if (!v || !(*v > 0.0)) throw UsageError("--sigma must be 'auto' or a positive number");
        cfg.sigma = *v;
    }
    if (!cfg.sigma && cfg.base.p >= cfg.base.n) {
        throw UsageError("the robust sigma estimate needs n > p; pass --sigma or a larger --n");
    }
    for (double f : cfg.fractions) {
        auto probe = cfg.base;
        probe.outlier_fraction = f;
        probe.validate();
    }

    const auto rows = run_bench(cfg);
    std::ostringstream long_csv;
    write_bench_csv(long_csv, rows, cfg.record_runtime);
    write_text(a.out, long_csv.str());
    if (!a.summary.empty()) {
        std::ostringstream summary_csv;
        write_summary_csv(summary_csv, summarize(rows), cfg.record_runtime);
        write_text(a.summary, summary_csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------- path

struct PathArgs {
    DataArgs data;
    std::string method = "slope";
    double q = 0.05;
    std::string beta_penalty = "auto";
    std::vector<double> levels;
    std::size_t grid_size = 30;
    double min_ratio = 1e-3;
    std::string out;
};

// Largest ratio of sorted-magnitude prefix sums; at this scale the zero vector
// is dual feasible for the penalty `weights`.
double feasibility_scale(const Vector& g, const Vector& weights)
{
    std::vector<double> mags(g.data(), g.data() + g.size());
    for (auto& m : mags) m = std::abs(m);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double scale = 0.0, num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mags.size(); ++k) {
        num += mags[k];
        den += weights[static_cast<Eigen::Index>(k)];
        if (den > 0.0) scale = std::max(scale, num / den);
    }
    return scale;
}

// Smallest level at which the whole mu path has vanished.
double vanishing_level(const Dataset& data, bool slope, bool penalize_beta, double q)
{
    const auto n = data.n(), p = data.p();
    const Vector mu_weights = slope ? bh_weights(n, q, 1.0).values()
                                    : Vector::Constant(static_cast<Eigen::Index>(n), 2.0 * std::sqrt(std::log(static_cast<double>(n))));
    const bool beta_free = slope ? !penalize_beta : p < 2;
    if (beta_free) {
        if (p >= n) throw DomainError("path: an unpenalized beta needs p < n");
        Vector r = data.y();
        if (p > 0) r -= data.X() * data.X().colPivHouseholderQr().solve(data.y());
        return feasibility_scale(r, mu_weights);
    }
    const Vector beta_weights = slope ? bh_weights(p, q, 1.0).values()
                                      : Vector::Constant(static_cast<Eigen::Index>(p), 2.0 * std::sqrt(std::log(static_cast<double>(p))));
    return std::max(feasibility_scale(data.X().transpose() * data.y(), beta_weights),
                    feasibility_scale(data.y(), mu_weights));
}

int run_path(const PathArgs& a)
{
    if (a.method != "slope" && a.method != "lasso") throw UsageError("--method must be slope or lasso");
    const bool slope = a.method == "slope";
    const Dataset data = a.data.load();
    const bool penalize_beta = penalize_beta_for(a.beta_penalty, data);

    std::vector<double> levels = a.levels;
    if (levels.empty()) {
        if (a.grid_size < 1 || !(a.min_ratio > 0.0 && a.min_ratio < 1.0)) {
            throw UsageError("--grid-size must be positive and --min-ratio in (0, 1)");
        }
        const double top = vanishing_level(data, slope, penalize_beta, a.q) * (1.0 + 1e-6);
        if (!(top > 0.0)) throw DomainError("path: response is already fitted exactly; no non-trivial grid");
        for (std::size_t k = 0; k < a.grid_size; ++k) {
            const double t = a.grid_size == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(a.grid_size - 1);
            levels.push_back(top * std::pow(a.min_ratio, t));
        }
    }
    for (double s : levels) {
        if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("path levels must be positive");
    }
    std::sort(levels.begin(), levels.end(), std::greater<>());

    std::ostringstream csv;
    csv << "level,index,mu\n";
    json blocks = json::array();
    for (double s : levels) {
        const FitResult fit = slope ? e_slope(data, s, ESlopeOptions{a.q, 0.0, penalize_beta, {}})
                                    : fit_e_lasso(data, s);
        for (Eigen::Index i = 0; i < fit.mu_hat.size(); ++i) {
            csv << io::format_double(s) << ',' << i + 1 << ',' << io::format_double(fit.mu_hat[i]) << '\n';
        }
        blocks.push_back({{"level", s}, {"discoveries", fit.outlier_support.size()}, {"converged", fit.converged}});
    }
    write_text(a.out, csv.str());

    json summary{{"schema", "eslope.path"}, {"version", 1}, {"method", a.method}, {"levels", blocks}};
    const auto est = robust_sigma(data);
    summary["selected_level"] = est.degenerate ? json(nullptr) : json(est.sigma);
    summary["selection_rule"] = "robust sigma (Huber + MAD)";
    if (!a.out.empty() && a.out != "-") std::cout << summary.dump(2) << '\n';
    else std::cerr << summary.dump(2) << '\n';
    return 0;
}

// Splices flat key/value pairs from `--config FILE` in front of the user's own
// arguments, dropping keys the user already passed as flags.
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    std::optional<std::string> file;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!file || args.empty()) return args;

    const auto given = [&](const std::string& key) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
        });
    };
    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigINI().from_file(*file)) {
        if (!item.parents.empty() && item.parents != std::vector<std::string>{args.front()}) continue;
        if (item.name.empty() || given(item.name)) continue;
        std::string joined;
        for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
        if (joined == "true") {
            injected.push_back("--" + item.name);
        } else if (joined != "false") {
            injected.push_back("--" + item.name);
            injected.push_back(joined);
        }
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

unsigned default_jobs()
{
    if (const char* env = std::getenv("ESLOPE_JOBS")) {
        if (const auto v = parse_number(env); v && *v >= 1.0) return static_cast<unsigned>(*v);
    }
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Outlier detection in linear regression with sorted-l1 penalties"};
    app.require_subcommand(1);
    std::string config_file; // consumed by expand_config, listed for --help

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "write a simulated dataset");
    simulate->add_option("--config", config_file, "flat key=value file; flags take precedence");
    simulate->add_option("--out", sim.out, "output directory")->required();
    simulate->add_option("--n", sim.cfg.n, "sample size")->capture_default_str();
    simulate->add_option("--p", sim.cfg.p, "number of covariates")->capture_default_str();
    simulate->add_option("--rho", sim.cfg.rho, "Toeplitz correlation")->capture_default_str();
    simulate->add_option("--sparsity", sim.sparsity, "non-zero entries of beta (default: all)");
    simulate->add_option("--fraction", sim.cfg.outlier_fraction, "outlier fraction")->capture_default_str();
    simulate->add_option("--magnitude", sim.magnitude, "low, high or a number")->capture_default_str();
    simulate->add_option("--sigma", sim.cfg.sigma, "noise level")->capture_default_str();
    simulate->add_option("--seed", sim.cfg.seed, "random seed")->capture_default_str();
    simulate->add_flag("--random-sign", sim.cfg.random_sign, "draw outlier signs at random");

    FitArgs fit;
    auto* fitcmd = app.add_subcommand("fit", "fit one procedure and print a JSON result");
    fitcmd->add_option("--config", config_file, "flat key=value file; flags take precedence");
    fit.data.attach(*fitcmd);
    fitcmd->add_option("--method", fit.method, "eslope, elasso, ipod, lassocv or slope-concat")->capture_default_str();
    fitcmd->add_option("--q", fit.q, "target FDR level of the BH weights")->capture_default_str();
    fitcmd->add_option("--eps", fit.eps, "weight inflation")->capture_default_str();
    fitcmd->add_option("--sigma", fit.sigma, "'auto' or a noise level")->capture_default_str();
    fitcmd->add_option("--beta-penalty", fit.beta_penalty, "none, slope or auto (slope when p >= n)")
        ->check(CLI::IsMember({"none", "slope", "auto"}))
        ->capture_default_str();
    fitcmd->add_flag("--debias", fit.debias, "add least-squares refits outside the detected outliers");
    fitcmd->add_option("--grid-size", fit.grid_size, "levels in the ipod/lassocv grid")->capture_default_str();
    fitcmd->add_option("--folds", fit.folds, "lassocv folds")->capture_default_str();
    fitcmd->add_option("--cv-seed", fit.cv_seed, "lassocv fold seed")->capture_default_str();
    fitcmd->add_option("--max-iter", fit.max_iter, "solver iteration cap")->capture_default_str();
    fitcmd->add_option("--tol", fit.tol, "relative objective tolerance")->capture_default_str();
    fitcmd->add_option("--out", fit.out, "output file (default stdout)");

    BenchArgs bench;
    bench.jobs = default_jobs();
    auto* benchcmd = app.add_subcommand("bench", "run the simulation study and write metric tables");
    benchcmd->add_option("--config", config_file, "flat key=value file; flags take precedence");
    benchcmd->add_option("--setting", bench.setting, "1, 2 or custom")->capture_default_str();
    benchcmd->add_option("--n", bench.n, "sample size")->capture_default_str();
    benchcmd->add_option("--p", bench.p, "covariates (custom setting)")->capture_default_str();
    benchcmd->add_option("--rho", bench.rho, "Toeplitz correlation (custom setting)")->capture_default_str();
    benchcmd->add_option("--sparsity", bench.sparsity, "beta sparsity (custom setting)");
    benchcmd->add_option("--magnitude", bench.magnitude, "low, high or a number");
    benchcmd->add_option("--fractions", bench.fractions, "outlier fractions")->delimiter(',')->capture_default_str();
    benchcmd->add_option("--reps", bench.reps, "replications per fraction")->capture_default_str();
    benchcmd->add_option("--q", bench.q, "target FDR level")->capture_default_str();
    benchcmd->add_option("--eps", bench.eps, "weight inflation")->capture_default_str();
    benchcmd->add_option("--seed", bench.seed, "master seed")->capture_default_str();
    benchcmd->add_option("--methods", bench.methods, "methods to run")->delimiter(',');
    benchcmd->add_option("--sigma", bench.sigma, "'auto' or the known noise level")->capture_default_str();
    benchcmd->add_flag("--random-sign", bench.random_sign, "draw outlier signs at random");
    benchcmd->add_option("--jobs", bench.jobs, "worker threads (env ESLOPE_JOBS)")->capture_default_str();
    benchcmd->add_flag("--no-runtime", bench.no_runtime, "write NA for runtimes (byte-reproducible output)");
    benchcmd->add_option("--grid-size", bench.grid_size, "levels in the ipod/lassocv grid")->capture_default_str();
    benchcmd->add_option("--out", bench.out, "per-replication CSV (default stdout)");
    benchcmd->add_option("--summary", bench.summary, "aggregated CSV");

    PathArgs path;
    auto* pathcmd = app.add_subcommand("path", "regularization path of the outlier estimates");
    pathcmd->add_option("--config", config_file, "flat key=value file; flags take precedence");
    path.data.attach(*pathcmd);
    pathcmd->add_option("--method", path.method, "slope or lasso")->capture_default_str();
    pathcmd->add_option("--q", path.q, "target FDR level of the BH weights")->capture_default_str();
    pathcmd->add_option("--beta-penalty", path.beta_penalty, "none, slope or auto")
        ->check(CLI::IsMember({"none", "slope", "auto"}))
        ->capture_default_str();
    pathcmd->add_option("--levels", path.levels, "noise levels to fit at")->delimiter(',');
    pathcmd->add_option("--grid-size", path.grid_size, "automatic grid length")->capture_default_str();
    pathcmd->add_option("--min-ratio", path.min_ratio, "smallest level relative to the largest")->capture_default_str();
    pathcmd->add_option("--out", path.out, "path CSV (default stdout)");

    try {
        auto args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        // Help requests exit 0; everything else is a usage error.
        if (app.exit(e) == 0) return 0;
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(sim);
        if (*fitcmd) return run_fit(fit);
        if (*benchcmd) return run_bench_cmd(bench);
        if (*pathcmd) return run_path(path);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
