#include "eslope/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "eslope/detail/prox_grad.hpp"
#include "eslope/errors.hpp"
#include "eslope/random.hpp"
#include "eslope/weights.hpp"

namespace eslope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void soft_threshold(const Vector& v, double level, Vector& out)
{
    out = v.array().sign() * (v.array().abs() - level).max(0.0);
}

double l1_kkt(const Vector& z, const Vector& g, double level)
{
    // Prefix-sum excess against constant weights, as dual_feasible measures it.
    const double excess = (g.array().abs() - level).max(0.0).sum();
    const double gap = level * z.lpNorm<1>() - g.dot(z);
    return std::max(excess, std::abs(gap) / std::max(1.0, z.lpNorm<1>()));
}

void check_grid(const std::vector<double>& grid, const char* what)
{
    if (grid.empty()) {
        throw DomainError(std::string(what) + ": empty level grid");
    }
    for (double level : grid) {
        if (!(level > 0.0) || !std::isfinite(level)) {
            throw DomainError(std::string(what) + ": grid levels must be positive");
        }
    }
}

// Orthonormal basis of the column space of X (thin Q), rank-checked.
Matrix column_basis(const Matrix& X)
{
    if (X.cols() == 0) {
        return Matrix(X.rows(), 0);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < X.cols()) {
        throw NumericalError("design matrix is rank deficient");
    }
    return qr.householderQ() * Matrix::Identity(X.rows(), X.cols());
}

// 0.5 ||M (y - mu)||^2 + level ||mu||_1 with M = I - Q Q^T.
class ProjectedLasso {
public:
    ProjectedLasso(const Matrix& basis, const Vector& y, double level)
        : Q_(basis), y_(y), level_(level)
    {
    }

    Vector project(const Vector& v) const
    {
        if (Q_.cols() == 0) {
            return v;
        }
        return v - Q_ * (Q_.transpose() * v);
    }

    double smooth(const Vector& mu, Vector& grad) const
    {
        const Vector r = project(y_ - mu);
        grad = -r;
        return 0.5 * r.squaredNorm();
    }

    double penalty(const Vector& mu) const { return level_ * mu.lpNorm<1>(); }

    void prox(const Vector& v, double step, Vector& out) const
    {
        soft_threshold(v, level_ * step, out);
    }

    double kkt_residual(const Vector& mu, const Vector& grad) const
    {
        return l1_kkt(mu, -grad, level_);
    }

private:
    const Matrix& Q_;
    const Vector& y_;
    double level_;
};

// 0.5 ||b - A mu||^2 + level ||mu||_1 for an explicit design A.
class DenseLasso {
public:
    DenseLasso(const Matrix& A, const Vector& b, double level) : A_(A), b_(b), level_(level) {}

    double smooth(const Vector& mu, Vector& grad) const
    {
        const Vector r = b_ - A_ * mu;
        grad.noalias() = -(A_.transpose() * r);
        return 0.5 * r.squaredNorm();
    }

    double penalty(const Vector& mu) const { return level_ * mu.lpNorm<1>(); }

    void prox(const Vector& v, double step, Vector& out) const
    {
        soft_threshold(v, level_ * step, out);
    }

    double kkt_residual(const Vector& mu, const Vector& grad) const
    {
        return l1_kkt(mu, -grad, level_);
    }

private:
    const Matrix& A_;
    const Vector& b_;
    double level_;
};

detail::ProxGradOptions engine_options(const FitOptions& opts)
{
    detail::ProxGradOptions e;
    e.max_iter = opts.max_iter;
    e.tol = opts.tol;
    e.kkt_tol = opts.kkt_tol;
    e.accelerate = opts.accelerate;
    e.restart = opts.restart;
    e.backtracking = opts.backtracking;
    return e;
}

struct Refit {
    Vector beta;
    double rss = kInf;
    /// The kept rows determine beta (at least p of them, full column rank).
    bool determined = false;
    /// Also eligible for the BIC: at most half the rows flagged, residual degrees of freedom left.
    bool admissible = false;
};

// OLS on rows outside `support`; RSS over those rows.
Refit refit_outside(const Dataset& data, const IndexSet& support)
{
    const auto n = data.n();
    const auto p = data.p();
    Refit out;
    out.beta = Vector::Zero(static_cast<Eigen::Index>(p));
    if (n - support.size() < p) {
        return out;
    }
    const bool bic_eligible = support.size() <= n / 2 && n - support.size() > p;
    std::vector<bool> flagged(n, false);
    for (auto i : support) {
        flagged[i] = true;
    }
    std::vector<Eigen::Index> kept;
    kept.reserve(n - support.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!flagged[i]) {
            kept.push_back(static_cast<Eigen::Index>(i));
        }
    }
    const Vector ys = data.y()(kept);
    if (p == 0) {
        out.rss = ys.squaredNorm();
        out.determined = true;
        out.admissible = bic_eligible;
        return out;
    }
    const Matrix Xs = data.X()(kept, Eigen::all);
    Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        return out;
    }
    out.beta = qr.solve(ys);
    out.rss = (ys - Xs * out.beta).squaredNorm();
    out.determined = true;
    out.admissible = bic_eligible;
    return out;
}

std::vector<std::size_t> descending_order(const std::vector<double>& grid)
{
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&grid](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
    return order;
}

void require_low_dimensional(const Dataset& data, const char* what)
{
    if (data.p() >= data.n()) {
        throw DomainError(std::string(what) + ": requires p < n");
    }
}

FitResult finalize_ipod(const Dataset& data, const IpodPathPoint& point, const Matrix& basis,
                        const FitOptions& opts)
{
    FitResult result;
    if (!data.column_normalized()) {
        result.warnings.emplace_back("design columns are not flagged as normalized");
    }
    const Refit refit = refit_outside(data, point.support);
    result.mu_hat = point.mu;
    result.outlier_support = point.support;
    result.iterations = point.iterations;
    result.converged = point.converged;
    result.selected_level = point.level;

    ProjectedLasso problem(basis, data.y(), point.level);
    const Vector r = problem.project(data.y() - point.mu);
    result.objective = r.squaredNorm() + 2.0 * point.level * point.mu.lpNorm<1>();
    result.kkt_mu_ok = (r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0) <= point.level + opts.kkt_tol;

    // Beta solves the normal equations of the kept rows, or of y - mu when
    // too few rows are kept to determine it.
    Vector normal;
    if (refit.determined) {
        result.beta_hat = refit.beta;
        Vector kept_residual = data.y() - data.X() * refit.beta;
        for (auto i : point.support) {
            kept_residual[static_cast<Eigen::Index>(i)] = 0.0;
        }
        normal = data.X().transpose() * kept_residual;
    } else {
        result.warnings.emplace_back("selected support leaves too few rows for an OLS refit; beta fitted to y - mu");
        const Vector target = data.y() - point.mu;
        result.beta_hat = data.X().colPivHouseholderQr().solve(target);
        normal = data.X().transpose() * (target - data.X() * result.beta_hat);
    }
    result.kkt_beta_ok = normal.size() == 0 ||
                         normal.lpNorm<Eigen::Infinity>() <= opts.kkt_tol * std::max(1.0, data.y().norm());
    return result;
}

} // namespace

std::vector<double> default_level_grid(std::size_t n, double sigma, std::size_t count)
{
    if (n < 2 || count == 0 || !(sigma > 0.0)) {
        throw DomainError("default_level_grid: need n >= 2, count >= 1 and sigma > 0");
    }
    const double universal = sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
    const double hi = std::log(10.0 * universal);
    const double lo = std::log(universal / 100.0);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = std::exp(hi + t * (lo - hi));
    }
    return grid;
}

FitResult fit_e_lasso(const Dataset& data, double sigma, const FitOptions& opts)
{
    if (!(sigma > 0.0)) {
        throw DomainError("fit_e_lasso: sigma must be positive");
    }
    if (data.p() == 0) {
        throw DomainError("fit_e_lasso: needs p >= 1");
    }
    const double level_beta = 2.0 * sigma * std::sqrt(std::log(static_cast<double>(data.p())));
    const double level_mu = 2.0 * sigma * std::sqrt(std::log(static_cast<double>(data.n())));
    PenaltySpec pen{SlopePenalty{WeightSequence::constant(data.p(), level_beta), 1.0},
                    SlopePenalty{WeightSequence::constant(data.n(), level_mu), 1.0}};
    return fit_joint(data, pen, opts);
}

Matrix qr_complement(const Matrix& X)
{
    const auto n = X.rows();
    const auto p = X.cols();
    if (p >= n) {
        throw DomainError("qr_complement: requires p < n");
    }
    if (p == 0) {
        return Matrix::Identity(n, n);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < p) {
        throw NumericalError("qr_complement: design matrix is rank deficient");
    }
    const Matrix Q = qr.householderQ();
    return Q.rightCols(n - p);
}

double ipod_bic(std::size_t n, double rss, std::size_t support_size)
{
    if (n == 0) {
        throw DomainError("ipod_bic: n must be positive");
    }
    const double nd = static_cast<double>(n);
    const double scaled = std::max(rss / nd, std::numeric_limits<double>::min());
    return nd * std::log(scaled) + static_cast<double>(support_size) * std::log(nd);
}

std::vector<IpodPathPoint> ipod_path(const Dataset& data, const std::vector<double>& grid,
                                     const FitOptions& opts)
{
    check_grid(grid, "ipod_path");
    require_low_dimensional(data, "ipod_path");
    const Matrix basis = column_basis(data.X());
    const auto n = static_cast<Eigen::Index>(data.n());

    std::vector<IpodPathPoint> path(grid.size());
    Vector mu = Vector::Zero(n);
    for (auto idx : descending_order(grid)) {
        ProjectedLasso problem(basis, data.y(), grid[idx]);
        // M = I - QQ^T is a projection, so the gradient is 1-Lipschitz.
        const auto outcome = detail::minimize(problem, mu, 1.0, engine_options(opts));
        IpodPathPoint& point = path[idx];
        point.level = grid[idx];
        point.mu = mu;
        point.support = support_of(mu);
        point.converged = outcome.converged;
        point.iterations = outcome.iterations;
        const Refit refit = refit_outside(data, point.support);
        point.beta_refit = refit.beta;
        point.rss = refit.rss;
        point.bic = refit.admissible ? ipod_bic(data.n(), refit.rss, point.support.size()) : kInf;
    }
    return path;
}

FitResult fit_ipod(const Dataset& data, double sigma, const std::vector<double>& grid,
                   const FitOptions& opts)
{
    if (!(sigma > 0.0)) {
        throw DomainError("fit_ipod: sigma must be positive");
    }
    const auto path = ipod_path(data, grid, opts);
    // Ties go to the larger level.
    std::size_t best = path.size();
    for (auto idx : descending_order(grid)) {
        if (best == path.size() || path[idx].bic < path[best].bic) {
            best = idx;
        }
    }
    FitResult result = finalize_ipod(data, path[best], column_basis(data.X()), opts);
    if (!std::isfinite(path[best].bic)) {
        result.warnings.emplace_back("no grid level produced an admissible BIC");
    }
    return result;
}

FitResult fit_ipod(const Dataset& data, double sigma, const FitOptions& opts)
{
    return fit_ipod(data, sigma, default_level_grid(data.n(), sigma), opts);
}

std::vector<double> lasso_cv_errors(const Dataset& data, const std::vector<double>& grid,
                                    const LassoCvOptions& opts)
{
    check_grid(grid, "lasso_cv_errors");
    require_low_dimensional(data, "lasso_cv_errors");
    const auto m = static_cast<std::size_t>(data.n() - data.p());
    if (opts.folds < 2 || static_cast<std::size_t>(opts.folds) > m) {
        throw DomainError("lasso_cv_errors: folds must lie in [2, n - p]");
    }
    const Matrix P = qr_complement(data.X());
    const Matrix A = P.transpose();
    const Vector b = A * data.y();

    std::vector<std::size_t> rows(m);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    Rng rng(opts.seed);
    rng.shuffle(rows);
    std::vector<int> fold_of(m);
    for (std::size_t k = 0; k < m; ++k) {
        fold_of[rows[k]] = static_cast<int>(k % static_cast<std::size_t>(opts.folds));
    }

    const auto order = descending_order(grid);
    std::vector<double> errors(grid.size(), 0.0);
    for (int fold = 0; fold < opts.folds; ++fold) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t j = 0; j < m; ++j) {
            (fold_of[j] == fold ? test : train).push_back(static_cast<Eigen::Index>(j));
        }
        const Matrix A_train = A(train, Eigen::all);
        const Vector b_train = b(train);
        const Matrix A_test = A(test, Eigen::all);
        const Vector b_test = b(test);
        Vector mu = Vector::Zero(static_cast<Eigen::Index>(data.n()));
        for (auto idx : order) {
            DenseLasso problem(A_train, b_train, grid[idx]);
            // Rows of A are orthonormal, so ||A_train|| <= 1.
            detail::minimize(problem, mu, 1.0, engine_options(opts.fit));
            errors[idx] += (b_test - A_test * mu).squaredNorm();
        }
    }
    for (auto& e : errors) {
        e /= static_cast<double>(m);
    }
    return errors;
}

FitResult fit_lasso_cv(const Dataset& data, const std::vector<double>& grid,
                       const LassoCvOptions& opts, const FitOptions& final_opts)
{
    const auto errors = lasso_cv_errors(data, grid, opts);
    std::size_t best = grid.size();
    for (auto idx : descending_order(grid)) {
        if (best == grid.size() || errors[idx] < errors[best]) {
            best = idx;
        }
    }
    const auto path = ipod_path(data, {grid[best]}, final_opts);
    return finalize_ipod(data, path.front(), column_basis(data.X()), final_opts);
}

FitResult fit_slope_concat(const Dataset& data, double sigma, double q, const FitOptions& opts)
{
    return fit_concatenated_slope(data, bh_weights(data.n() + data.p(), q, sigma), opts);
}

} // namespace eslope
