#include "eslope/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eslope/detail/prox_grad.hpp"
#include "eslope/errors.hpp"
#include "eslope/weights.hpp"

namespace eslope {

namespace {

void check_shapes(const Dataset& data, const Vector& beta, const Vector& mu)
{
    detail::require_same_size(static_cast<std::size_t>(beta.size()), data.p(), "beta");
    detail::require_same_size(static_cast<std::size_t>(mu.size()), data.n(), "mu");
}

void soft_threshold(const Vector& v, double level, Vector& out)
{
    out = v.array().sign() * (v.array().abs() - level).max(0.0);
}

// Slack of -grad against the subdifferential of level-weighted sorted l1 at z:
// dual infeasibility, or complementarity gap J(z) - <g, z> relative to ||z||_1.
double slope_kkt(const Vector& z, const Vector& g, const Vector& weights)
{
    const double excess = detail::dual_excess(g, weights);
    const double gap = detail::sorted_l1_norm(z, weights) - g.dot(z);
    return std::max(excess, std::abs(gap) / std::max(1.0, z.lpNorm<1>()));
}

double l1_kkt(const Vector& z, const Vector& g, double level)
{
    // Prefix-sum excess against constant weights, as dual_feasible measures it.
    const double excess = (g.array().abs() - level).max(0.0).sum();
    const double gap = level * z.lpNorm<1>() - g.dot(z);
    return std::max(excess, std::abs(gap) / std::max(1.0, z.lpNorm<1>()));
}

double linf(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Halved objective: 0.5 ||y - X beta - mu||^2 + rho1 J(beta) + rho2 J(mu) over z = (beta, mu).
class JointProblem {
public:
    JointProblem(const Dataset& data, const PenaltySpec& pen)
        : X_(data.X()), y_(data.y()), p_(data.X().cols()), n_(data.X().rows()), beta_pen_(pen.beta),
          mu_weights_(pen.mu.weights.values() * pen.mu.scale)
    {
        if (const auto* s = std::get_if<SlopePenalty>(&beta_pen_)) {
            beta_weights_ = s->weights.values() * s->scale;
        }
    }

    double smooth(const Vector& z, Vector& grad) const
    {
        Vector r = y_ - z.tail(n_);
        if (p_ > 0) {
            r.noalias() -= X_ * z.head(p_);
        }
        grad.resize(p_ + n_);
        if (p_ > 0) {
            grad.head(p_).noalias() = -(X_.transpose() * r);
        }
        grad.tail(n_) = -r;
        return 0.5 * r.squaredNorm();
    }

    double penalty(const Vector& z) const
    {
        double value = detail::sorted_l1_norm(z.tail(n_), mu_weights_);
        if (const auto* l1 = std::get_if<L1Penalty>(&beta_pen_)) {
            value += l1->nu * z.head(p_).lpNorm<1>();
        } else if (std::holds_alternative<SlopePenalty>(beta_pen_)) {
            value += detail::sorted_l1_norm(z.head(p_), beta_weights_);
        }
        return value;
    }

    void prox(const Vector& v, double step, Vector& out) const
    {
        out.resize(v.size());
        Vector block;
        detail::prox_sorted_l1(v.tail(n_), mu_weights_ * step, block);
        out.tail(n_) = block;
        if (p_ == 0) {
            return;
        }
        if (const auto* l1 = std::get_if<L1Penalty>(&beta_pen_)) {
            soft_threshold(v.head(p_), l1->nu * step, block);
            out.head(p_) = block;
        } else if (std::holds_alternative<SlopePenalty>(beta_pen_)) {
            detail::prox_sorted_l1(v.head(p_), beta_weights_ * step, block);
            out.head(p_) = block;
        } else {
            out.head(p_) = v.head(p_);
        }
    }

    double kkt_residual(const Vector& z, const Vector& grad) const
    {
        return std::max(beta_kkt(z, grad), mu_kkt(z, grad));
    }

    double beta_kkt(const Vector& z, const Vector& grad) const
    {
        if (p_ == 0) {
            return 0.0;
        }
        const Vector g = -grad.head(p_);
        if (const auto* l1 = std::get_if<L1Penalty>(&beta_pen_)) {
            return l1_kkt(z.head(p_), g, l1->nu);
        }
        if (std::holds_alternative<SlopePenalty>(beta_pen_)) {
            return slope_kkt(z.head(p_), g, beta_weights_);
        }
        return linf(g);
    }

    double mu_kkt(const Vector& z, const Vector& grad) const
    {
        return slope_kkt(z.tail(n_), -grad.tail(n_), mu_weights_);
    }

    // Dual-feasibility flags on the residual r = y - X beta - mu.
    bool beta_feasible(const Vector& r, double tol) const
    {
        if (p_ == 0) {
            return true;
        }
        const Vector g = X_.transpose() * r;
        if (const auto* l1 = std::get_if<L1Penalty>(&beta_pen_)) {
            return linf(g) <= l1->nu + tol;
        }
        if (std::holds_alternative<SlopePenalty>(beta_pen_)) {
            return detail::dual_excess(g, beta_weights_) <= tol;
        }
        return linf(g) <= tol;
    }

    bool mu_feasible(const Vector& r, double tol) const
    {
        return detail::dual_excess(r, mu_weights_) <= tol;
    }

private:
    const Matrix& X_;
    const Vector& y_;
    Eigen::Index p_;
    Eigen::Index n_;
    BetaPenalty beta_pen_;
    Vector beta_weights_;
    Vector mu_weights_;
};

// 0.5 ||y - Z gamma||^2 + J_w(gamma), Z = [X I].
class ConcatProblem {
public:
    ConcatProblem(const Dataset& data, const Vector& weights)
        : X_(data.X()), y_(data.y()), p_(data.X().cols()), n_(data.X().rows()), weights_(weights)
    {
    }

    double smooth(const Vector& z, Vector& grad) const
    {
        Vector r = y_ - z.tail(n_);
        if (p_ > 0) {
            r.noalias() -= X_ * z.head(p_);
        }
        grad.resize(p_ + n_);
        if (p_ > 0) {
            grad.head(p_).noalias() = -(X_.transpose() * r);
        }
        grad.tail(n_) = -r;
        return 0.5 * r.squaredNorm();
    }

    double penalty(const Vector& z) const { return detail::sorted_l1_norm(z, weights_); }

    void prox(const Vector& v, double step, Vector& out) const
    {
        detail::prox_sorted_l1(v, weights_ * step, out);
    }

    double kkt_residual(const Vector& z, const Vector& grad) const
    {
        return slope_kkt(z, -grad, weights_);
    }

private:
    const Matrix& X_;
    const Vector& y_;
    Eigen::Index p_;
    Eigen::Index n_;
    const Vector& weights_;
};

detail::ProxGradOptions engine_options(const FitOptions& opts)
{
    if (opts.max_iter < 1 || !(opts.tol >= 0.0) || !(opts.kkt_tol >= 0.0)) {
        throw DomainError("FitOptions: max_iter must be positive and tolerances non-negative");
    }
    detail::ProxGradOptions e;
    e.max_iter = opts.max_iter;
    e.tol = opts.tol;
    e.kkt_tol = opts.kkt_tol;
    e.accelerate = opts.accelerate;
    e.restart = opts.restart;
    e.backtracking = opts.backtracking;
    return e;
}

Vector residual(const Dataset& data, const Vector& beta, const Vector& mu)
{
    Vector r = data.y() - mu;
    if (data.p() > 0) {
        r.noalias() -= data.X() * beta;
    }
    return r;
}

FitResult run_joint(const Dataset& data, const PenaltySpec& pen, const FitOptions& opts,
                    std::vector<double>* trace)
{
    pen.validate(data.n(), data.p());
    FitResult result;
    if (!data.column_normalized()) {
        result.warnings.emplace_back("design columns are not flagged as normalized");
    }
    const auto p = static_cast<Eigen::Index>(data.p());
    const auto n = static_cast<Eigen::Index>(data.n());

    JointProblem problem(data, pen);
    Vector z = Vector::Zero(p + n);
    const auto outcome =
        detail::minimize(problem, z, lipschitz_bound(data.X()), engine_options(opts), trace);
    if (trace) {
        // The engine works on the halved objective.
        for (auto& v : *trace) {
            v *= 2.0;
        }
    }

    result.beta_hat = z.head(p);
    result.mu_hat = z.tail(n);
    result.outlier_support = support_of(result.mu_hat);
    result.objective = objective_value(data, result.beta_hat, result.mu_hat, pen);
    result.iterations = outcome.iterations;
    result.converged = outcome.converged;
    const Vector r = residual(data, result.beta_hat, result.mu_hat);
    result.kkt_beta_ok = problem.beta_feasible(r, opts.kkt_tol);
    result.kkt_mu_ok = problem.mu_feasible(r, opts.kkt_tol);
    return result;
}

} // namespace

double objective_value(const Dataset& data, const Vector& beta, const Vector& mu,
                       const PenaltySpec& pen)
{
    check_shapes(data, beta, mu);
    pen.validate(data.n(), data.p());
    double value = residual(data, beta, mu).squaredNorm();
    value += 2.0 * pen.mu.scale * sorted_l1_norm(mu, pen.mu.weights);
    if (const auto* l1 = std::get_if<L1Penalty>(&pen.beta)) {
        value += 2.0 * l1->nu * beta.lpNorm<1>();
    } else if (const auto* s = std::get_if<SlopePenalty>(&pen.beta)) {
        value += 2.0 * s->scale * sorted_l1_norm(beta, s->weights);
    }
    return value;
}

double lipschitz_bound(const Matrix& X)
{
    if (X.size() == 0) {
        return 1.0;
    }
    // Power iteration on the smaller Gram matrix, applied through X.
    const bool tall = X.rows() >= X.cols();
    const Eigen::Index dim = tall ? X.cols() : X.rows();
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Vector w = tall ? Vector(X.transpose() * (X * v)) : Vector(X * (X.transpose() * v));
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) {
            return 1.0;
        }
        v = w / norm;
        if (std::abs(next - estimate) <= 1e-12 * std::abs(next)) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return estimate + 1.0;
}

FitResult fit_joint(const Dataset& data, const PenaltySpec& pen, const FitOptions& opts)
{
    return run_joint(data, pen, opts, nullptr);
}

FitResult fit_joint_traced(const Dataset& data, const PenaltySpec& pen, const FitOptions& opts,
                           std::vector<double>& objective_trace)
{
    objective_trace.clear();
    return run_joint(data, pen, opts, &objective_trace);
}

FitResult fit_concatenated_slope(const Dataset& data, const WeightSequence& weights,
                                 const FitOptions& opts)
{
    detail::require_same_size(weights.size(), data.n() + data.p(), "concatenated weights");
    const auto p = static_cast<Eigen::Index>(data.p());
    const auto n = static_cast<Eigen::Index>(data.n());

    FitResult result;
    if (!data.column_normalized()) {
        result.warnings.emplace_back("design columns are not flagged as normalized");
    }
    ConcatProblem problem(data, weights.values());
    Vector z = Vector::Zero(p + n);
    const auto outcome =
        detail::minimize(problem, z, lipschitz_bound(data.X()), engine_options(opts));

    result.beta_hat = z.head(p);
    result.mu_hat = z.tail(n);
    result.outlier_support = support_of(result.mu_hat);
    result.iterations = outcome.iterations;
    result.converged = outcome.converged;

    const Vector r = residual(data, result.beta_hat, result.mu_hat);
    Vector g(p + n);
    if (p > 0) {
        g.head(p) = data.X().transpose() * r;
    }
    g.tail(n) = r;
    const bool ok = dual_feasible(g, weights, opts.kkt_tol);
    result.kkt_beta_ok = ok;
    result.kkt_mu_ok = ok;
    result.objective = r.squaredNorm() + 2.0 * sorted_l1_norm(z, weights);
    return result;
}

FitResult e_slope(const Dataset& data, double sigma, const ESlopeOptions& opts)
{
    PenaltySpec pen{NoPenalty{}, SlopePenalty{inflate(bh_weights(data.n(), opts.q, sigma), opts.eps), 1.0}};
    if (opts.penalize_beta) {
        if (data.p() == 0) {
            throw DomainError("e_slope: cannot penalize an empty beta");
        }
        pen.beta = SlopePenalty{inflate(bh_weights(data.p(), opts.q, sigma), opts.eps), 1.0};
    }
    return fit_joint(data, pen, opts.fit);
}

PenaltySpec no_beta_penalty(std::size_t n, double sigma, double rho)
{
    return PenaltySpec{NoPenalty{}, SlopePenalty{slope_log_weights(n, sigma), rho}};
}

PenaltySpec l1_beta_penalty(std::size_t n, std::size_t p, double sigma, double rho)
{
    if (p < 2) {
        throw DomainError("l1_beta_penalty: nu = 4 sigma sqrt(log p) needs p >= 2");
    }
    const double nu = 4.0 * sigma * std::sqrt(std::log(static_cast<double>(p)));
    return PenaltySpec{L1Penalty{nu}, SlopePenalty{slope_log_weights(n, sigma), rho}};
}

PenaltySpec two_slope_penalty(std::size_t n, std::size_t p, double sigma, double rho)
{
    return PenaltySpec{SlopePenalty{slope_log_weights(p, sigma), rho},
                       SlopePenalty{slope_log_weights(n, sigma), rho}};
}

DebiasedFit debias(const Dataset& data, const IndexSet& outlier_support)
{
    const auto n = data.n();
    const auto p = data.p();
    std::vector<bool> flagged(n, false);
    for (auto i : outlier_support) {
        if (i >= n) {
            throw DomainError("debias: support index out of range");
        }
        flagged[i] = true;
    }
    std::vector<Eigen::Index> kept;
    for (std::size_t i = 0; i < n; ++i) {
        if (!flagged[i]) {
            kept.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (kept.size() < p) {
        throw DomainError("debias: fewer clean rows (" + std::to_string(kept.size()) +
                          ") than coefficients (" + std::to_string(p) + ")");
    }

    DebiasedFit out{Vector::Zero(static_cast<Eigen::Index>(p)),
                    Vector::Zero(static_cast<Eigen::Index>(n))};
    if (p > 0) {
        const Matrix Xs = data.X()(kept, Eigen::all);
        const Vector ys = data.y()(kept);
        Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
        if (qr.rank() < static_cast<Eigen::Index>(p)) {
            throw NumericalError("debias: reduced design is rank deficient");
        }
        out.beta = qr.solve(ys);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (flagged[i]) {
            const auto ii = static_cast<Eigen::Index>(i);
            out.mu[ii] = data.y()[ii] - (p > 0 ? data.X().row(ii).dot(out.beta) : 0.0);
        }
    }
    return out;
}

} // namespace eslope
