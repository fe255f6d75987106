#include "eslope/variance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "eslope/errors.hpp"

namespace eslope {

namespace {

// Residual scale below this (relative to |y|) is rounding noise of an exact fit.
constexpr double kExactFit = 1e-10;

double median_of(std::vector<double> v)
{
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

Vector weighted_ls(const Matrix& X, const Vector& y, const Vector& w)
{
    if (X.cols() == 0) {
        return Vector(0);
    }
    const Vector sw = w.cwiseSqrt();
    const Matrix Xw = sw.asDiagonal() * X;
    const Vector yw = sw.cwiseProduct(y);
    Eigen::ColPivHouseholderQR<Matrix> qr(Xw);
    if (qr.rank() < X.cols()) {
        throw NumericalError("huber_fit: weighted design is rank deficient");
    }
    return qr.solve(yw);
}

} // namespace

double median_absolute_deviation(const Vector& values)
{
    if (values.size() == 0) {
        throw DomainError("median_absolute_deviation: empty input");
    }
    std::vector<double> v(values.begin(), values.end());
    const double med = median_of(v);
    for (auto& x : v) {
        x = std::abs(x - med);
    }
    return median_of(std::move(v));
}

HuberFit huber_fit(const Dataset& data, const HuberOptions& opts)
{
    if (data.n() <= data.p()) {
        throw DomainError("huber_fit: requires n > p");
    }
    if (!(opts.tuning > 0.0) || opts.max_iter < 1) {
        throw DomainError("huber_fit: tuning must be positive and max_iter >= 1");
    }
    const Matrix& X = data.X();
    const Vector& y = data.y();
    const auto n = X.rows();

    HuberFit fit;
    fit.beta = weighted_ls(X, y, Vector::Ones(n));
    for (int it = 1; it <= opts.max_iter; ++it) {
        fit.iterations = it;
        const Vector r = y - X * fit.beta;
        fit.scale = median_absolute_deviation(r) * kMadToSigma;
        if (fit.scale <= kExactFit * (1.0 + y.lpNorm<Eigen::Infinity>())) {
            // Exact fit on at least half the data; nothing left to downweight.
            fit.converged = true;
            break;
        }
        const double cut = opts.tuning * fit.scale;
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = std::abs(r[i]);
            w[i] = a <= cut ? 1.0 : cut / a;
        }
        const Vector next = weighted_ls(X, y, w);
        const double change = next.size() ? (next - fit.beta).lpNorm<Eigen::Infinity>() : 0.0;
        fit.beta = next;
        if (change < opts.tol) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

SigmaEstimate robust_sigma(const Dataset& data, const HuberOptions& opts, double mad_factor)
{
    if (!(mad_factor > 0.0)) {
        throw DomainError("robust_sigma: mad_factor must be positive");
    }
    SigmaEstimate est;
    est.huber = huber_fit(data, opts);
    const Vector r = data.y() - data.X() * est.huber.beta;
    est.sigma = mad_factor * median_absolute_deviation(r);
    if (est.sigma <= kExactFit * (1.0 + data.y().lpNorm<Eigen::Infinity>())) {
        est.sigma = 0.0;
        est.degenerate = true;
    }
    return est;
}

} // namespace eslope
