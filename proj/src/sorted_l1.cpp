#include "eslope/sorted_l1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eslope/errors.hpp"

namespace eslope {

WeightSequence::WeightSequence(Vector values) : values_(std::move(values))
{
    if (values_.size() == 0) {
        throw DomainError("WeightSequence: empty");
    }
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            throw DomainError("WeightSequence: entry " + std::to_string(i) +
                              " is negative or not finite");
        }
        if (i > 0 && values_[i] > values_[i - 1]) {
            throw DomainError("WeightSequence: entries must be non-increasing (index " +
                              std::to_string(i) + ")");
        }
    }
}

WeightSequence::WeightSequence(std::initializer_list<double> values)
    : WeightSequence(Vector(Eigen::Map<const Vector>(values.begin(),
                                                     static_cast<Eigen::Index>(values.size()))))
{
}

WeightSequence WeightSequence::constant(std::size_t m, double level)
{
    return WeightSequence(Vector::Constant(static_cast<Eigen::Index>(m), level));
}

WeightSequence WeightSequence::scaled(double factor) const
{
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        throw DomainError("WeightSequence::scaled: factor must be finite and non-negative");
    }
    return WeightSequence(Vector(values_ * factor));
}

namespace detail {

std::vector<Eigen::Index> order_by_magnitude(const Vector& v)
{
    std::vector<Eigen::Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&v](Eigen::Index a, Eigen::Index b) {
        return std::abs(v[a]) > std::abs(v[b]);
    });
    return order;
}

double sorted_l1_norm(const Vector& x, const Vector& lambda)
{
    Vector mags = x.cwiseAbs();
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return mags.dot(lambda);
}

void prox_sorted_l1(const Vector& v, const Vector& lambda, Vector& out)
{
    const auto n = v.size();
    out.resize(n);
    if (n == 0) {
        return;
    }
    const auto order = order_by_magnitude(v);

    // Blocks of the pooled sequence |v|_(i) - lambda_i, kept non-increasing.
    std::vector<double> sum(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> start(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> len(static_cast<std::size_t>(n));
    std::size_t top = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sum[top] = std::abs(v[order[static_cast<std::size_t>(i)]]) - lambda[i];
        start[top] = i;
        len[top] = 1;
        while (top > 0 &&
               sum[top - 1] / static_cast<double>(len[top - 1]) <=
                   sum[top] / static_cast<double>(len[top])) {
            sum[top - 1] += sum[top];
            len[top - 1] += len[top];
            --top;
        }
        ++top;
    }

    for (std::size_t b = 0; b < top; ++b) {
        const double level = std::max(sum[b] / static_cast<double>(len[b]), 0.0);
        for (Eigen::Index k = start[b]; k < start[b] + len[b]; ++k) {
            const auto idx = order[static_cast<std::size_t>(k)];
            out[idx] = std::copysign(level, v[idx]);
            if (level == 0.0) {
                out[idx] = 0.0;
            }
        }
    }
}

double dual_excess(const Vector& g, const Vector& lambda)
{
    Vector mags = g.cwiseAbs();
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double excess = 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mags.size(); ++i) {
        acc += mags[i] - lambda[i];
        excess = std::max(excess, acc);
    }
    return excess;
}

} // namespace detail

double sorted_l1_norm(const Vector& x, const WeightSequence& lambda)
{
    detail::require_same_size(static_cast<std::size_t>(x.size()), lambda.size(), "sorted_l1_norm");
    return detail::sorted_l1_norm(x, lambda.values());
}

Vector prox_sorted_l1(const Vector& v, const WeightSequence& lambda)
{
    detail::require_same_size(static_cast<std::size_t>(v.size()), lambda.size(), "prox_sorted_l1");
    Vector out;
    detail::prox_sorted_l1(v, lambda.values(), out);
    return out;
}

double dual_excess(const Vector& g, const WeightSequence& lambda)
{
    detail::require_same_size(static_cast<std::size_t>(g.size()), lambda.size(), "dual_excess");
    return detail::dual_excess(g, lambda.values());
}

bool dual_feasible(const Vector& g, const WeightSequence& lambda, double tol)
{
    if (!(tol >= 0.0)) {
        throw DomainError("dual_feasible: tol must be non-negative");
    }
    return dual_excess(g, lambda) <= tol;
}

} // namespace eslope
