#pragma once
#include <cstddef>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace eslope {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Non-increasing, non-negative penalty levels paired with the sorted
/// magnitudes of a vector. Construction validates the ordering.
class WeightSequence {
public:
    explicit WeightSequence(Vector values);
    WeightSequence(std::initializer_list<double> values);

    /// Every entry equal to `level` (an l1 penalty in sorted-l1 form).
    static WeightSequence constant(std::size_t m, double level);

    const Vector& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    /// Entries multiplied by a non-negative factor.
    WeightSequence scaled(double factor) const;

private:
    Vector values_;
};

/// J_lambda(x) = sum_j lambda_j |x|_(j) with |x|_(1) >= |x|_(2) >= ...
double sorted_l1_norm(const Vector& x, const WeightSequence& lambda);

/// argmin_z 0.5 ||v - z||^2 + J_lambda(z).
Vector prox_sorted_l1(const Vector& v, const WeightSequence& lambda);

/// Majorization test g <= lambda: every prefix sum of the sorted |g| is at most
/// the matching prefix sum of lambda (plus tol).
bool dual_feasible(const Vector& g, const WeightSequence& lambda, double tol = 1e-8);

/// Largest prefix-sum excess max_i (sum_{j<=i} |g|_(j) - sum_{j<=i} lambda_j), floored at 0.
double dual_excess(const Vector& g, const WeightSequence& lambda);

namespace detail {

// Unchecked kernels on raw weight vectors; callers guarantee sizes and ordering.
double sorted_l1_norm(const Vector& x, const Vector& lambda);
void prox_sorted_l1(const Vector& v, const Vector& lambda, Vector& out);
double dual_excess(const Vector& g, const Vector& lambda);

// Indices sorting |v| descending, ties broken by index.
std::vector<Eigen::Index> order_by_magnitude(const Vector& v);

} // namespace detail
} // namespace eslope
