#include "eslope/types.hpp"

#include <cmath>
#include <string>

#include "eslope/errors.hpp"

namespace eslope {

IndexSet support_of(const Vector& values, double threshold)
{
    IndexSet out;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (std::abs(values[i]) > threshold) {
            out.push_back(static_cast<std::size_t>(i));
        }
    }
    return out;
}

Dataset::Dataset(Matrix X, Vector y, bool column_normalized, std::optional<GroundTruth> truth)
    : X_(std::move(X)), y_(std::move(y)), column_normalized_(column_normalized),
      truth_(std::move(truth))
{
    detail::require_same_size(static_cast<std::size_t>(X_.rows()),
                              static_cast<std::size_t>(y_.size()), "Dataset: rows of X vs y");
    if (!X_.allFinite() || !y_.allFinite()) {
        throw InputError("Dataset: non-finite value in X or y");
    }
    if (column_normalized_) {
        for (Eigen::Index j = 0; j < X_.cols(); ++j) {
            if (std::abs(X_.col(j).norm() - 1.0) > 1e-10) {
                throw InputError("Dataset: column " + std::to_string(j) +
                                 " does not have unit norm");
            }
        }
    }
    if (truth_) {
        detail::require_same_size(static_cast<std::size_t>(truth_->beta.size()), p(),
                                  "Dataset: true beta");
        detail::require_same_size(static_cast<std::size_t>(truth_->mu.size()), n(),
                                  "Dataset: true mu");
        for (auto i : truth_->support) {
            if (i >= n()) {
                throw InputError("Dataset: true support index out of range");
            }
        }
    }
}

Dataset Dataset::normalized(Matrix X, Vector y, std::optional<GroundTruth> truth)
{
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (norm == 0.0) {
            throw InputError("Dataset::normalized: column " + std::to_string(j) + " is zero");
        }
        X.col(j) /= norm;
    }
    return Dataset(std::move(X), std::move(y), true, std::move(truth));
}

Dataset Dataset::with_response(Vector y) const
{
    return Dataset(X_, std::move(y), column_normalized_);
}

void PenaltySpec::validate(std::size_t n, std::size_t p) const
{
    detail::require_same_size(mu.weights.size(), n, "PenaltySpec: mu weights");
    if (!(mu.scale > 0.0)) {
        throw DomainError("PenaltySpec: mu scale must be positive");
    }
    if (const auto* l1 = std::get_if<L1Penalty>(&beta)) {
        if (!(l1->nu > 0.0)) {
            throw DomainError("PenaltySpec: nu must be positive");
        }
    } else if (const auto* slope = std::get_if<SlopePenalty>(&beta)) {
        detail::require_same_size(slope->weights.size(), p, "PenaltySpec: beta weights");
        if (!(slope->scale > 0.0)) {
            throw DomainError("PenaltySpec: beta scale must be positive");
        }
    }
}

} // namespace eslope
