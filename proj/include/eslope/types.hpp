#pragma once
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eslope/sorted_l1.hpp"

namespace eslope {

/// Sorted, zero-based observation indices.
using IndexSet = std::vector<std::size_t>;

/// |values_i| > kSupportThreshold counts as a discovery.
inline constexpr double kSupportThreshold = 1e-8;

IndexSet support_of(const Vector& values, double threshold = kSupportThreshold);

struct GroundTruth {
    Vector beta;
    Vector mu;
    IndexSet support;
};

/// Design X (n x p), response y and, for simulated data, the true parameters.
/// Immutable after construction.
class Dataset {
public:
    /// Validates shapes and finiteness. When `column_normalized` is set every
    /// column of X must have unit l2 norm to 1e-10.
    Dataset(Matrix X, Vector y, bool column_normalized, std::optional<GroundTruth> truth = {});

    /// Scales each non-zero column of X to unit norm and flags the result.
    static Dataset normalized(Matrix X, Vector y, std::optional<GroundTruth> truth = {});

    const Matrix& X() const noexcept { return X_; }
    const Vector& y() const noexcept { return y_; }
    bool column_normalized() const noexcept { return column_normalized_; }
    const std::optional<GroundTruth>& truth() const noexcept { return truth_; }

    std::size_t n() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }

    /// Same design with a different response; ground truth is dropped.
    Dataset with_response(Vector y) const;

private:
    Matrix X_;
    Vector y_;
    bool column_normalized_;
    std::optional<GroundTruth> truth_;
};

struct NoPenalty {};

/// nu * ||beta||_1 (entering the objective as 2 nu ||beta||_1).
struct L1Penalty {
    double nu;
};

/// scale * J_weights (entering the objective as 2 scale J_weights).
struct SlopePenalty {
    WeightSequence weights;
    double scale = 1.0;
};

using BetaPenalty = std::variant<NoPenalty, L1Penalty, SlopePenalty>;

struct PenaltySpec {
    BetaPenalty beta;
    SlopePenalty mu;

    /// Throws DimensionError/DomainError when weights do not fit (p, n) or a
    /// level is not positive.
    void validate(std::size_t n, std::size_t p) const;
};

struct FitResult {
    Vector beta_hat;
    Vector mu_hat;
    IndexSet outlier_support;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool kkt_beta_ok = false;
    bool kkt_mu_ok = false;
    /// Penalty level picked by a tuned baseline (IPOD, LassoCV); unset otherwise.
    std::optional<double> selected_level;
    std::vector<std::string> warnings;
};

} // namespace eslope
