#include "eslope/weights.hpp"

#include <cmath>
#include <numbers>

#include "eslope/errors.hpp"

namespace eslope {

namespace {

// Wichura's AS241 (PPND16) for the lower half, p <= 0.5.
double quantile_lower(double p)
{
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = std::sqrt(-std::log(p));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

void check_sigma(double sigma, const char* what)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError(std::string(what) + ": sigma must be positive and finite");
    }
}

} // namespace

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal_quantile: p must lie in (0, 1)");
    }
    if (p == 0.5) {
        return 0.0;
    }
    // Work in the lower tail, where the CDF is evaluated without cancellation;
    // 1 - p is exact for p >= 0.5.
    const bool upper = p > 0.5;
    const double tail = upper ? 1.0 - p : p;
    double x = quantile_lower(tail);
    const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    x -= (normal_cdf(x) - tail) / density;
    return upper ? -x : x;
}

WeightSequence slope_log_weights(std::size_t m, double sigma)
{
    if (m == 0) {
        throw DomainError("slope_log_weights: m must be positive");
    }
    check_sigma(sigma, "slope_log_weights");
    Vector w(static_cast<Eigen::Index>(m));
    const double twice_m = 2.0 * static_cast<double>(m);
    for (std::size_t i = 1; i <= m; ++i) {
        w[static_cast<Eigen::Index>(i - 1)] =
            sigma * std::sqrt(std::log(twice_m / static_cast<double>(i)));
    }
    return WeightSequence(std::move(w));
}

WeightSequence bh_weights(std::size_t m, double q, double sigma)
{
    if (m == 0) {
        throw DomainError("bh_weights: m must be positive");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("bh_weights: q must lie in (0, 1)");
    }
    check_sigma(sigma, "bh_weights");
    Vector w(static_cast<Eigen::Index>(m));
    const double twice_m = 2.0 * static_cast<double>(m);
    for (std::size_t i = 1; i <= m; ++i) {
        // Upper-tail form: Phi^{-1}(1 - a) = -Phi^{-1}(a), a = iq/2m.
        const double a = static_cast<double>(i) * q / twice_m;
        w[static_cast<Eigen::Index>(i - 1)] = -sigma * normal_quantile(a);
    }
    return WeightSequence(std::move(w));
}

WeightSequence inflate(const WeightSequence& lambda, double eps)
{
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw DomainError("inflate: eps must be non-negative");
    }
    return lambda.scaled(1.0 + eps);
}

} // namespace eslope
