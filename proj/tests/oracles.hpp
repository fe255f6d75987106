#pragma once
// Test-only reference computations, independent of the library's algorithms.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double sorted_l1(const Vec& x, const Vec& w)
{
    std::vector<double> a(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        a[static_cast<std::size_t>(i)] = std::abs(x[i]);
    }
    std::sort(a.begin(), a.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += w[static_cast<Eigen::Index>(i)] * a[i];
    }
    return s;
}

inline double prox_objective(const Vec& v, const Vec& w, const Vec& z)
{
    return 0.5 * (v - z).squaredNorm() + sorted_l1(z, w);
}

/// Exact prox by enumeration. For every ordering of the coordinates and every
/// split of that ordering into consecutive blocks, the block values minimizing
/// the (then quadratic) objective are mean(|v_i| - w_rank) clamped at 0 with
/// sign(v_i). The unique minimizer is one of these candidates; the candidate
/// with the smallest true objective is returned. Feasible for dimension <= 6.
inline Vec prox_by_enumeration(const Vec& v, const Vec& w)
{
    const auto d = static_cast<int>(v.size());
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    Vec best = Vec::Zero(d);
    double best_obj = prox_objective(v, w, best);
    do {
        for (unsigned cuts = 0; cuts < (1u << std::max(d - 1, 0)); ++cuts) {
            Vec z(d);
            int start = 0;
            for (int k = 0; k < d; ++k) {
                const bool boundary = k == d - 1 || (cuts >> k) & 1u;
                if (!boundary) {
                    continue;
                }
                double acc = 0.0;
                for (int j = start; j <= k; ++j) {
                    acc += std::abs(v[perm[static_cast<std::size_t>(j)]]) - w[j];
                }
                const double level = std::max(acc / (k - start + 1), 0.0);
                for (int j = start; j <= k; ++j) {
                    const int idx = perm[static_cast<std::size_t>(j)];
                    z[idx] = v[idx] >= 0 ? level : -level;
                }
                start = k + 1;
            }
            const double obj = prox_objective(v, w, z);
            if (obj < best_obj) {
                best_obj = obj;
                best = z;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Long-horizon projected subgradient on 0.5||v - z||^2 + J_w(z), iterates
/// kept in the box |z_i| <= |v_i| (which contains the minimizer). Accurate to
/// roughly 1e-3; used as a coarse cross-check only.
inline Vec prox_by_subgradient(const Vec& v, const Vec& w, int iters = 200000)
{
    const auto d = v.size();
    Vec z = v;
    Vec avg = Vec::Zero(d);
    double weight_sum = 0.0;
    for (int k = 1; k <= iters; ++k) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&z](auto a, auto b) { return std::abs(z[a]) > std::abs(z[b]); });
        Vec g = z - v;
        for (Eigen::Index r = 0; r < d; ++r) {
            const auto i = order[static_cast<std::size_t>(r)];
            const double s = z[i] > 0 ? 1.0 : (z[i] < 0 ? -1.0 : 0.0);
            g[i] += w[r] * s;
        }
        z -= g / static_cast<double>(k);  // 1-strongly convex: step 1/k
        for (Eigen::Index i = 0; i < d; ++i) {
            z[i] = std::clamp(z[i], -std::abs(v[i]), std::abs(v[i]));
        }
        if (k > iters / 2) {
            avg += z;
            weight_sum += 1.0;
        }
    }
    return avg / weight_sum;
}

/// Standard normal CDF by its Taylor series around 0; independent of erfc and
/// accurate to ~1e-15 for |x| <= 6.
inline double normal_cdf_series(double x)
{
    double term = x;
    double sum = x;
    for (int k = 1; k < 400; ++k) {
        term *= -x * x / (2.0 * k);
        const double add = term / (2.0 * k + 1.0);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) {
            break;
        }
    }
    return 0.5 + sum / std::sqrt(2.0 * M_PI);
}

/// Inverse normal CDF by bisection on 0.5 erfc(-x / sqrt 2), working in the
/// smaller tail to avoid cancellation.
inline double quantile_by_bisection(double p)
{
    const bool upper = p > 0.5;
    const double tail = upper ? 1.0 - p : p;
    double lo = -40.0, hi = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < tail) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double x = 0.5 * (lo + hi);
    return upper ? -x : x;
}

struct LassoSolution {
    Vec beta;
    Vec mu;
    double objective;
};

/// Cyclic coordinate descent for ||y - X b - m||^2 + 2 lb ||b||_1 + 2 lm ||m||_1,
/// columns of X assumed non-zero.
inline LassoSolution joint_lasso_cd(const Mat& X, const Vec& y, double lb, double lm,
                                    int max_sweeps = 200000, double tol = 1e-14)
{
    const auto n = X.rows();
    const auto p = X.cols();
    Vec b = Vec::Zero(p), m = Vec::Zero(n);
    Vec r = y;
    auto soft = [](double a, double t) { return a > t ? a - t : (a < -t ? a + t : 0.0); };
    const Vec col_sq = X.colwise().squaredNorm().transpose();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double old = b[j];
            const double rho = X.col(j).dot(r) + col_sq[j] * old;
            b[j] = soft(rho, lb) / col_sq[j];
            if (b[j] != old) {
                r -= X.col(j) * (b[j] - old);
                change = std::max(change, std::abs(b[j] - old));
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double old = m[i];
            m[i] = soft(r[i] + old, lm);
            if (m[i] != old) {
                r[i] -= m[i] - old;
                change = std::max(change, std::abs(m[i] - old));
            }
        }
        if (change < tol) {
            break;
        }
    }
    const double obj = r.squaredNorm() + 2.0 * lb * b.lpNorm<1>() + 2.0 * lm * m.lpNorm<1>();
    return {b, m, obj};
}

/// Random non-increasing, non-negative weights.
inline Vec random_weights(std::mt19937_64& gen, Eigen::Index m, double hi = 2.0)
{
    std::uniform_real_distribution<double> u(0.0, hi);
    std::vector<double> w(static_cast<std::size_t>(m));
    for (auto& x : w) {
        x = u(gen);
    }
    std::sort(w.begin(), w.end(), std::greater<>());
    return Eigen::Map<Vec>(w.data(), m);
}

inline Vec random_vector(std::mt19937_64& gen, Eigen::Index m, double scale = 3.0)
{
    std::normal_distribution<double> z(0.0, scale);
    Vec v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        v[i] = z(gen);
    }
    return v;
}

inline Mat random_normalized_design(std::mt19937_64& gen, Eigen::Index n, Eigen::Index p)
{
    std::normal_distribution<double> z(0.0, 1.0);
    Mat X(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, j) = z(gen);
        }
        X.col(j) /= X.col(j).norm();
    }
    return X;
}

} // namespace oracle
