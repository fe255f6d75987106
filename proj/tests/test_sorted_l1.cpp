#include <doctest.h>

#include <random>

#include "eslope/errors.hpp"
#include "eslope/sorted_l1.hpp"
#include "oracles.hpp"

using namespace eslope;

namespace {

Vector vec(std::initializer_list<double> v)
{
    return Eigen::Map<const Vector>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

TEST_CASE("WeightSequence enforces its invariants")
{
    CHECK_NOTHROW(WeightSequence{2.0, 2.0, 0.0});
    const Vector empty(0);
    CHECK_THROWS_AS(WeightSequence{empty}, DomainError);
    CHECK_THROWS_AS((WeightSequence{1.0, 2.0}), DomainError);
    CHECK_THROWS_AS((WeightSequence{1.0, -0.5}), DomainError);
    CHECK_THROWS_AS(WeightSequence::constant(3, 1.0).scaled(-1.0), DomainError);
}

TEST_CASE("sorted_l1_norm examples")
{
    CHECK(sorted_l1_norm(vec({0, 0, 0}), {1, 0.5, 0.1}) == 0.0);
    CHECK(sorted_l1_norm(vec({1, -2}), {1, 1}) == doctest::Approx(3.0));
    CHECK(sorted_l1_norm(vec({3, 1}), {1, 0.5}) == doctest::Approx(3.5));
    CHECK(sorted_l1_norm(vec({1, 3}), {1, 0.5}) == doctest::Approx(3.5));
    CHECK_THROWS_AS(sorted_l1_norm(vec({1, 2}), {1}), DimensionError);
}

TEST_CASE("sorted_l1_norm is a norm")
{
    std::mt19937_64 gen(11);
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 8);
        Vector w = oracle::random_weights(gen, m);
        w[0] += 0.1;
        const WeightSequence lambda(w);
        const Vector x = oracle::random_vector(gen, m);
        const Vector y = oracle::random_vector(gen, m);
        const double c = std::uniform_real_distribution<double>(-3, 3)(gen);
        CHECK(sorted_l1_norm(x + y, lambda) <= sorted_l1_norm(x, lambda) + sorted_l1_norm(y, lambda) + 1e-12);
        CHECK(sorted_l1_norm(c * x, lambda) == doctest::Approx(std::abs(c) * sorted_l1_norm(x, lambda)));
        Vector flipped = x.reverse();
        flipped[0] = -flipped[0];
        CHECK(sorted_l1_norm(flipped, lambda) == doctest::Approx(sorted_l1_norm(x, lambda)));
    }
}

TEST_CASE("prox examples")
{
    SUBCASE("zero weights give the identity")
    {
        const Vector v = vec({1.5, -2, 0.25});
        CHECK(prox_sorted_l1(v, {0, 0, 0}).isApprox(v));
    }
    SUBCASE("v=[3,1], lambda=[1,0.5]")
    {
        const Vector expected = vec({2.0, 0.5});
        const Vector got = prox_sorted_l1(vec({3, 1}), {1, 0.5});
        CHECK((got - expected).lpNorm<Eigen::Infinity>() < 1e-14);
        CHECK((oracle::prox_by_enumeration(vec({3, 1}), vec({1, 0.5})) - expected)
                  .lpNorm<Eigen::Infinity>() < 1e-14);
    }
    SUBCASE("v=[1,1], lambda=[1.5,0.5] pools to zero")
    {
        const Vector got = prox_sorted_l1(vec({1, 1}), {1.5, 0.5});
        CHECK(got.isZero(0.0));
        CHECK(dual_feasible(vec({1, 1}), {1.5, 0.5}, 0.0));
    }
    CHECK_THROWS_AS(prox_sorted_l1(vec({1, 2}), {1}), DimensionError);
}

TEST_CASE("prox keeps signs and the ordering of magnitudes")
{
    std::mt19937_64 gen(5);
    for (int t = 0; t < 300; ++t) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 12);
        const Vector v = oracle::random_vector(gen, m);
        const WeightSequence lambda(oracle::random_weights(gen, m));
        const Vector z = prox_sorted_l1(v, lambda);
        for (Eigen::Index i = 0; i < m; ++i) {
            CHECK(z[i] * v[i] >= 0.0);
            for (Eigen::Index j = 0; j < m; ++j) {
                if (std::abs(v[i]) >= std::abs(v[j])) {
                    CHECK(std::abs(z[i]) >= std::abs(z[j]) - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("prox matches the enumeration oracle in small dimension")
{
    std::mt19937_64 gen(2024);
    for (int t = 0; t < 300; ++t) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 4);
        const Vector v = oracle::random_vector(gen, m);
        const Vector w = oracle::random_weights(gen, m, 3.0);
        const Vector got = prox_sorted_l1(v, WeightSequence(w));
        CHECK((got - oracle::prox_by_enumeration(v, w)).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("prox agrees with a projected-subgradient run to its accuracy")
{
    std::mt19937_64 gen(77);
    for (int t = 0; t < 5; ++t) {
        const Vector v = oracle::random_vector(gen, 3);
        const Vector w = oracle::random_weights(gen, 3);
        const Vector got = prox_sorted_l1(v, WeightSequence(w));
        CHECK((got - oracle::prox_by_subgradient(v, w)).lpNorm<Eigen::Infinity>() < 1e-3);
    }
}

TEST_CASE("prox is nonexpansive")
{
    std::mt19937_64 gen(9);
    for (int t = 0; t < 300; ++t) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 10);
        const WeightSequence lambda(oracle::random_weights(gen, m));
        const Vector v = oracle::random_vector(gen, m);
        const Vector u = oracle::random_vector(gen, m);
        CHECK((prox_sorted_l1(v, lambda) - prox_sorted_l1(u, lambda)).norm() <= (v - u).norm() + 1e-12);
    }
}

TEST_CASE("v - prox(v) certifies optimality")
{
    std::mt19937_64 gen(31);
    for (int t = 0; t < 300; ++t) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 15);
        const Vector v = oracle::random_vector(gen, m);
        const WeightSequence lambda(oracle::random_weights(gen, m));
        const Vector z = prox_sorted_l1(v, lambda);
        const Vector g = v - z;
        CHECK(dual_feasible(g, lambda, 1e-9));
        // <g, z> = J(z): the dual budget is used up on the support.
        CHECK(g.dot(z) == doctest::Approx(sorted_l1_norm(z, lambda)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("constant weights reduce the prox to soft-thresholding")
{
    std::mt19937_64 gen(3);
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 10);
        const Vector v = oracle::random_vector(gen, m);
        const double c = std::uniform_real_distribution<double>(0, 3)(gen);
        const Vector soft = v.array().sign() * (v.array().abs() - c).max(0.0);
        CHECK((prox_sorted_l1(v, WeightSequence::constant(static_cast<std::size_t>(m), c)) - soft)
                  .lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("ties are resolved deterministically")
{
    const Vector v = vec({2, -2, 2, 1});
    const WeightSequence lambda{1.5, 1.0, 0.5, 0.1};
    const Vector a = prox_sorted_l1(v, lambda);
    const Vector b = prox_sorted_l1(v, lambda);
    CHECK(a == b);
    CHECK(std::abs(a[0]) == doctest::Approx(1.0));
    CHECK(std::abs(a[1]) == doctest::Approx(1.0));
}

TEST_CASE("dual_feasible examples")
{
    const WeightSequence lambda{3, 2, 1};
    CHECK(dual_feasible(lambda.values(), lambda));
    CHECK(dual_feasible(Vector::Zero(3), lambda));
    CHECK_FALSE(dual_feasible(vec({2, 0}), {1, 1}));
    CHECK(dual_feasible(vec({1.0, 0.9}), {1, 1}));
    CHECK_FALSE(dual_feasible(vec({1.5, 0.5}), {1, 1}));
    CHECK_FALSE(dual_feasible(vec({1, 1, 1.000001}), {1, 1, 1}, 1e-8));
    CHECK(dual_feasible(vec({1, 1, 1.000001}), {1, 1, 1}, 1e-5));
    CHECK_THROWS_AS(dual_feasible(vec({1}), {1, 1}), DimensionError);
    CHECK(dual_excess(vec({2, 0}), {1, 1}) == doctest::Approx(1.0));
}
