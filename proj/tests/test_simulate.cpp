#include <doctest.h>

#include <cmath>

#include "eslope/errors.hpp"
#include "eslope/simulate.hpp"

using namespace eslope;

TEST_CASE("magnitude values")
{
    CHECK(magnitude_value(LowMagnitude{}, 1000) == doctest::Approx(std::sqrt(2.0 * std::log(1000.0))));
    CHECK(magnitude_value(HighMagnitude{}, 1000) == doctest::Approx(5.0 * std::sqrt(2.0 * std::log(1000.0))));
    CHECK(magnitude_value(CustomMagnitude{8.0}, 1000) == 8.0);
}

TEST_CASE("config validation")
{
    SimulationConfig cfg;
    CHECK(cfg.outlier_count() == 50);
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.rho = 1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = cfg;
    bad.outlier_fraction = 0.0001;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = cfg;
    bad.outlier_fraction = 0.6;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = cfg;
    bad.sparsity = 21;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = cfg;
    bad.sigma = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK_THROWS_AS(toeplitz_gaussian_design(10, 2, 1.0, 1), DomainError);
    CHECK_THROWS_AS(toeplitz_gaussian_design(10, 2, -0.1, 1), DomainError);
}

TEST_CASE("toeplitz design")
{
    SUBCASE("unit columns")
    {
        const Matrix X = toeplitz_gaussian_design(500, 30, 0.4, 3);
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            CHECK(std::abs(X.col(j).norm() - 1.0) <= 1e-12);
        }
    }
    SUBCASE("independent columns at rho = 0")
    {
        const Matrix X = toeplitz_gaussian_design(2000, 10, 0.0, 4);
        const Matrix G = X.transpose() * X;
        for (Eigen::Index i = 0; i < 10; ++i)
            for (Eigen::Index j = 0; j < i; ++j) CHECK(std::abs(G(i, j)) < 0.1);
    }
    SUBCASE("neighbour correlation follows rho")
    {
        const Matrix X = toeplitz_gaussian_design(4000, 5, 0.6, 5);
        const Matrix G = X.transpose() * X;
        CHECK(G(0, 1) == doctest::Approx(0.6).epsilon(0.1));
        CHECK(G(0, 2) == doctest::Approx(0.36).epsilon(0.15));
    }
    SUBCASE("determinism")
    {
        CHECK(toeplitz_gaussian_design(100, 7, 0.4, 9) == toeplitz_gaussian_design(100, 7, 0.4, 9));
        CHECK(toeplitz_gaussian_design(100, 7, 0.4, 9) != toeplitz_gaussian_design(100, 7, 0.4, 10));
    }
}

TEST_CASE("setting 1 instance")
{
    SimulationConfig cfg;
    cfg.n = 5000;
    const auto data = make_dataset(cfg);
    REQUIRE(data.truth().has_value());
    const auto& truth = *data.truth();
    CHECK(truth.beta.size() == 20);
    for (Eigen::Index j = 0; j < 20; ++j) CHECK(truth.beta[j] == doctest::Approx(2.448).epsilon(1e-3));
    CHECK(truth.support.size() == 250);
    for (auto i : truth.support) CHECK(truth.mu[static_cast<Eigen::Index>(i)] == doctest::Approx(5.0 * std::sqrt(2.0 * std::log(5000.0))));
    const Vector noise = data.y() - data.X() * truth.beta - truth.mu;
    CHECK(std::abs(noise.mean()) < 3.0 / std::sqrt(5000.0));
}

TEST_CASE("sparse beta and random signs")
{
    SimulationConfig cfg;
    cfg.n = 300;
    cfg.p = 100;
    cfg.sparsity = 10;
    cfg.magnitude = LowMagnitude{};
    cfg.outlier_fraction = 0.2;
    cfg.random_sign = true;
    const auto data = make_dataset(cfg);
    const auto& truth = *data.truth();
    CHECK((truth.beta.array() != 0.0).count() == 10);
    CHECK(truth.beta.maxCoeff() == doctest::Approx(std::sqrt(2.0 * std::log(100.0))));
    CHECK((truth.mu.array() < 0.0).count() > 0);
    CHECK((truth.mu.array() > 0.0).count() > 0);
}

TEST_CASE("custom zero magnitude records a support without shifting y")
{
    SimulationConfig cfg;
    cfg.n = 200;
    cfg.outlier_fraction = 0.005;
    cfg.magnitude = CustomMagnitude{0.0};
    const auto data = make_dataset(cfg);
    CHECK(data.truth()->support.size() == 1);
    CHECK(data.truth()->mu.isZero(0.0));
}

TEST_CASE("support bookkeeping and determinism")
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SimulationConfig cfg;
        cfg.n = 150;
        cfg.p = 5;
        cfg.outlier_fraction = 0.02 * static_cast<double>(seed + 1);
        cfg.random_sign = seed % 2 == 1;
        cfg.seed = seed;
        const auto a = make_dataset(cfg);
        const auto b = make_dataset(cfg);
        CHECK(a.X() == b.X());
        CHECK(a.y() == b.y());
        const auto& truth = *a.truth();
        CHECK(truth.support.size() == cfg.outlier_count());
        CHECK(support_of(truth.mu) == truth.support);
    }
}
