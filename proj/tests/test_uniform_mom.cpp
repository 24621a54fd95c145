#include "normest/uniform_mom.hpp"

#include "normest/slab_estimator.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace normest;

TEST_CASE("coverage requirement is ceil(0.6 n)") {
    for (Index n = 0; n <= 1000; ++n) {
        const Index expected = static_cast<Index>(std::ceil(0.6L * static_cast<long double>(n) - 1e-12L));
        CHECK(uniform_coverage_requirement(n) == expected);
    }
    CHECK(uniform_coverage_requirement(3) == 2);
    CHECK(uniform_coverage_requirement(5) == 3);
    CHECK(uniform_coverage_requirement(10) == 6);
}

TEST_CASE("certify_uniform examples") {
    RowMatrix c(12, 3);
    const Vector mu = (Vector(3) << 1, 2, 3).finished();
    for (Index i = 0; i < 12; ++i) c.row(i) = mu.transpose();
    const auto all = certify_uniform(SampleMatrix(c), dual_functionals(NormSpec::l1(), 3), mu, 0.0, 4);
    CHECK(all.pass);
    CHECK(all.min_coverage == 4);
    for (Index cov : all.per_function_coverage) CHECK(cov == 4);

    RowMatrix x(3, 1);
    x << 0, 0.1, 5;
    const auto fs = dual_functionals(NormSpec::linf(), 1);
    const auto loose = certify_uniform(SampleMatrix(x), fs, Vector::Zero(1), 0.5, 3);
    CHECK(loose.required == 2);
    CHECK(loose.min_coverage == 2);
    CHECK(loose.pass);
    const auto tight = certify_uniform(SampleMatrix(x), fs, Vector::Zero(1), 0.05, 3);
    CHECK(tight.min_coverage == 1);
    CHECK_FALSE(tight.pass);

    CHECK_THROWS_AS(certify_uniform(SampleMatrix(x), fs, Vector::Zero(2), 0.5, 3), InvalidArgument);
    CHECK_THROWS_AS(certify_uniform(SampleMatrix(x), fs, Vector::Zero(1), -1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(certify_uniform(SampleMatrix(x), fs, Vector::Zero(1), 0.5, 4), InvalidArgument);
}

TEST_CASE("coverage is monotone in r and pass matches the requirement") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 100; ++rep) {
        const Index d = 1 + rep % 6;
        const Index n = 1 + rep % 11;
        const SampleMatrix x(testing::random_matrix(n * 5, d, rng));
        const auto fs = dual_functionals(NormSpec::l2(), d, 20, static_cast<std::uint64_t>(rep));
        const Vector mu = Vector::Zero(d);
        CertificationReport prev;
        for (double r : {0.0, 0.1, 0.3, 0.6, 1.0, 3.0}) {
            const auto rep_r = certify_uniform(x, fs, mu, r, n);
            CHECK(rep_r.pass == (rep_r.min_coverage >= uniform_coverage_requirement(n)));
            for (std::size_t f = 0; f < rep_r.per_function_coverage.size(); ++f) {
                CHECK(rep_r.per_function_coverage[f] >= 0);
                CHECK(rep_r.per_function_coverage[f] <= n);
                if (!prev.per_function_coverage.empty()) CHECK(rep_r.per_function_coverage[f] >= prev.per_function_coverage[f]);
            }
            prev = rep_r;
        }
    }
}

TEST_CASE("passing certification implies slab membership of the true mean") {
    std::mt19937_64 rng(5);
    int passes = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const Index d = 1 + rep % 5;
        const Index n = 3 + rep % 9;
        const SampleMatrix x(testing::random_matrix(n * 4, d, rng));
        const auto blocks = block_means(x, partition(x.size(), n));
        const auto fs = dual_functionals(NormSpec::linf(), d);
        const Vector mu = Vector::Zero(d);
        const double r = 0.2 + 0.1 * (rep % 8);
        const auto rep_r = certify_uniform(blocks, fs, mu, r);
        if (!rep_r.pass) continue;
        ++passes;
        CHECK(membership(mu, blocks, fs, r).member);
    }
    CHECK(passes > 30);
}

TEST_CASE("finite class accuracy") {
    const auto one = finite_class_accuracy(1, 2.0, 5, 50);
    REQUIRE(one.has_value());
    CHECK(one->k == 20.0);
    CHECK(one->eta0 == doctest::Approx(2.0 * std::sqrt(20.0 / 50.0)));
    CHECK(one->p_m_bound == doctest::Approx(1.0 / 20));

    const auto flat = finite_class_accuracy(100, 0.0, 5, 50);
    REQUIRE(flat.has_value());
    CHECK(flat->eta0 == 0.0);

    CHECK_FALSE(finite_class_accuracy(2, 1.0, 0, 50).has_value());
    CHECK_FALSE(finite_class_accuracy(1e300, 1.0, 1, 50).has_value());

    // Returned k satisfies the condition and the previous grid point does not.
    for (double size : {2.0, 50.0, 1e4, 1e8}) {
        const auto acc = finite_class_accuracy(size, 1.0, 3, 10);
        if (!acc) continue;
        CHECK(acc->condition_slack >= 0.0);
        CHECK(std::log(size) <= 3.0 * std::log(std::exp(1.0) * acc->k) + 1e-12);
        if (acc->k > 20) CHECK(std::log(size) > 3.0 * std::log(std::exp(1.0) * acc->k / 2));
    }
    CHECK_THROWS_AS(finite_class_accuracy(0.5, 1.0, 3, 10), InvalidArgument);
    CHECK_THROWS_AS(finite_class_accuracy(2, 1.0, 3, 0), InvalidArgument);
}
