#include "normest/harness.hpp"

#include "normest/baselines.hpp"
#include "normest/blocks.hpp"
#include "normest/io.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace normest;

namespace {

double column_mean(const SampleMatrix& x) { return x.data().col(0).mean(); }

double column_variance(const SampleMatrix& x) {
    const double m = column_mean(x);
    return (x.data().col(0).array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_CASE("sampling is deterministic and centered at mu") {
    DistributionSpec point;
    point.law = GaussianLaw{Eigen::MatrixXd::Zero(3, 3)};
    point.mu = (Vector(3) << 1, -2, 0.5).finished();
    const auto x = sample_distribution(point, 20, 3, 9);
    for (Index i = 0; i < 20; ++i) CHECK(x.row(i).transpose() == point.mu);

    for (const Law& law : {Law{GaussianLaw{}}, Law{StudentTLaw{}}, Law{ParetoSymLaw{}}, Law{LogNormalLaw{0.5}},
                           Law{ChebyshevSharpLaw{0.05, 2.0}}}) {
        DistributionSpec s;
        s.law = law;
        s.mu = Vector::Constant(1, 3.0);
        const auto a = sample_distribution(s, 200, 4, 17);
        const auto b = sample_distribution(s, 200, 4, 17);
        CHECK(a.data() == b.data());
        CHECK(sample_distribution(s, 200, 4, 18).data() != a.data());
        CHECK(s.mean(4) == Vector::Constant(4, 3.0));
    }
}

TEST_CASE("symmetric Pareto moments") {
    DistributionSpec s;
    s.law = ParetoSymLaw{3.0, 1.0};
    const Index N = 1000000;
    const auto x = sample_distribution(s, N, 1, 2024);
    // Lomax(alpha) has mean 1/(alpha-1) and variance alpha/((alpha-1)^2 (alpha-2));
    // a random sign gives second moment 2/((alpha-1)(alpha-2)).
    const double alpha = 3.0;
    const double variance = 2.0 / ((alpha - 1) * (alpha - 2));
    CHECK(std::abs(column_mean(x)) <= 4 * std::sqrt(variance / N));
    CHECK(std::abs(column_variance(x) - variance) <= 0.1 * variance);
    CHECK(true_covariance(s, 1).sigma(0, 0) == doctest::Approx(variance));
}

TEST_CASE("other laws match their covariance") {
    const Index N = 200000;
    DistributionSpec t;
    t.law = StudentTLaw{5.0, Vector::Constant(1, 2.0)};
    CHECK(column_variance(sample_distribution(t, N, 1, 1)) == doctest::Approx(4.0 * 5.0 / 3.0).epsilon(0.05));

    DistributionSpec ln;
    ln.law = LogNormalLaw{0.5};
    const auto y = sample_distribution(ln, N, 1, 2);
    const double v = (std::exp(0.25) - 1) * std::exp(0.25);
    CHECK(std::abs(column_mean(y)) <= 5 * std::sqrt(v / N));
    CHECK(column_variance(y) == doctest::Approx(v).epsilon(0.05));
    CHECK(true_covariance(ln, 1).sigma(0, 0) == doctest::Approx(v));

    DistributionSpec c;
    c.law = ChebyshevSharpLaw{0.01, 1.0};
    // p = 2 delta / N; the variance is sigma^2 regardless of N.
    CHECK(true_covariance(c, 2).sigma == Eigen::MatrixXd::Identity(2, 2));

    DistributionSpec bad;
    bad.law = ParetoSymLaw{2.0, 1.0};
    CHECK_THROWS_AS(bad.validate(1), InvalidArgument);
    bad.law = StudentTLaw{2.0};
    CHECK_THROWS_AS(bad.validate(1), InvalidArgument);
}

TEST_CASE("empirical quantile is an order statistic") {
    CHECK(empirical_quantile({3, 1, 2, 4}, 0.5) == 2.0);
    CHECK(empirical_quantile({3, 1, 2, 4}, 0.75) == 3.0);
    CHECK(empirical_quantile({3, 1, 2, 4}, 0.99) == 4.0);
    CHECK(empirical_quantile({5}, 0.1) == 5.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(std::isinf(empirical_quantile({1, inf, 2}, 0.9)));
}

TEST_CASE("point mass gives zero errors") {
    ExperimentConfig c;
    c.distribution.law = GaussianLaw{Eigen::MatrixXd::Zero(2, 2)};
    c.distribution.mu = Vector::Constant(1, 4.0);
    c.d = 2;
    c.N = 30;
    c.trials = 1;
    c.bound_trials = 10;
    const auto r = run_experiment(c);
    for (const auto& [name, errs] : r.errors) {
        REQUIRE(errs.size() == 1);
        CHECK(errs[0] == 0.0);
        CHECK(r.estimators.at(name).failures == 0);
    }
    CHECK(r.estimators.size() == 4);
    CHECK(r.estimators.at("slab").feasibility_rate == 1.0);
}

TEST_CASE("reports are reproducible and independent of thread count") {
    ExperimentConfig c;
    c.distribution.law = StudentTLaw{3.0};
    c.d = 3;
    c.N = 120;
    c.trials = 24;
    c.norm = NormSpec::l1();
    c.master_seed = 99;
    c.bound_trials = 200;
    const auto a = run_experiment(c);
    c.threads = 4;
    const auto b = run_experiment(c);
    CHECK(io::dump_stable(to_json(a)) == io::dump_stable(to_json(b)));
    CHECK(a.errors == b.errors);
    CHECK(report_csv(a) == report_csv(b));
    c.master_seed = 100;
    CHECK(run_experiment(c).errors != a.errors);

    for (const auto& [name, s] : a.estimators) {
        for (std::size_t i = 1; i < s.quantiles.size(); ++i) {
            if (s.quantiles[i - 1].first == "1-delta" || s.quantiles[i].first == "1-delta") continue;
            CHECK(s.quantiles[i - 1].second <= s.quantiles[i].second);
        }
    }
    CHECK(a.estimators.at("slab").feasibility_rate >= 0.0);
    CHECK(a.estimators.at("slab").feasibility_rate <= 1.0);
}

TEST_CASE("oracle slab mode uses the bound radius") {
    ExperimentConfig c;
    c.distribution.law = GaussianLaw{};
    c.d = 4;
    c.N = 400;
    c.trials = 20;
    c.c = 2.0;
    c.estimators = {"slab"};
    c.slab_mode = SlabMode::Oracle;
    c.bound_trials = 2000;
    const auto r = run_experiment(c);
    for (double e : r.slab_epsilons) {
        if (!std::isnan(e)) CHECK(e >= r.bounds.oracle_epsilon);
    }
    CHECK(r.bounds.euclidean_epsilon.has_value() == false);
}

TEST_CASE("empirical mean error tracks the symmetrized complexity") {
    ExperimentConfig c;
    c.distribution.law = GaussianLaw{};
    c.d = 5;
    c.N = 50;
    c.trials = 10000;
    c.estimators = {"empirical"};
    c.bound_trials = 10000;
    c.master_seed = 3;
    const auto r = run_experiment(c);
    const double scale = r.bounds.e_yn.mean / std::sqrt(static_cast<double>(c.N));
    const double ratio = r.estimators.at("empirical").mean_error / scale;
    CHECK(ratio >= 0.25);
    CHECK(ratio <= 4.0);
}

TEST_CASE("config round trip and validation") {
    ExperimentConfig c;
    c.distribution.law = StudentTLaw{4.0, (Vector(2) << 1, 3).finished()};
    c.distribution.mu = (Vector(2) << 0.5, -1).finished();
    c.d = 2;
    c.N = 77;
    c.norm = NormSpec::polytope((RowMatrix(2, 2) << 1, 0, 1, 1).finished());
    c.estimators = {"slab", "empirical"};
    c.slab_mode = SlabMode::Oracle;
    c.master_seed = 123456789012345ULL;
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    CHECK(io::dump_stable(to_json(back)) == io::dump_stable(j));

    auto bad = j;
    bad["surprise"] = 1;
    CHECK_THROWS_AS(config_from_json(bad), ParseError);
    bad = j;
    bad["trials"] = 0;
    CHECK_THROWS_AS(config_from_json(bad), ParseError);
    bad = j;
    bad["distribution"]["kind"] = "cauchy";
    CHECK_THROWS_AS(config_from_json(bad), ParseError);
    bad = j;
    bad["estimators"] = {"median_of_medians"};
    CHECK_THROWS_AS(config_from_json(bad), ParseError);
}

TEST_CASE("median of means separates from the empirical mean under Pareto tails" * doctest::may_fail()) {
    // Tail index 3, delta = 0.01, N = 1000, n = ceil(ln(2/delta)) blocks.
    ExperimentConfig c;
    c.distribution.law = ParetoSymLaw{3.0, 1.0};
    c.d = 1;
    c.N = 1000;
    c.trials = 2000;
    c.delta = 0.01;
    c.estimators = {"empirical", "cw_mom"};
    c.master_seed = 11;
    c.bound_trials = 100;
    const auto r = run_experiment(c);
    CHECK(r.bounds.n == 6);
    const double mom = r.estimators.at("cw_mom").quantiles.back().second;
    const double emp = r.estimators.at("empirical").quantiles.back().second;
    MESSAGE("Pareto (1-delta)-quantiles: mom " << mom << ", empirical " << emp);
    CHECK(mom <= 0.5 * emp);
}
