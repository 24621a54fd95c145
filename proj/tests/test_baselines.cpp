#include "normest/baselines.hpp"

#include "normest/blocks.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace normest;

namespace {

double objective(const Vector& z, const RowMatrix& pts) {
    double s = 0.0;
    for (Index j = 0; j < pts.rows(); ++j) s += (pts.row(j).transpose() - z).norm();
    return s;
}

RowMatrix permute_rows(const RowMatrix& x, std::mt19937_64& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    RowMatrix out(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace

TEST_CASE("empirical mean") {
    RowMatrix x(2, 2);
    x << 0, 0, 2, 2;
    CHECK(empirical_mean(SampleMatrix(x)) == Vector::Ones(2));
    RowMatrix one(1, 3);
    one << 1, -4, 0.3;
    CHECK(empirical_mean(SampleMatrix(one)) == one.row(0).transpose());

    std::mt19937_64 rng(1);
    const RowMatrix big = testing::random_matrix(5000, 4, rng, 100.0);
    const Vector a = empirical_mean(SampleMatrix(big));
    const Vector b = empirical_mean(SampleMatrix(permute_rows(big, rng)));
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("coordinate-wise median of means") {
    RowMatrix c(9, 2);
    c.col(0).setConstant(3.0);
    c.col(1).setConstant(-1.0);
    CHECK(coordinatewise_mom(SampleMatrix(c), 3) == (Vector(2) << 3, -1).finished());

    RowMatrix x(6, 2);
    x << 1, -1, 2, -2, 3, -3, 4, -4, 100, -100, 5, -5;
    const Vector r = coordinatewise_mom(SampleMatrix(x), 3);
    CHECK(r[0] == 3.5);
    CHECK(r[1] == -3.5);

    std::mt19937_64 rng(2);
    const RowMatrix col = testing::random_matrix(40, 1, rng);
    std::vector<double> v(col.data(), col.data() + col.size());
    CHECK(coordinatewise_mom(SampleMatrix(col), 7)[0] == scalar_mom(v, 7));
}

TEST_CASE("geometric median of means examples") {
    const Vector z0 = (Vector(3) << 1, 2, -3).finished();
    RowMatrix same(10, 3);
    for (Index i = 0; i < 10; ++i) same.row(i) = z0.transpose();
    const auto g = geometric_mom(SampleMatrix(same), 5);
    CHECK(g.converged);
    CHECK(g.point == z0);

    // On a line the geometric median is a median.
    RowMatrix line(5, 1);
    line << 4, -1, 9, 2, 3;
    CHECK(geometric_median(line).point[0] == doctest::Approx(3.0).epsilon(1e-9));
    RowMatrix even(4, 1);
    even << 0, 1, 2, 10;
    const double m = geometric_median(even).point[0];
    CHECK(m >= 1.0 - 1e-9);
    CHECK(m <= 2.0 + 1e-9);

    RowMatrix tri(3, 2);
    tri << 1, 0, -0.5, std::sqrt(3.0) / 2, -0.5, -std::sqrt(3.0) / 2;
    const auto t = geometric_median(tri);
    CHECK(t.converged);
    CHECK(t.point.norm() <= 1e-8);
    // Gradient of the objective vanishes at the centroid.
    Vector grad = Vector::Zero(2);
    for (Index j = 0; j < 3; ++j) grad -= tri.row(j).transpose() / tri.row(j).norm();
    CHECK(grad.norm() <= 1e-12);

    // A point that carries half the mass is optimal.
    RowMatrix heavy(4, 2);
    heavy << 0, 0, 0, 0, 5, 1, -2, 7;
    const auto h = geometric_median(heavy);
    CHECK(h.point.norm() == 0.0);
}

TEST_CASE("geometric median beats random perturbations") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const Index d = 1 + rep % 6;
        const RowMatrix pts = testing::random_matrix(5 + rep % 8, d, rng);
        const auto g = geometric_median(pts);
        const double best = objective(g.point, pts);
        for (int probe = 0; probe < 1000; ++probe) {
            const double scale = std::pow(10.0, -1 - probe % 5);
            const Vector z = g.point + testing::random_vector(d, rng, scale);
            CHECK(best <= objective(z, pts) * (1 + 1e-6));
        }
    }
}

TEST_CASE("baselines are translation equivariant and block-permutation invariant") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 30; ++rep) {
        const Index d = 1 + rep % 5;
        const RowMatrix x = testing::random_matrix(60, d, rng);
        const Vector b = testing::random_vector(d, rng, 50.0);
        const RowMatrix xb = x.rowwise() + b.transpose();
        const SampleMatrix s(x);
        const SampleMatrix sb(xb);
        CHECK((empirical_mean(sb) - empirical_mean(s) - b).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((coordinatewise_mom(sb, 6) - coordinatewise_mom(s, 6) - b).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((geometric_mom(sb, 6, 1e-13).point - geometric_mom(s, 6, 1e-13).point - b).cwiseAbs().maxCoeff() <= 1e-9);

        const auto blocks = block_means(s, partition(60, 6));
        const RowMatrix shuffled = permute_rows(blocks.means, rng);
        CHECK((geometric_median(shuffled).point - geometric_median(blocks.means).point).cwiseAbs().maxCoeff() <= 1e-9);
    }
}
