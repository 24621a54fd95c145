#include "normest/baselines.hpp"

#include "normest/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace normest {

Vector empirical_mean(const SampleMatrix& sample) {
    const RowMatrix& x = sample.data();
    Vector out(x.cols());
    for (Index k = 0; k < x.cols(); ++k) {
        // Neumaier summation
        double sum = 0.0;
        double comp = 0.0;
        for (Index i = 0; i < x.rows(); ++i) {
            const double v = x(i, k);
            const double t = sum + v;
            if (std::abs(sum) >= std::abs(v)) {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        out[k] = (sum + comp) / static_cast<double>(x.rows());
    }
    return out;
}

Vector coordinatewise_mom(const SampleMatrix& sample, Index n) {
    const RowMatrix& x = sample.data();
    Vector out(x.cols());
    std::vector<double> column(static_cast<std::size_t>(x.rows()));
    for (Index k = 0; k < x.cols(); ++k) {
        for (Index i = 0; i < x.rows(); ++i) column[static_cast<std::size_t>(i)] = x(i, k);
        out[k] = scalar_mom(column, n);
    }
    return out;
}

GeometricMedianResult geometric_median(const RowMatrix& points, double tol, Index max_iter) {
    const Index n = points.rows();
    if (n < 1) throw InvalidArgument("geometric_median: no points");
    GeometricMedianResult out;

    double total = 0.0;
    for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b < n; ++b) total += (points.row(a) - points.row(b)).norm();
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double spread = pairs > 0 ? total / pairs : 0.0;
    if (spread == 0.0) {
        out.point = points.row(0).transpose();
        out.converged = true;
        return out;
    }

    // A data point Z_j is a minimizer iff the summed unit vectors from the
    // other points toward it have norm <= its multiplicity. The minimizer is
    // unique unless the points are collinear; then the optimal data points
    // span the optimal segment and their average is optimal too. Averaging in
    // lexicographic order keeps the result independent of row order.
    std::vector<Vector> optimal;
    for (Index j = 0; j < n; ++j) {
        Vector pull = Vector::Zero(points.cols());
        double coincident = 0.0;
        for (Index i = 0; i < n; ++i) {
            const Vector diff = (points.row(j) - points.row(i)).transpose();
            const double dist = diff.norm();
            if (dist == 0.0) {
                coincident += 1.0;
            } else {
                pull += diff / dist;
            }
        }
        if (pull.norm() <= coincident) optimal.push_back(points.row(j).transpose());
    }
    if (!optimal.empty()) {
        std::sort(optimal.begin(), optimal.end(), [](const Vector& a, const Vector& b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
        });
        Vector sum = Vector::Zero(points.cols());
        for (const Vector& v : optimal) sum += v;
        out.point = sum / static_cast<double>(optimal.size());
        out.converged = true;
        return out;
    }

    const double reg = 1e-12 * spread;
    Vector z = points.colwise().mean().transpose();
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        Vector num = Vector::Zero(points.cols());
        double den = 0.0;
        for (Index j = 0; j < n; ++j) {
            const double dist = std::sqrt((points.row(j).transpose() - z).squaredNorm() + reg * reg);
            num += points.row(j).transpose() / dist;
            den += 1.0 / dist;
        }
        const Vector next = num / den;
        const double step = (next - z).norm();
        z = next;
        if (step < tol * spread) {
            out.converged = true;
            ++out.iterations;
            break;
        }
    }
    out.point = z;
    return out;
}

GeometricMedianResult geometric_mom(const SampleMatrix& sample, Index n, double tol, Index max_iter) {
    return geometric_median(block_means(sample, partition(sample.size(), n)).means, tol, max_iter);
}

}  // namespace normest
