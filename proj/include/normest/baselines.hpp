#pragma once

// Reference estimators: empirical mean, coordinate-wise median-of-means and
// geometric (Euclidean) median-of-means.

#include "normest/types.hpp"

namespace normest {

/// Column means with compensated summation.
Vector empirical_mean(const SampleMatrix& sample);

Vector coordinatewise_mom(const SampleMatrix& sample, Index n);

struct GeometricMedianResult {
    Vector point;
    bool converged = false;
    Index iterations = 0;
};

/// Geometric median of the rows of `points`. Rows that satisfy the
/// optimality condition are returned directly (their average when several
/// do, which happens only for collinear points); otherwise Weiszfeld iteration
/// runs from the centroid until the step is below tol * (mean pairwise distance).
GeometricMedianResult geometric_median(const RowMatrix& points, double tol = 1e-10,
                                       Index max_iter = 10000);

GeometricMedianResult geometric_mom(const SampleMatrix& sample, Index n, double tol = 1e-10,
                                    Index max_iter = 10000);

}  // namespace normest
