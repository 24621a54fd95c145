#pragma once

// Empirical check of uniform median-of-means concentration over a finite
// class of linear functionals: every f = <t, .> must have at least 0.6 n
// block means within r of its true mean.

#include "normest/blocks.hpp"
#include "normest/norms.hpp"

#include <optional>
#include <vector>

namespace normest {

struct CertificationReport {
    double r = 0.0;
    Index n = 0;
    Index required = 0;  // ceil(0.6 n)
    std::vector<Index> per_function_coverage;
    Index min_coverage = 0;
    Index worst_function = 0;
    bool pass = false;
};

/// ceil(0.6 n) in exact integer arithmetic.
constexpr Index uniform_coverage_requirement(Index n) { return (3 * n + 4) / 5; }

CertificationReport certify_uniform(const SampleMatrix& sample, const FunctionalSet& fs,
                                    const Eigen::Ref<const Vector>& true_mu, double r, Index n);

/// Same check on precomputed block means.
CertificationReport certify_uniform(const BlockSummary& blocks, const FunctionalSet& fs,
                                    const Eigen::Ref<const Vector>& true_mu, double r);

struct FiniteClassAccuracy {
    double eta0 = 0.0;
    double k = 0.0;             // eta0 = max_std sqrt(k / m)
    double p_m_bound = 0.0;     // Chebyshev: max_std^2 / (eta0^2 m) = 1 / k
    double condition_slack = 0.0;  // c2 n ln(e k) - ln|F|
};

/// Smallest eta0 = max_std sqrt(k/m) on the grid k = 20 * 2^i, k <= 1e6, for
/// which ln|F| <= c2 n ln(e k). Empty when no grid point qualifies.
std::optional<FiniteClassAccuracy> finite_class_accuracy(double class_size, double max_std, Index n,
                                                         Index m, double c2 = 1.0);

}  // namespace normest
