#pragma once

// Mean estimation by intersecting majority slab sets.
//
// For a functional t and block means Z_1..Z_n, the majority slab set is
//   S_t = { y : |<t, Z_j> - <t, y>| <= eps for more than n/2 blocks }.
// Its image under y -> <t, y> is a finite union of closed intervals (a
// DepthSet). The estimate is any point of the intersection of S_t over the
// extreme points t of the dual ball. Every member y satisfies, for each t,
// |<t, y - y'>| <= 2 eps against any other member y', so the intersection
// has diameter at most 2 eps in the norm.

#include "normest/blocks.hpp"
#include "normest/norms.hpp"
#include "normest/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace normest {

struct DepthInterval {
    double lo = 0.0;
    double hi = 0.0;
    Index peak = 0;  // largest coverage count reached inside the interval
};

/// Points of the real line covered by at least `threshold` of the closed
/// intervals [v_j - eps, v_j + eps].
struct DepthSet {
    std::vector<DepthInterval> intervals;  // disjoint, sorted, closed
    Index n = 0;
    Index threshold = 0;

    bool empty() const { return intervals.empty(); }
    bool contains(double s) const;
    /// Distance from s to the set; +inf when empty.
    double distance(double s) const;
    /// Index of the interval nearest to s. Ties go to the higher peak, then
    /// to the leftmost interval. Requires !empty().
    std::size_t nearest(double s) const;
};

/// Coverage threshold floor(n/2) + 1, i.e. "more than n/2".
constexpr Index majority_threshold(Index n) { return n / 2 + 1; }

/// Sweep over the 2n slab endpoints.
DepthSet majority_depth_set(std::span<const double> projected, double epsilon);

/// Number of j with v_j - eps <= s <= v_j + eps, using the same endpoint
/// arithmetic as majority_depth_set.
Index slab_coverage(std::span<const double> projected, double epsilon, double s);

struct MembershipReport {
    bool member = false;
    Index worst_functional = 0;
    double worst_violation = 0.0;  // distance of <t,y> to the depth set; +inf if empty
    Index threshold = 0;
    std::vector<Index> per_functional_coverage;
};

MembershipReport membership(const Eigen::Ref<const Vector>& y, const BlockSummary& blocks,
                            const FunctionalSet& fs, double epsilon);

struct SolverOptions {
    Index max_iter = 0;  // 0 selects 50 * K
    double tol = 1e-6;   // relative to epsilon
};

struct EstimateResult {
    Vector point;
    double epsilon_used = 0.0;
    bool feasible = false;
    Index iterations = 0;
    MembershipReport certificate;
    /// Functional whose depth set is empty, when that is the cause of infeasibility.
    std::optional<Index> empty_witness;

    // Bookkeeping filled by estimate_mean / adaptive_estimate.
    Index n = 0;
    Index m = 0;
    Index dropped = 0;
    bool blocks_clamped = false;
    Index functional_count = 0;  // signed count, 2K
    bool exact = false;
};

/// Greedy most-violated projection onto the intersection. `init` defaults to
/// the coordinate-wise median of the block means. A feasible result is always
/// certified by `membership` at epsilon_used, which is epsilon or, when the
/// final violation is only within tolerance, epsilon * (1 + tol).
EstimateResult solve_feasible(const BlockSummary& blocks, const FunctionalSet& fs, double epsilon,
                              std::optional<Vector> init = std::nullopt, SolverOptions options = {});

struct EstimatorOptions {
    int budget = kDefaultBudget;
    std::uint64_t seed = 0;
    double kappa = 1.0;
    std::optional<std::uint64_t> shuffle_seed;
    SolverOptions solver;
};

EstimateResult estimate_mean(const SampleMatrix& sample, const FunctionalSet& fs, double delta,
                             double epsilon, const EstimatorOptions& options = {});
EstimateResult estimate_mean(const SampleMatrix& sample, const NormSpec& spec, double delta,
                             double epsilon, const EstimatorOptions& options = {});

/// Bisection on epsilon for the smallest radius at which the solver finds a
/// point, starting from the bracket [0, 2 max_j ||Z_j - median(Z)||]. Stops
/// when the bracket width is at most eps_tol times its upper end and returns
/// the result at the upper end.
EstimateResult adaptive_estimate(const SampleMatrix& sample, const FunctionalSet& fs, double delta,
                                 double eps_tol = 1e-3, const EstimatorOptions& options = {});
EstimateResult adaptive_estimate(const SampleMatrix& sample, const NormSpec& spec, double delta,
                                 double eps_tol = 1e-3, const EstimatorOptions& options = {});

/// Same search on precomputed block means.
EstimateResult adaptive_solve(const BlockSummary& blocks, const FunctionalSet& fs, double eps_tol,
                              SolverOptions options = {});

}  // namespace normest
