#pragma once

// Equal-size partitioning of a sample, block means, and the scalar
// median-of-means estimator.

#include "normest/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace normest {

/// Partition of N indices into n blocks of m indices each. Indices past n*m
/// are not used; their count is `dropped`.
struct BlockPartition {
    Index N = 0;
    Index n = 0;
    Index m = 0;
    Index dropped = 0;
    /// Row indices in block order: block j is order[j*m, (j+1)*m). Identity
    /// unless the partition was shuffled.
    std::vector<Index> order;

    std::span<const Index> block(Index j) const {
        return {order.data() + j * m, static_cast<std::size_t>(m)};
    }
};

struct BlockSummary {
    BlockPartition partition;
    RowMatrix means;  // n x d, row j is Z_j

    Index n() const { return partition.n; }
    Index m() const { return partition.m; }
    Index dim() const { return means.cols(); }
};

/// Contiguous blocks [j*m, (j+1)*m) with m = floor(N/n). With a shuffle seed
/// the row order is permuted first.
BlockPartition partition(Index N, Index n, std::optional<std::uint64_t> shuffle_seed = std::nullopt);

BlockSummary block_means(const SampleMatrix& sample, const BlockPartition& partition);

/// Median of a list; the midpoint of the two central order statistics when
/// the length is even.
double median(std::vector<double> values);

/// Median of the n block means of `values`.
double scalar_mom(std::span<const double> values, Index n);

struct BlockCount {
    Index n = 1;
    bool clamped = false;  // the requested count exceeded N
};

/// n = min(N, max(1, ceil(kappa * ln(2 / delta)))).
BlockCount blocks_for_confidence(double delta, Index N, double kappa = 1.0);

/// Coordinate-wise median of the rows of `means`.
Vector coordinatewise_median(const RowMatrix& means);

}  // namespace normest
