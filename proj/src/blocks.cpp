#include "normest/blocks.hpp"

#include "normest/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace normest {

BlockPartition partition(Index N, Index n, std::optional<std::uint64_t> shuffle_seed) {
    if (n < 1) throw InvalidArgument("partition: block count must be >= 1");
    if (n > N) {
        throw InvalidArgument("partition: block count " + std::to_string(n) +
                              " exceeds sample size " + std::to_string(N));
    }
    BlockPartition p;
    p.N = N;
    p.n = n;
    p.m = N / n;
    p.dropped = N - n * p.m;
    p.order.resize(static_cast<std::size_t>(N));
    std::iota(p.order.begin(), p.order.end(), Index{0});
    if (shuffle_seed) {
        Rng rng(derive_seed(*shuffle_seed, 0x5B1F));
        std::shuffle(p.order.begin(), p.order.end(), rng);
    }
    p.order.resize(static_cast<std::size_t>(n * p.m));
    return p;
}

BlockSummary block_means(const SampleMatrix& sample, const BlockPartition& partition) {
    if (partition.N != sample.size()) {
        throw InvalidArgument("block_means: partition built for N=" + std::to_string(partition.N) +
                              ", sample has N=" + std::to_string(sample.size()));
    }
    BlockSummary out;
    out.partition = partition;
    out.means.setZero(partition.n, sample.dim());
    for (Index j = 0; j < partition.n; ++j) {
        for (Index i : partition.block(j)) {
            if (i < 0 || i >= sample.size()) throw InvalidArgument("block_means: index out of range");
            out.means.row(j) += sample.row(i);
        }
        out.means.row(j) /= static_cast<double>(partition.m);
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median: empty input");
    const std::size_t k = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    const double upper = values[k];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k));
    return lower + (upper - lower) / 2.0;
}

double scalar_mom(std::span<const double> values, Index n) {
    if (values.empty()) throw InvalidArgument("scalar_mom: empty input");
    const auto N = static_cast<Index>(values.size());
    const BlockPartition p = partition(N, n);
    std::vector<double> means(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        double sum = 0.0;
        for (Index i : p.block(j)) sum += values[static_cast<std::size_t>(i)];
        means[static_cast<std::size_t>(j)] = sum / static_cast<double>(p.m);
    }
    return median(std::move(means));
}

BlockCount blocks_for_confidence(double delta, Index N, double kappa) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("blocks_for_confidence: delta must lie in (0, 1)");
    if (!(kappa > 0.0)) throw InvalidArgument("blocks_for_confidence: kappa must be positive");
    if (N < 1) throw InvalidArgument("blocks_for_confidence: N must be >= 1");
    // Round-off in ln(2/delta) must not push an exact integer to the next one.
    const double x = kappa * std::log(2.0 / delta);
    const double raw = std::ceil(x - 1e-12 * std::max(1.0, x));
    Index n = raw < 1.0 ? 1 : static_cast<Index>(std::min(raw, 1e18));
    BlockCount out;
    if (n > N) {
        n = N;
        out.clamped = true;
    }
    out.n = n;
    return out;
}

Vector coordinatewise_median(const RowMatrix& means) {
    Vector out(means.cols());
    std::vector<double> col(static_cast<std::size_t>(means.rows()));
    for (Index k = 0; k < means.cols(); ++k) {
        for (Index j = 0; j < means.rows(); ++j) col[static_cast<std::size_t>(j)] = means(j, k);
        out[k] = median(col);
    }
    return out;
}

}  // namespace normest
