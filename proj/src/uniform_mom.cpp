#include "normest/uniform_mom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace normest {

CertificationReport certify_uniform(const BlockSummary& blocks, const FunctionalSet& fs,
                                    const Eigen::Ref<const Vector>& true_mu, double r) {
    if (!(r >= 0.0)) throw InvalidArgument("certify_uniform: r must be >= 0");
    if (fs.size() == 0) throw InvalidArgument("certify_uniform: empty functional set");
    if (fs.dim() != blocks.dim() || true_mu.size() != blocks.dim()) {
        throw InvalidArgument("certify_uniform: dimension mismatch");
    }
    CertificationReport report;
    report.r = r;
    report.n = blocks.n();
    report.required = uniform_coverage_requirement(report.n);

    // Coverage of -t equals coverage of t, so representatives suffice.
    const RowMatrix projected = fs.vectors * blocks.means.transpose();  // K x n
    const Vector centers = fs.vectors * true_mu;
    report.per_function_coverage.resize(static_cast<std::size_t>(fs.size()));
    report.min_coverage = report.n;
    for (Index k = 0; k < fs.size(); ++k) {
        Index count = 0;
        for (Index j = 0; j < report.n; ++j) {
            if (std::abs(projected(k, j) - centers[k]) <= r) ++count;
        }
        report.per_function_coverage[static_cast<std::size_t>(k)] = count;
        if (count < report.min_coverage) {
            report.min_coverage = count;
            report.worst_function = k;
        }
    }
    report.pass = report.min_coverage >= report.required;
    return report;
}

CertificationReport certify_uniform(const SampleMatrix& sample, const FunctionalSet& fs,
                                    const Eigen::Ref<const Vector>& true_mu, double r, Index n) {
    if (true_mu.size() != sample.dim()) throw InvalidArgument("certify_uniform: mu dimension mismatch");
    return certify_uniform(block_means(sample, partition(sample.size(), n)), fs, true_mu, r);
}

std::optional<FiniteClassAccuracy> finite_class_accuracy(double class_size, double max_std, Index n,
                                                         Index m, double c2) {
    if (!(class_size >= 1.0)) throw InvalidArgument("finite_class_accuracy: class size must be >= 1");
    if (m < 1) throw InvalidArgument("finite_class_accuracy: m must be >= 1");
    if (max_std < 0.0 || n < 0) throw InvalidArgument("finite_class_accuracy: negative input");
    const double log_size = std::log(class_size);
    for (double k = 20.0; k <= 1e6; k *= 2.0) {
        const double slack = c2 * static_cast<double>(n) * std::log(std::numbers::e * k) - log_size;
        if (slack >= 0.0) {
            FiniteClassAccuracy out;
            out.k = k;
            out.eta0 = max_std * std::sqrt(k / static_cast<double>(m));
            out.p_m_bound = 1.0 / k;
            out.condition_slack = slack;
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace normest
