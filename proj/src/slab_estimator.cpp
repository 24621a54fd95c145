#include "normest/slab_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace normest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Block means projected on every representative functional: row k holds
// <t_k, Z_j> for j = 0..n-1.
RowMatrix project_blocks(const BlockSummary& blocks, const FunctionalSet& fs) {
    if (fs.size() == 0) throw InvalidArgument("empty functional set");
    if (fs.dim() != blocks.dim()) {
        throw InvalidArgument("functional dimension " + std::to_string(fs.dim()) +
                              " does not match block mean dimension " + std::to_string(blocks.dim()));
    }
    return fs.vectors * blocks.means.transpose();
}

std::span<const double> row_span(const RowMatrix& m, Index k) {
    return {m.data() + k * m.cols(), static_cast<std::size_t>(m.cols())};
}

MembershipReport evaluate(const RowMatrix& projected, const std::vector<DepthSet>& depth,
                          const Vector& s, double epsilon) {
    MembershipReport report;
    report.threshold = majority_threshold(projected.cols());
    report.per_functional_coverage.resize(static_cast<std::size_t>(projected.rows()));
    report.worst_violation = 0.0;
    for (Index k = 0; k < projected.rows(); ++k) {
        report.per_functional_coverage[static_cast<std::size_t>(k)] =
            slab_coverage(row_span(projected, k), epsilon, s[k]);
        const double viol = depth[static_cast<std::size_t>(k)].distance(s[k]);
        if (viol > report.worst_violation) {
            report.worst_violation = viol;
            report.worst_functional = k;
        }
    }
    report.member = report.worst_violation == 0.0;
    return report;
}

std::vector<DepthSet> depth_sets(const RowMatrix& projected, double epsilon) {
    std::vector<DepthSet> out;
    out.reserve(static_cast<std::size_t>(projected.rows()));
    for (Index k = 0; k < projected.rows(); ++k) {
        out.push_back(majority_depth_set(row_span(projected, k), epsilon));
    }
    return out;
}

}  // namespace

bool DepthSet::contains(double s) const {
    return distance(s) == 0.0;
}

double DepthSet::distance(double s) const {
    if (intervals.empty()) return kInf;
    const auto it = std::lower_bound(intervals.begin(), intervals.end(), s,
                                     [](const DepthInterval& iv, double x) { return iv.hi < x; });
    double best = kInf;
    if (it != intervals.end()) {
        if (it->lo <= s) return 0.0;
        best = it->lo - s;
    }
    if (it != intervals.begin()) best = std::min(best, s - std::prev(it)->hi);
    return best;
}

std::size_t DepthSet::nearest(double s) const {
    const auto it = std::lower_bound(intervals.begin(), intervals.end(), s,
                                     [](const DepthInterval& iv, double x) { return iv.hi < x; });
    if (it == intervals.end()) return intervals.size() - 1;
    const auto right = static_cast<std::size_t>(it - intervals.begin());
    if (it->lo <= s || it == intervals.begin()) return right;
    const std::size_t left = right - 1;
    const double dl = s - intervals[left].hi;
    const double dr = intervals[right].lo - s;
    if (dl < dr) return left;
    if (dr < dl) return right;
    return intervals[right].peak > intervals[left].peak ? right : left;
}

Index slab_coverage(std::span<const double> projected, double epsilon, double s) {
    Index count = 0;
    for (double v : projected) {
        if (v - epsilon <= s && s <= v + epsilon) ++count;
    }
    return count;
}

DepthSet majority_depth_set(std::span<const double> projected, double epsilon) {
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
        throw InvalidArgument("majority_depth_set: epsilon must be finite and >= 0");
    }
    if (projected.empty()) throw InvalidArgument("majority_depth_set: no block means");
    DepthSet out;
    out.n = static_cast<Index>(projected.size());
    out.threshold = majority_threshold(out.n);

    // (position, +1 open / -1 close); opens sort first at equal positions so
    // touching closed intervals overlap.
    std::vector<std::pair<double, int>> events;
    events.reserve(2 * projected.size());
    for (double v : projected) {
        if (!std::isfinite(v)) throw InvalidArgument("majority_depth_set: non-finite block mean");
        events.emplace_back(v - epsilon, +1);
        events.emplace_back(v + epsilon, -1);
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });

    Index depth = 0;
    DepthInterval current;
    for (const auto& [x, delta] : events) {
        const Index before = depth;
        depth += delta;
        if (before < out.threshold && depth >= out.threshold) {
            current = {x, x, depth};
        } else if (depth >= out.threshold) {
            current.peak = std::max(current.peak, depth);
        }
        if (before >= out.threshold && depth < out.threshold) {
            current.hi = x;
            out.intervals.push_back(current);
        }
    }
    return out;
}

MembershipReport membership(const Eigen::Ref<const Vector>& y, const BlockSummary& blocks,
                            const FunctionalSet& fs, double epsilon) {
    const RowMatrix projected = project_blocks(blocks, fs);
    if (y.size() != fs.dim()) throw InvalidArgument("membership: point dimension mismatch");
    const Vector s = fs.vectors * y;
    return evaluate(projected, depth_sets(projected, epsilon), s, epsilon);
}

EstimateResult solve_feasible(const BlockSummary& blocks, const FunctionalSet& fs, double epsilon,
                              std::optional<Vector> init, SolverOptions options) {
    if (!(options.tol > 0.0)) throw InvalidArgument("solve_feasible: tol must be > 0");
    const RowMatrix projected = project_blocks(blocks, fs);
    const std::vector<DepthSet> depth = depth_sets(projected, epsilon);
    const Index max_iter = options.max_iter > 0 ? options.max_iter : 50 * fs.size();

    EstimateResult result;
    result.point = init ? std::move(*init) : coordinatewise_median(blocks.means);
    if (result.point.size() != fs.dim()) throw InvalidArgument("solve_feasible: init dimension mismatch");
    result.epsilon_used = epsilon;
    result.n = blocks.n();
    result.m = blocks.m();
    result.dropped = blocks.partition.dropped;
    result.functional_count = fs.signed_size();
    result.exact = fs.exact;

    for (Index k = 0; k < fs.size(); ++k) {
        if (depth[static_cast<std::size_t>(k)].empty()) {
            result.empty_witness = k;
            result.certificate = evaluate(projected, depth, fs.vectors * result.point, epsilon);
            return result;
        }
    }

    const double stop = options.tol * epsilon;
    // Targets sit slightly inside an interval so round-off in the update does
    // not land the projection just outside it.
    const double inset = 0.5 * options.tol * epsilon;
    Vector& y = result.point;
    bool converged = false;
    for (;;) {
        const Vector s = fs.vectors * y;
        Index worst = 0;
        double worst_violation = 0.0;
        for (Index k = 0; k < fs.size(); ++k) {
            const double viol = depth[static_cast<std::size_t>(k)].distance(s[k]);
            if (viol > worst_violation) {
                worst_violation = viol;
                worst = k;
            }
        }
        if (worst_violation <= stop) {
            converged = true;
            break;
        }
        if (result.iterations >= max_iter) break;

        const DepthSet& ds = depth[static_cast<std::size_t>(worst)];
        const DepthInterval& iv = ds.intervals[ds.nearest(s[worst])];
        const double shrink = std::min(inset, 0.5 * (iv.hi - iv.lo));
        const double target = std::clamp(s[worst], iv.lo + shrink, iv.hi - shrink);
        const auto t = fs.vectors.row(worst);
        y += ((target - s[worst]) / t.squaredNorm()) * t.transpose();
        ++result.iterations;
    }

    result.certificate = evaluate(projected, depth, fs.vectors * y, epsilon);
    if (result.certificate.member) {
        result.feasible = true;
    } else if (converged) {
        const double inflated = epsilon * (1.0 + options.tol);
        result.certificate = membership(y, blocks, fs, inflated);
        if (result.certificate.member) {
            result.feasible = true;
            result.epsilon_used = inflated;
        }
    }
    return result;
}

namespace {

BlockSummary summarize(const SampleMatrix& sample, double delta, const EstimatorOptions& options,
                       bool& clamped) {
    const BlockCount count = blocks_for_confidence(delta, sample.size(), options.kappa);
    clamped = count.clamped;
    return block_means(sample, partition(sample.size(), count.n, options.shuffle_seed));
}

}  // namespace

EstimateResult estimate_mean(const SampleMatrix& sample, const FunctionalSet& fs, double delta,
                             double epsilon, const EstimatorOptions& options) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw InvalidArgument("estimate_mean: epsilon must be finite and >= 0");
    }
    bool clamped = false;
    const BlockSummary blocks = summarize(sample, delta, options, clamped);
    EstimateResult r = solve_feasible(blocks, fs, epsilon, std::nullopt, options.solver);
    r.blocks_clamped = clamped;
    return r;
}

EstimateResult estimate_mean(const SampleMatrix& sample, const NormSpec& spec, double delta,
                             double epsilon, const EstimatorOptions& options) {
    const FunctionalSet fs = dual_functionals(spec, sample.dim(), options.budget, options.seed);
    return estimate_mean(sample, fs, delta, epsilon, options);
}

EstimateResult adaptive_solve(const BlockSummary& blocks, const FunctionalSet& fs, double eps_tol,
                              SolverOptions options) {
    if (!(eps_tol > 0.0)) throw InvalidArgument("adaptive_estimate: eps_tol must be > 0");
    const Vector center = coordinatewise_median(blocks.means);
    double spread = 0.0;
    for (Index j = 0; j < blocks.n(); ++j) {
        spread = std::max(spread, norm_eval(blocks.means.row(j).transpose() - center, fs));
    }
    double lo = 0.0;
    double hi = 2.0 * spread;
    EstimateResult best = solve_feasible(blocks, fs, hi, center, options);
    if (!best.feasible || hi == 0.0) return best;

    while (hi - lo > eps_tol * hi) {
        const double mid = lo + 0.5 * (hi - lo);
        EstimateResult r = solve_feasible(blocks, fs, mid, center, options);
        if (r.feasible) {
            hi = mid;
            best = std::move(r);
        } else {
            lo = mid;
        }
    }
    return best;
}

EstimateResult adaptive_estimate(const SampleMatrix& sample, const FunctionalSet& fs, double delta,
                                 double eps_tol, const EstimatorOptions& options) {
    bool clamped = false;
    const BlockSummary blocks = summarize(sample, delta, options, clamped);
    EstimateResult r = adaptive_solve(blocks, fs, eps_tol, options.solver);
    r.blocks_clamped = clamped;
    return r;
}

EstimateResult adaptive_estimate(const SampleMatrix& sample, const NormSpec& spec, double delta,
                                 double eps_tol, const EstimatorOptions& options) {
    const FunctionalSet fs = dual_functionals(spec, sample.dim(), options.budget, options.seed);
    return adaptive_estimate(sample, fs, delta, eps_tol, options);
}

}  // namespace normest
