#include "normest/bounds.hpp"

#include "normest/parallel.hpp"
#include "normest/rng.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace normest {

namespace {

void check_psd(const Eigen::MatrixXd& s) {
    if (s.rows() != s.cols() || s.rows() == 0) throw InvalidArgument("covariance must be a nonempty square matrix");
    if (!s.allFinite()) throw InvalidArgument("covariance has non-finite entries");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("covariance is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
    const double tr = s.trace();
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(tr, 0.0)) {
        throw InvalidArgument("covariance is not positive semidefinite (min eigenvalue " +
                              std::to_string(eig.eigenvalues().minCoeff()) + ")");
    }
}

MonteCarloEstimate summarize(const std::vector<double>& values) {
    MonteCarloEstimate out;
    out.trials = static_cast<Index>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(values.size()));
    return out;
}

}  // namespace

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma) {
    const double tr = sigma.trace();
    if (tr == 0.0) return Eigen::MatrixXd::Zero(sigma.rows(), sigma.cols());
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::MatrixXd jittered = sigma;
    jittered.diagonal().array() += 1e-12 * tr;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) throw InvalidArgument("covariance Cholesky factorization failed");
    return llt.matrixL();
}

CovarianceModel::CovarianceModel(Eigen::MatrixXd s, CovarianceSource src)
    : sigma(std::move(s)), source(src) {
    check_psd(sigma);
}

double CovarianceModel::max_eigenvalue() const {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    return std::max(0.0, eig.eigenvalues().maxCoeff());
}

CovarianceModel CovarianceModel::plug_in(const SampleMatrix& sample) {
    const RowMatrix& x = sample.data();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    if (x.rows() > 1) s = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    s = 0.5 * (s + s.transpose());
    return CovarianceModel(std::move(s), CovarianceSource::PlugIn);
}

double weak_variance_R(const CovarianceModel& cov, const FunctionalSet& fs) {
    if (fs.dim() != cov.dim()) throw InvalidArgument("weak_variance_R: dimension mismatch");
    if (fs.exact && fs.norm.kind == NormKind::Linf) {
        return std::sqrt(std::max(0.0, cov.sigma.diagonal().maxCoeff()));
    }
    if (fs.norm.kind == NormKind::L2) return std::sqrt(cov.max_eigenvalue());
    if (fs.size() == 0) throw InvalidArgument("weak_variance_R: empty functional set");
    const Eigen::MatrixXd st = cov.sigma * fs.vectors.transpose();  // d x K
    double best = 0.0;
    for (Index k = 0; k < fs.size(); ++k) {
        best = std::max(best, fs.vectors.row(k).dot(st.col(k)));
    }
    return std::sqrt(best);
}

MonteCarloEstimate gaussian_norm_expectation(const CovarianceModel& cov, const FunctionalSet& fs,
                                             Index trials, std::uint64_t seed, unsigned threads) {
    if (trials < 2) throw InvalidArgument("gaussian_norm_expectation: trials must be >= 2");
    if (fs.dim() != cov.dim()) throw InvalidArgument("gaussian_norm_expectation: dimension mismatch");
    const Eigen::MatrixXd L = cholesky_factor(cov.sigma);
    std::vector<double> values(static_cast<std::size_t>(trials));
    parallel_for(values.size(), threads, [&](std::size_t k) {
        Rng rng = make_rng(seed, k);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vector g(cov.dim());
        for (Index i = 0; i < g.size(); ++i) g[i] = gauss(rng);
        values[k] = exact_norm(L * g, fs);
    });
    return summarize(values);
}

RademacherEstimate rademacher_norm_expectation(const SampleMatrix& sample,
                                               const std::optional<Vector>& mu,
                                               const FunctionalSet& fs, Index trials,
                                               std::uint64_t seed, unsigned threads) {
    if (trials < 2) throw InvalidArgument("rademacher_norm_expectation: trials must be >= 2");
    if (fs.dim() != sample.dim()) throw InvalidArgument("rademacher_norm_expectation: dimension mismatch");
    Vector center = mu ? *mu : Vector(sample.data().colwise().mean().transpose());
    if (center.size() != sample.dim()) throw InvalidArgument("rademacher_norm_expectation: mu dimension mismatch");
    const RowMatrix centered = sample.data().rowwise() - center.transpose();
    const double scale = 1.0 / std::sqrt(static_cast<double>(sample.size()));

    std::vector<double> values(static_cast<std::size_t>(trials));
    parallel_for(values.size(), threads, [&](std::size_t k) {
        Rng rng = make_rng(seed, k);
        Vector signs(sample.size());
        for (Index i = 0; i < signs.size(); i += 64) {
            std::uint64_t bits = rng();
            for (Index b = 0; b < 64 && i + b < signs.size(); ++b, bits >>= 1) {
                signs[i + b] = (bits & 1) ? 1.0 : -1.0;
            }
        }
        const Vector y = scale * (centered.transpose() * signs);
        values[k] = exact_norm(y, fs);
    });
    RademacherEstimate out;
    static_cast<MonteCarloEstimate&>(out) = summarize(values);
    out.plug_in_mean = !mu.has_value();
    return out;
}

double oracle_epsilon(const BoundInputs& b) {
    if (b.e_yn < 0 || b.e_g < 0 || b.r_weak < 0 || b.c < 0) {
        throw InvalidArgument("oracle_epsilon: inputs must be nonnegative");
    }
    if (!(b.delta > 0.0 && b.delta < 1.0)) throw InvalidArgument("oracle_epsilon: delta must lie in (0, 1)");
    if (b.N < 1) throw InvalidArgument("oracle_epsilon: N must be >= 1");
    const double tail = b.e_g + b.r_weak * std::sqrt(std::log(2.0 / b.delta));
    return b.c / std::sqrt(static_cast<double>(b.N)) * std::max(b.e_yn, tail);
}

double euclidean_bound(const CovarianceModel& cov, Index N, double delta, double c) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("euclidean_bound: delta must lie in (0, 1)");
    if (N < 1) throw InvalidArgument("euclidean_bound: N must be >= 1");
    const double tr = std::max(0.0, cov.trace());
    return c / std::sqrt(static_cast<double>(N)) *
           (std::sqrt(tr) + std::sqrt(cov.max_eigenvalue() * std::log(2.0 / delta)));
}

EtaScales uniform_eta_recipe(const CovarianceModel& cov, const FunctionalSet& fs, Index N, Index n,
                             Index trials, std::uint64_t seed, std::optional<double> e_yn,
                             EtaConstants constants, unsigned threads) {
    if (n < 1) throw InvalidArgument("uniform_eta_recipe: n must be >= 1");
    if (N < n) throw InvalidArgument("uniform_eta_recipe: N must be >= n");
    EtaScales out;
    out.r_weak = weak_variance_R(cov, fs);
    out.e_g = gaussian_norm_expectation(cov, fs, trials, seed, threads);
    out.e_yn_from_gaussian = !e_yn.has_value();
    out.e_yn = e_yn.value_or(out.e_g.mean);
    const double rootN = std::sqrt(static_cast<double>(N));
    out.eta0 = constants.c0 * out.r_weak * std::sqrt(static_cast<double>(n)) / rootN;
    out.eta1 = constants.c1 * out.e_g.mean / std::sqrt(static_cast<double>(n));
    out.eta2 = constants.c4 * std::max(out.e_yn, out.e_g.mean) / rootN;
    return out;
}

}  // namespace normest
