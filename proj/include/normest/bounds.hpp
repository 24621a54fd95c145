#pragma once

// Target accuracy for the slab estimator and its ingredients:
//
//   eps = (c / sqrt(N)) * max{ E||Y_N||, E||G|| + R sqrt(ln(2/delta)) }
//
// with Y_N = N^{-1/2} sum_i s_i (X_i - mu) for independent random signs s_i,
// G ~ N(0, Sigma), and R = sup over the dual ball of sqrt(t' Sigma t).
// Expectations are Monte Carlo estimates; each trial draws from its own
// stream derived from (seed, trial), so results do not depend on threads.
// Norms inside the expectations are evaluated with exact_norm, so a sampled
// dual ball (L2, Lp) does not bias them low.

#include "normest/norms.hpp"
#include "normest/types.hpp"

#include <cstdint>
#include <optional>

namespace normest {

enum class CovarianceSource { True, PlugIn };

struct CovarianceModel {
    Eigen::MatrixXd sigma;
    CovarianceSource source = CovarianceSource::True;

    CovarianceModel() = default;
    CovarianceModel(Eigen::MatrixXd s, CovarianceSource src = CovarianceSource::True);

    Index dim() const { return sigma.rows(); }
    double trace() const { return sigma.trace(); }
    double max_eigenvalue() const;

    /// Unbiased sample covariance (divisor N-1; N = 1 gives the zero matrix).
    static CovarianceModel plug_in(const SampleMatrix& sample);
};

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    Index trials = 0;
};

struct BoundInputs {
    double e_yn = 0.0;
    double e_g = 0.0;
    double r_weak = 0.0;
    Index N = 1;
    double delta = 0.05;
    double c = 1.0;
};

/// Lower-triangular L with L L' = sigma. When the plain factorization fails a
/// jitter of 1e-12 tr(sigma) is added to the diagonal; sigma = 0 gives L = 0.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& sigma);

/// sup over the dual ball of the standard deviation of <t, X>.
double weak_variance_R(const CovarianceModel& cov, const FunctionalSet& fs);

/// Monte Carlo E||G|| for G ~ N(0, Sigma), G = L g with L the Cholesky factor.
MonteCarloEstimate gaussian_norm_expectation(const CovarianceModel& cov, const FunctionalSet& fs,
                                             Index trials, std::uint64_t seed, unsigned threads = 1);

struct RademacherEstimate : MonteCarloEstimate {
    bool plug_in_mean = false;
};

/// Monte Carlo E||N^{-1/2} sum_i s_i (X_i - mu)|| over random signs with the
/// sample held fixed. Without `mu` the sample mean is used (plug-in mode).
RademacherEstimate rademacher_norm_expectation(const SampleMatrix& sample,
                                               const std::optional<Vector>& mu,
                                               const FunctionalSet& fs, Index trials,
                                               std::uint64_t seed, unsigned threads = 1);

double oracle_epsilon(const BoundInputs& b);

/// (c / sqrt(N)) (sqrt(tr Sigma) + sqrt(lambda_max ln(2/delta))).
double euclidean_bound(const CovarianceModel& cov, Index N, double delta, double c = 1.0);

struct EtaConstants {
    double c0 = 1.0;  // eta0 = c0 R sqrt(n / N)
    double c1 = 1.0;  // eta1 = c1 E||G|| / sqrt(n)
    double c4 = 1.0;  // eta2 = c4 max{E||Y_N||, E||G||} / sqrt(N)
};

struct EtaScales {
    double eta0 = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double r_weak = 0.0;
    MonteCarloEstimate e_g;
    double e_yn = 0.0;
    bool e_yn_from_gaussian = false;

    double radius() const { return eta0 + eta2; }
};

/// Scales for the uniform median-of-means certificate of the class
/// {<t, .>}. With n = ln(2/delta) blocks, eta0 = c0 R sqrt(n/N) makes the
/// Chebyshev bound on the single-block failure probability small. When
/// `e_yn` is not supplied, E||G|| stands in for E||Y_N|| (its CLT limit).
EtaScales uniform_eta_recipe(const CovarianceModel& cov, const FunctionalSet& fs, Index N, Index n,
                             Index trials, std::uint64_t seed,
                             std::optional<double> e_yn = std::nullopt, EtaConstants constants = {},
                             unsigned threads = 1);

}  // namespace normest
