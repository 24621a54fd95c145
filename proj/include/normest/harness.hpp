#pragma once

// Seeded synthetic data and Monte Carlo comparison of estimators.

#include "normest/bounds.hpp"
#include "normest/norms.hpp"
#include "normest/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace normest {

/// N(mu, cov). An empty cov means the identity.
struct GaussianLaw {
    Eigen::MatrixXd cov;
};

/// mu + scale_i * T_i with T_i i.i.d. Student-t(dof). A single scale applies
/// to every coordinate.
struct StudentTLaw {
    double dof = 3.0;
    Vector scale = Vector::Ones(1);
};

/// mu + scale * S * (U^{-1/alpha} - 1) per coordinate, S a random sign and U
/// uniform: a symmetrized Lomax (shifted Pareto) variable with variance
/// 2 scale^2 / ((alpha - 1)(alpha - 2)).
struct ParetoSymLaw {
    double alpha = 3.0;
    double scale = 1.0;
};

/// mu + exp(sigma_log Z) - exp(sigma_log^2 / 2) per coordinate.
struct LogNormalLaw {
    double sigma_log = 1.0;
};

/// Per coordinate: mu w.p. 1 - p, mu +/- sigma / sqrt(p) w.p. p/2 each, with
/// p = min(1, 2 delta / N). At this p a single large value appears in the
/// sample with probability about 2 delta, which keeps the empirical mean's
/// (1 - delta)-quantile at the Chebyshev rate sigma / sqrt(delta N).
struct ChebyshevSharpLaw {
    double delta = 0.01;
    double sigma = 1.0;
};

using Law = std::variant<GaussianLaw, StudentTLaw, ParetoSymLaw, LogNormalLaw, ChebyshevSharpLaw>;

struct DistributionSpec {
    Law law = GaussianLaw{};
    Vector mu;  // empty means 0; size 1 broadcasts

    Vector mean(Index d) const;
    /// Throws InvalidArgument unless every moment used downstream is finite.
    void validate(Index d) const;
};

SampleMatrix sample_distribution(const DistributionSpec& spec, Index N, Index d, std::uint64_t seed);

/// Covariance of the generating law.
CovarianceModel true_covariance(const DistributionSpec& spec, Index d);

enum class SlabMode { Adaptive, Oracle };

struct ExperimentConfig {
    DistributionSpec distribution;
    Index d = 1;
    Index N = 100;
    Index trials = 100;
    double delta = 0.05;
    NormSpec norm = NormSpec::linf();
    int budget = kDefaultBudget;
    double c = 1.0;
    std::vector<std::string> estimators{"empirical", "cw_mom", "geo_mom", "slab"};
    std::uint64_t master_seed = 0;
    double kappa = 1.0;
    SlabMode slab_mode = SlabMode::Adaptive;
    double eps_tol = 1e-3;
    Index bound_trials = 2000;
    unsigned threads = 1;  // does not affect results

    void validate() const;
};

struct EstimatorSummary {
    std::vector<std::pair<std::string, double>> quantiles;  // (label, value), nondecreasing
    double level_one_minus_delta = 0.0;
    double mean_error = 0.0;
    Index failures = 0;
    // slab only
    double feasibility_rate = 0.0;
    double eps_mean = 0.0;
    double eps_min = 0.0;
    double eps_max = 0.0;
};

struct BoundSummary {
    double r_weak = 0.0;
    MonteCarloEstimate e_g;
    MonteCarloEstimate e_yn;
    double oracle_epsilon = 0.0;
    std::optional<double> euclidean_epsilon;
    Index n = 1;
};

struct ExperimentReport {
    ExperimentConfig config;
    BoundSummary bounds;
    std::map<std::string, EstimatorSummary> estimators;
    /// Per-trial errors (+inf for a failed estimate), indexed by trial.
    std::map<std::string, std::vector<double>> errors;
    /// Per-trial epsilon used by the slab estimator (NaN when it failed).
    std::vector<double> slab_epsilons;
};

/// Order statistic at rank ceil(level * count), 1-based.
double empirical_quantile(std::vector<double> values, double level);

ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& spec);
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& report);
/// One row per (estimator, quantile): estimator,quantile,level,error
std::string report_csv(const ExperimentReport& report);

}  // namespace normest
