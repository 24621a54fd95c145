#include "normest/harness.hpp"

#include "normest/baselines.hpp"
#include "normest/blocks.hpp"
#include "normest/io.hpp"
#include "normest/parallel.hpp"
#include "normest/rng.hpp"
#include "normest/slab_estimator.hpp"
#include "normest/version.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace normest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vector broadcast(const Vector& v, Index d, double fill, const char* what) {
    if (v.size() == 0) return Vector::Constant(d, fill);
    if (v.size() == 1) return Vector::Constant(d, v[0]);
    if (v.size() != d) {
        throw InvalidArgument(std::string(what) + " has " + std::to_string(v.size()) +
                              " entries, expected 1 or " + std::to_string(d));
    }
    return v;
}

// Stream indices reserved for quantities computed once per experiment.
constexpr std::uint64_t kBoundStream = 0xB0B0B0B0ULL << 20;

}  // namespace

Vector DistributionSpec::mean(Index d) const {
    return broadcast(mu, d, 0.0, "mu");
}

void DistributionSpec::validate(Index d) const {
    if (d < 1) throw InvalidArgument("distribution: d must be >= 1");
    if (!mean(d).allFinite()) throw InvalidArgument("distribution: mu must be finite");
    std::visit(overloaded{
                   [&](const GaussianLaw& g) {
                       if (g.cov.size() != 0) {
                           if (g.cov.rows() != d || g.cov.cols() != d) {
                               throw InvalidArgument("gaussian: covariance must be d x d");
                           }
                           CovarianceModel check(g.cov);
                       }
                   },
                   [&](const StudentTLaw& t) {
                       if (!(t.dof > 2.0)) throw InvalidArgument("student_t: dof must be > 2 for finite variance");
                       const Vector s = broadcast(t.scale, d, 1.0, "student_t scale");
                       if ((s.array() < 0.0).any() || !s.allFinite()) {
                           throw InvalidArgument("student_t: scale must be finite and >= 0");
                       }
                   },
                   [&](const ParetoSymLaw& p) {
                       if (!(p.alpha > 2.0)) throw InvalidArgument("pareto_sym: alpha must be > 2 for finite variance");
                       if (!(p.scale >= 0.0) || !std::isfinite(p.scale)) {
                           throw InvalidArgument("pareto_sym: scale must be finite and >= 0");
                       }
                   },
                   [&](const LogNormalLaw& l) {
                       if (!(l.sigma_log >= 0.0) || l.sigma_log > 20.0) {
                           throw InvalidArgument("lognormal: sigma_log must lie in [0, 20]");
                       }
                   },
                   [&](const ChebyshevSharpLaw& c) {
                       if (!(c.delta > 0.0 && c.delta < 1.0)) {
                           throw InvalidArgument("chebyshev_sharp: delta must lie in (0, 1)");
                       }
                       if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma)) {
                           throw InvalidArgument("chebyshev_sharp: sigma must be finite and >= 0");
                       }
                   },
               },
               law);
}

SampleMatrix sample_distribution(const DistributionSpec& spec, Index N, Index d, std::uint64_t seed) {
    if (N < 1) throw InvalidArgument("sample_distribution: N must be >= 1");
    spec.validate(d);
    const Vector mu = spec.mean(d);
    Rng rng = make_rng(seed, 0);
    RowMatrix x(N, d);

    std::visit(overloaded{
                   [&](const GaussianLaw& g) {
                       const Eigen::MatrixXd L =
                           g.cov.size() == 0 ? Eigen::MatrixXd::Identity(d, d) : cholesky_factor(g.cov);
                       std::normal_distribution<double> gauss(0.0, 1.0);
                       Vector z(d);
                       for (Index i = 0; i < N; ++i) {
                           for (Index k = 0; k < d; ++k) z[k] = gauss(rng);
                           x.row(i) = (L * z).transpose();
                       }
                   },
                   [&](const StudentTLaw& t) {
                       const Vector s = broadcast(t.scale, d, 1.0, "student_t scale");
                       std::student_t_distribution<double> student(t.dof);
                       for (Index i = 0; i < N; ++i) {
                           for (Index k = 0; k < d; ++k) x(i, k) = s[k] * student(rng);
                       }
                   },
                   [&](const ParetoSymLaw& p) {
                       for (Index i = 0; i < N; ++i) {
                           for (Index k = 0; k < d; ++k) {
                               const std::uint64_t bits = rng();
                               // 53 uniform bits in (0, 1], one sign bit
                               const double u = (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
                               const double mag = p.scale * (std::pow(u, -1.0 / p.alpha) - 1.0);
                               x(i, k) = (bits & 1) ? mag : -mag;
                           }
                       }
                   },
                   [&](const LogNormalLaw& l) {
                       std::normal_distribution<double> gauss(0.0, 1.0);
                       const double shift = std::exp(0.5 * l.sigma_log * l.sigma_log);
                       for (Index i = 0; i < N; ++i) {
                           for (Index k = 0; k < d; ++k) x(i, k) = std::exp(l.sigma_log * gauss(rng)) - shift;
                       }
                   },
                   [&](const ChebyshevSharpLaw& c) {
                       const double p = std::min(1.0, 2.0 * c.delta / static_cast<double>(N));
                       const double jump = c.sigma / std::sqrt(p);
                       std::uniform_real_distribution<double> unif(0.0, 1.0);
                       for (Index i = 0; i < N; ++i) {
                           for (Index k = 0; k < d; ++k) {
                               const double u = unif(rng);
                               x(i, k) = u < 0.5 * p ? jump : (u < p ? -jump : 0.0);
                           }
                       }
                   },
               },
               spec.law);
    x.rowwise() += mu.transpose();
    return SampleMatrix(std::move(x));
}

CovarianceModel true_covariance(const DistributionSpec& spec, Index d) {
    spec.validate(d);
    const auto diag = [d](double v) -> Eigen::MatrixXd { return v * Eigen::MatrixXd::Identity(d, d); };
    Eigen::MatrixXd sigma = std::visit(
        overloaded{
            [&](const GaussianLaw& g) -> Eigen::MatrixXd {
                return g.cov.size() == 0 ? diag(1.0) : g.cov;
            },
            [&](const StudentTLaw& t) -> Eigen::MatrixXd {
                const Vector s = broadcast(t.scale, d, 1.0, "student_t scale");
                return (s.array().square() * (t.dof / (t.dof - 2.0))).matrix().asDiagonal();
            },
            [&](const ParetoSymLaw& p) -> Eigen::MatrixXd {
                return diag(2.0 * p.scale * p.scale / ((p.alpha - 1.0) * (p.alpha - 2.0)));
            },
            [&](const LogNormalLaw& l) -> Eigen::MatrixXd {
                const double s2 = l.sigma_log * l.sigma_log;
                return diag(std::expm1(s2) * std::exp(s2));
            },
            [&](const ChebyshevSharpLaw& c) -> Eigen::MatrixXd { return diag(c.sigma * c.sigma); },
        },
        spec.law);
    return CovarianceModel(std::move(sigma), CovarianceSource::True);
}

void ExperimentConfig::validate() const {
    if (d < 1) throw InvalidArgument("config: d must be >= 1");
    if (N < 1) throw InvalidArgument("config: N must be >= 1");
    if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("config: delta must lie in (0, 1)");
    if (budget < 1) throw InvalidArgument("config: budget must be >= 1");
    if (!(c >= 0.0)) throw InvalidArgument("config: c must be >= 0");
    if (!(kappa > 0.0)) throw InvalidArgument("config: kappa must be > 0");
    if (!(eps_tol > 0.0)) throw InvalidArgument("config: eps_tol must be > 0");
    if (bound_trials < 2) throw InvalidArgument("config: bound_trials must be >= 2");
    static const std::set<std::string> known{"empirical", "cw_mom", "geo_mom", "slab"};
    for (const auto& e : estimators) {
        if (!known.count(e)) throw InvalidArgument("config: unknown estimator '" + e + "'");
    }
    norm.validate();
    distribution.validate(d);
}

double empirical_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw InvalidArgument("empirical_quantile: no values");
    const double x = level * static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
    return values[rank - 1];
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.config = config;
    const Index d = config.d;
    const Vector mu = config.distribution.mean(d);
    const FunctionalSet fs = dual_functionals(config.norm, d, config.budget, config.master_seed);
    const Index n = blocks_for_confidence(config.delta, config.N, config.kappa).n;

    // Bound ingredients at the true covariance; E||Y_N|| on an independent sample.
    {
        const CovarianceModel cov = true_covariance(config.distribution, d);
        BoundSummary& b = report.bounds;
        b.n = n;
        b.r_weak = weak_variance_R(cov, fs);
        b.e_g = gaussian_norm_expectation(cov, fs, config.bound_trials,
                                          derive_seed(config.master_seed, kBoundStream), config.threads);
        const SampleMatrix reference = sample_distribution(
            config.distribution, config.N, d, derive_seed(config.master_seed, kBoundStream + 1));
        b.e_yn = rademacher_norm_expectation(reference, mu, fs, config.bound_trials,
                                             derive_seed(config.master_seed, kBoundStream + 2),
                                             config.threads);
        b.oracle_epsilon = oracle_epsilon(
            {b.e_yn.mean, b.e_g.mean, b.r_weak, config.N, config.delta, config.c});
        if (config.norm.kind == NormKind::L2) {
            b.euclidean_epsilon = euclidean_bound(cov, config.N, config.delta, config.c);
        }
    }

    const auto trials = static_cast<std::size_t>(config.trials);
    for (const auto& name : config.estimators) report.errors[name].assign(trials, kInf);
    report.slab_epsilons.assign(trials, std::numeric_limits<double>::quiet_NaN());

    EstimatorOptions slab_options;
    slab_options.budget = config.budget;
    slab_options.seed = config.master_seed;
    slab_options.kappa = config.kappa;

    parallel_for(trials, config.threads, [&](std::size_t t) {
        const SampleMatrix sample =
            sample_distribution(config.distribution, config.N, d, derive_seed(config.master_seed, t));
        for (const auto& name : config.estimators) {
            double& err = report.errors.at(name)[t];
            try {
                Vector est;
                if (name == "empirical") {
                    est = empirical_mean(sample);
                } else if (name == "cw_mom") {
                    est = coordinatewise_mom(sample, n);
                } else if (name == "geo_mom") {
                    est = geometric_mom(sample, n).point;
                } else {
                    const EstimateResult r =
                        config.slab_mode == SlabMode::Adaptive
                            ? adaptive_estimate(sample, fs, config.delta, config.eps_tol, slab_options)
                            : estimate_mean(sample, fs, config.delta, report.bounds.oracle_epsilon,
                                            slab_options);
                    if (!r.feasible) continue;
                    report.slab_epsilons[t] = r.epsilon_used;
                    est = r.point;
                }
                err = exact_norm(est - mu, fs);
            } catch (const Error&) {
                err = kInf;
            }
        }
    });

    const std::vector<std::pair<std::string, double>> levels{
        {"0.5", 0.5}, {"0.9", 0.9}, {"0.99", 0.99}, {"1-delta", 1.0 - config.delta}};
    for (const auto& name : config.estimators) {
        const auto& errs = report.errors[name];
        EstimatorSummary s;
        s.level_one_minus_delta = 1.0 - config.delta;
        for (const auto& [label, level] : levels) s.quantiles.emplace_back(label, empirical_quantile(errs, level));
        double sum = 0.0;
        for (double e : errs) {
            sum += e;
            if (std::isinf(e)) ++s.failures;
        }
        s.mean_error = sum / static_cast<double>(errs.size());
        if (name == "slab") {
            s.feasibility_rate = 1.0 - static_cast<double>(s.failures) / static_cast<double>(errs.size());
            double eps_sum = 0.0;
            Index count = 0;
            s.eps_min = kInf;
            s.eps_max = -kInf;
            for (double e : report.slab_epsilons) {
                if (std::isnan(e)) continue;
                eps_sum += e;
                ++count;
                s.eps_min = std::min(s.eps_min, e);
                s.eps_max = std::max(s.eps_max, e);
            }
            s.eps_mean = count ? eps_sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
            if (!count) s.eps_min = s.eps_max = s.eps_mean;
        }
        report.estimators[name] = std::move(s);
    }
    return report;
}

namespace {

nlohmann::json norm_to_json(const NormSpec& spec) {
    if (spec.kind != NormKind::CustomPolytope) return to_string(spec);
    auto rows = nlohmann::json::array();
    for (Index k = 0; k < spec.custom_functionals.rows(); ++k) {
        rows.push_back(io::to_json(spec.custom_functionals.row(k).transpose()));
    }
    return nlohmann::json{{"poly", rows}};
}

NormSpec norm_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_norm_spec(j.get<std::string>());
    if (j.is_object() && j.contains("poly") && j["poly"].is_array() && !j["poly"].empty()) {
        const auto& rows = j["poly"];
        const Vector first = io::vector_from_json(rows[0], "norm.poly[0]");
        RowMatrix m(static_cast<Index>(rows.size()), first.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const Vector r = io::vector_from_json(rows[k], "norm.poly[" + std::to_string(k) + "]");
            if (r.size() != first.size()) throw ParseError("norm.poly: rows differ in length");
            m.row(static_cast<Index>(k)) = r.transpose();
        }
        return NormSpec::polytope(std::move(m));
    }
    throw ParseError("norm: expected a string like \"linf\" or {\"poly\": [[...], ...]}");
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ParseError(field + ": expected a nonempty array of rows");
    const Index rows = static_cast<Index>(j.size());
    Eigen::MatrixXd m;
    for (Index r = 0; r < rows; ++r) {
        const Vector row = io::vector_from_json(j[static_cast<std::size_t>(r)], field + "[" + std::to_string(r) + "]");
        if (r == 0) m.resize(rows, row.size());
        if (row.size() != m.cols()) throw ParseError(field + ": rows differ in length");
        m.row(r) = row.transpose();
    }
    return m;
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key, T fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(context + "." + key + ": wrong type");
    }
}

Vector vector_or_scalar(const nlohmann::json& j, const std::string& field) {
    if (j.is_number()) return Vector::Constant(1, j.get<double>());
    return io::vector_from_json(j, field);
}

}  // namespace

nlohmann::json to_json(const DistributionSpec& spec) {
    nlohmann::json j = std::visit(
        overloaded{
            [](const GaussianLaw& g) {
                nlohmann::json o{{"kind", "gaussian"}};
                if (g.cov.size() != 0) {
                    auto rows = nlohmann::json::array();
                    for (Index r = 0; r < g.cov.rows(); ++r) rows.push_back(io::to_json(g.cov.row(r).transpose()));
                    o["cov"] = rows;
                }
                return o;
            },
            [](const StudentTLaw& t) {
                return nlohmann::json{{"kind", "student_t"}, {"dof", t.dof}, {"scale", io::to_json(t.scale)}};
            },
            [](const ParetoSymLaw& p) {
                return nlohmann::json{{"kind", "pareto_sym"}, {"alpha", p.alpha}, {"scale", p.scale}};
            },
            [](const LogNormalLaw& l) {
                return nlohmann::json{{"kind", "lognormal"}, {"sigma_log", l.sigma_log}};
            },
            [](const ChebyshevSharpLaw& c) {
                return nlohmann::json{{"kind", "chebyshev_sharp"}, {"delta", c.delta}, {"sigma", c.sigma}};
            },
        },
        spec.law);
    j["mu"] = io::to_json(spec.mu.size() ? spec.mu : Vector::Zero(1));
    return j;
}

DistributionSpec distribution_from_json(const nlohmann::json& j) {
    const std::string ctx = "distribution";
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ParseError("distribution.kind: missing or not a string");
    }
    DistributionSpec spec;
    const auto kind = j["kind"].get<std::string>();
    if (kind == "gaussian") {
        GaussianLaw g;
        if (j.contains("cov")) g.cov = matrix_from_json(j["cov"], "distribution.cov");
        spec.law = g;
    } else if (kind == "student_t") {
        StudentTLaw t;
        t.dof = get_field<double>(j, "dof", 3.0, ctx);
        if (j.contains("scale")) t.scale = vector_or_scalar(j["scale"], "distribution.scale");
        spec.law = t;
    } else if (kind == "pareto_sym") {
        spec.law = ParetoSymLaw{get_field<double>(j, "alpha", 3.0, ctx), get_field<double>(j, "scale", 1.0, ctx)};
    } else if (kind == "lognormal") {
        spec.law = LogNormalLaw{get_field<double>(j, "sigma_log", 1.0, ctx)};
    } else if (kind == "chebyshev_sharp") {
        spec.law = ChebyshevSharpLaw{get_field<double>(j, "delta", 0.01, ctx), get_field<double>(j, "sigma", 1.0, ctx)};
    } else {
        throw ParseError("distribution.kind: unknown kind '" + kind + "'");
    }
    if (j.contains("mu")) spec.mu = vector_or_scalar(j["mu"], "distribution.mu");
    return spec;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {
        {"distribution", to_json(c.distribution)},
        {"d", c.d},
        {"N", c.N},
        {"trials", c.trials},
        {"delta", c.delta},
        {"norm", norm_to_json(c.norm)},
        {"budget", c.budget},
        {"c", c.c},
        {"estimators", c.estimators},
        {"master_seed", c.master_seed},
        {"kappa", c.kappa},
        {"slab_mode", c.slab_mode == SlabMode::Adaptive ? "adaptive" : "oracle"},
        {"eps_tol", c.eps_tol},
        {"bound_trials", c.bound_trials},
    };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("config: expected a JSON object");
    const std::string ctx = "config";
    ExperimentConfig c;
    if (!j.contains("distribution")) throw ParseError("config.distribution: missing");
    c.distribution = distribution_from_json(j["distribution"]);
    c.d = get_field<Index>(j, "d", c.d, ctx);
    c.N = get_field<Index>(j, "N", c.N, ctx);
    c.trials = get_field<Index>(j, "trials", c.trials, ctx);
    c.delta = get_field<double>(j, "delta", c.delta, ctx);
    if (j.contains("norm")) c.norm = norm_from_json(j["norm"]);
    c.budget = get_field<int>(j, "budget", c.budget, ctx);
    c.c = get_field<double>(j, "c", c.c, ctx);
    c.estimators = get_field<std::vector<std::string>>(j, "estimators", c.estimators, ctx);
    c.master_seed = get_field<std::uint64_t>(j, "master_seed", c.master_seed, ctx);
    c.kappa = get_field<double>(j, "kappa", c.kappa, ctx);
    const auto mode = get_field<std::string>(j, "slab_mode", "adaptive", ctx);
    if (mode == "adaptive") {
        c.slab_mode = SlabMode::Adaptive;
    } else if (mode == "oracle") {
        c.slab_mode = SlabMode::Oracle;
    } else {
        throw ParseError("config.slab_mode: expected \"adaptive\" or \"oracle\"");
    }
    c.eps_tol = get_field<double>(j, "eps_tol", c.eps_tol, ctx);
    c.bound_trials = get_field<Index>(j, "bound_trials", c.bound_trials, ctx);
    static const std::set<std::string> known{"distribution", "d", "N", "trials", "delta", "norm",
                                             "budget", "c", "estimators", "master_seed", "kappa",
                                             "slab_mode", "eps_tol", "bound_trials"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw ParseError("config." + it.key() + ": unknown field");
    }
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    return c;
}

nlohmann::json to_json(const ExperimentReport& r) {
    nlohmann::json bounds{
        {"n", r.bounds.n},
        {"r_weak", r.bounds.r_weak},
        {"e_g", r.bounds.e_g.mean},
        {"e_g_se", r.bounds.e_g.standard_error},
        {"e_yn", r.bounds.e_yn.mean},
        {"e_yn_se", r.bounds.e_yn.standard_error},
        {"oracle_epsilon", r.bounds.oracle_epsilon},
        {"covariance_source", "true"},
    };
    if (r.bounds.euclidean_epsilon) bounds["euclidean_epsilon"] = *r.bounds.euclidean_epsilon;

    nlohmann::json estimators = nlohmann::json::object();
    for (const auto& [name, s] : r.estimators) {
        nlohmann::json q = nlohmann::json::object();
        for (const auto& [label, value] : s.quantiles) q[label] = value;
        nlohmann::json e{{"quantiles", q},
                         {"level_1_minus_delta", s.level_one_minus_delta},
                         {"mean_error", s.mean_error},
                         {"failures", s.failures}};
        if (name == "slab") {
            e["feasibility_rate"] = s.feasibility_rate;
            e["epsilon_used"] = {{"mean", s.eps_mean}, {"min", s.eps_min}, {"max", s.eps_max}};
        }
        estimators[name] = e;
    }
    return {{"version", kVersion}, {"config", to_json(r.config)}, {"bounds", bounds}, {"estimators", estimators}};
}

std::string report_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os << "estimator,quantile,level,error\n";
    for (const auto& [name, s] : r.estimators) {
        for (const auto& [label, value] : s.quantiles) {
            const double level = label == "1-delta" ? s.level_one_minus_delta : std::stod(label);
            os << name << ',' << label << ',' << io::format_double(level) << ',' << io::format_double(value) << '\n';
        }
    }
    return os.str();
}

}  // namespace normest
