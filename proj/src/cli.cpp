#include "normest/cli.hpp"

#include "normest/blocks.hpp"
#include "normest/bounds.hpp"
#include "normest/harness.hpp"
#include "normest/io.hpp"
#include "normest/rng.hpp"
#include "normest/slab_estimator.hpp"
#include "normest/uniform_mom.hpp"
#include "normest/version.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

namespace normest::cli {

namespace {

using nlohmann::json;

std::uint64_t default_seed() {
    const char* env = std::getenv("NORMEST_SEED");
    if (env == nullptr || *env == '\0') return 0;
    std::uint64_t seed = 0;
    const std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("NORMEST_SEED: expected an unsigned integer, got '" + std::string(text) + "'");
    }
    return seed;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + out_path + "'");
    f << text;
}

json result_json(const EstimateResult& r) {
    return {
        {"point", io::to_json(r.point)},
        {"epsilon_used", r.epsilon_used},
        {"feasible", r.feasible},
        {"iterations", r.iterations},
        {"n", r.n},
        {"m", r.m},
        {"dropped", r.dropped},
        {"blocks_clamped", r.blocks_clamped},
        {"functional_count", r.functional_count},
        {"exact", r.exact},
        {"worst_violation", r.certificate.worst_violation},
        {"worst_functional", r.certificate.worst_functional},
    };
}

struct EstimateArgs {
    std::string input;
    std::string norm = "linf";
    double delta = 0.05;
    std::optional<double> epsilon;
    bool adaptive = false;
    int budget = kDefaultBudget;
    std::uint64_t seed = 0;
    double kappa = 1.0;
    double tol = 1e-6;
    double eps_tol = 1e-3;
    Index max_iter = 0;
    std::optional<std::uint64_t> shuffle_seed;
    std::string out;
};

int run_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
    const SampleMatrix sample(io::read_csv(a.input));
    const NormSpec spec = parse_norm_spec(a.norm);
    EstimatorOptions opts;
    opts.budget = a.budget;
    opts.seed = a.seed;
    opts.kappa = a.kappa;
    opts.shuffle_seed = a.shuffle_seed;
    opts.solver.tol = a.tol;
    opts.solver.max_iter = a.max_iter;
    const FunctionalSet fs = dual_functionals(spec, sample.dim(), a.budget, a.seed);
    const EstimateResult r = a.adaptive ? adaptive_estimate(sample, fs, a.delta, a.eps_tol, opts)
                                        : estimate_mean(sample, fs, a.delta, *a.epsilon, opts);
    if (r.blocks_clamped) err << "warning: requested block count exceeds N; clamped to N\n";

    json config{{"command", "estimate"}, {"input", a.input}, {"norm", a.norm}, {"delta", a.delta},
                {"budget", a.budget}, {"seed", a.seed}, {"kappa", a.kappa}, {"tol", a.tol},
                {"max_iter", a.max_iter}, {"adaptive", a.adaptive}};
    if (a.adaptive) config["eps_tol"] = a.eps_tol;
    if (a.epsilon) config["epsilon"] = *a.epsilon;
    if (a.shuffle_seed) config["shuffle_seed"] = *a.shuffle_seed;
    json report = result_json(r);
    report["config"] = config;
    report["version"] = kVersion;
    emit(io::dump_stable(report) + "\n", a.out, out);
    return r.feasible ? kOk : kNegative;
}

struct BoundsArgs {
    std::string norm = "linf";
    std::string cov;
    Index n_samples = 0;
    double delta = 0.05;
    Index trials = 10000;
    std::uint64_t seed = 0;
    double c = 1.0;
    int budget = kDefaultBudget;
    std::string input;
    std::string mu;
    unsigned threads = 1;
    std::string out;
};

int run_bounds(const BoundsArgs& a, std::ostream& out) {
    Eigen::MatrixXd sigma = io::read_csv(a.cov);
    const CovarianceModel cov(std::move(sigma), CovarianceSource::True);
    const NormSpec spec = parse_norm_spec(a.norm);
    const FunctionalSet fs = dual_functionals(spec, cov.dim(), a.budget, a.seed);
    const double r_weak = weak_variance_R(cov, fs);
    const MonteCarloEstimate e_g =
        gaussian_norm_expectation(cov, fs, a.trials, derive_seed(a.seed, 1), a.threads);

    json report{{"r_weak", r_weak}, {"e_g", e_g.mean}, {"e_g_se", e_g.standard_error}};
    double e_yn = e_g.mean;
    if (!a.input.empty()) {
        const SampleMatrix sample(io::read_csv(a.input));
        std::optional<Vector> mu;
        if (!a.mu.empty()) mu = io::read_csv_vector(a.mu);
        const RademacherEstimate y =
            rademacher_norm_expectation(sample, mu, fs, a.trials, derive_seed(a.seed, 2), a.threads);
        e_yn = y.mean;
        report["e_yn_se"] = y.standard_error;
        report["e_yn_source"] = y.plug_in_mean ? "rademacher_plug_in_mean" : "rademacher";
    } else {
        report["e_yn_source"] = "gaussian_surrogate";
    }
    report["e_yn"] = e_yn;
    report["epsilon"] = oracle_epsilon({e_yn, e_g.mean, r_weak, a.n_samples, a.delta, a.c});
    if (spec.kind == NormKind::L2) report["euclidean_epsilon"] = euclidean_bound(cov, a.n_samples, a.delta, a.c);
    json config{{"command", "bounds"}, {"norm", a.norm}, {"cov", a.cov}, {"n_samples", a.n_samples},
                {"delta", a.delta}, {"trials", a.trials}, {"seed", a.seed}, {"c", a.c},
                {"budget", a.budget}};
    if (!a.input.empty()) config["input"] = a.input;
    if (!a.mu.empty()) config["mu"] = a.mu;
    report["config"] = config;
    report["covariance_source"] = "true";
    report["exact"] = fs.exact;
    report["functional_count"] = fs.signed_size();
    report["version"] = kVersion;
    emit(io::dump_stable(report) + "\n", a.out, out);
    return kOk;
}

struct CertifyArgs {
    std::string input;
    std::string norm = "l2";
    int budget = kDefaultBudget;
    std::string mu;
    double r = 0.0;
    Index blocks = 1;
    std::uint64_t seed = 0;
    std::string out;
};

int run_certify(const CertifyArgs& a, std::ostream& out) {
    const SampleMatrix sample(io::read_csv(a.input));
    const Vector mu = io::read_csv_vector(a.mu);
    if (mu.size() != sample.dim()) {
        throw ParseError(a.mu + ": mean has " + std::to_string(mu.size()) + " entries, sample has d=" +
                         std::to_string(sample.dim()));
    }
    const FunctionalSet fs = dual_functionals(parse_norm_spec(a.norm), sample.dim(), a.budget, a.seed);
    const CertificationReport c = certify_uniform(sample, fs, mu, a.r, a.blocks);
    json report{{"r", c.r},
                {"n", c.n},
                {"required", c.required},
                {"per_function_coverage", c.per_function_coverage},
                {"min_coverage", c.min_coverage},
                {"worst_function", c.worst_function},
                {"pass", c.pass},
                {"functional_count", fs.signed_size()},
                {"exact", fs.exact},
                {"version", kVersion},
                {"config", {{"command", "certify"}, {"input", a.input}, {"norm", a.norm},
                            {"budget", a.budget}, {"mu", a.mu}, {"r", a.r}, {"blocks", a.blocks},
                            {"seed", a.seed}}}};
    emit(io::dump_stable(report) + "\n", a.out, out);
    return c.pass ? kOk : kNegative;
}

struct BenchArgs {
    std::string config;
    std::string out;
    std::string csv;
    unsigned threads = 0;
};

int run_bench(const BenchArgs& a, std::ostream& out) {
    json j;
    try {
        j = json::parse(io::read_file(a.config));
    } catch (const json::parse_error& e) {
        throw ParseError(a.config + ": " + e.what());
    }
    ExperimentConfig config = config_from_json(j);
    config.threads = a.threads;
    const ExperimentReport report = run_experiment(config);
    emit(io::dump_stable(to_json(report)) + "\n", a.out, out);
    if (!a.csv.empty()) {
        std::ofstream f(a.csv, std::ios::binary);
        if (!f) throw ParseError("cannot write '" + a.csv + "'");
        f << report_csv(report);
    }
    return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Norm-aware median-of-means mean estimation", "normest"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    unsigned threads = 0;

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    EstimateArgs ea;
    ea.seed = seed;
    auto* est = app.add_subcommand("estimate", "Estimate the mean of a CSV sample");
    est->add_option("--input", ea.input, "CSV sample, one observation per row")->required();
    est->add_option("--norm", ea.norm, "linf | l1 | l2 | lp:<p> | poly:<file.csv>");
    est->add_option("--delta", ea.delta, "Confidence parameter in (0,1)");
    auto* eps_opt = est->add_option("--epsilon", ea.epsilon, "Slab half-width");
    auto* adapt_opt = est->add_flag("--adaptive", ea.adaptive, "Search for the smallest feasible epsilon");
    eps_opt->excludes(adapt_opt);
    est->add_option("--budget", ea.budget, "Functional budget for sampled dual balls");
    est->add_option("--seed", ea.seed, "Seed (default: $NORMEST_SEED or 0)");
    est->add_option("--kappa", ea.kappa, "Block-count multiplier on ln(2/delta)");
    est->add_option("--tol", ea.tol, "Solver tolerance relative to epsilon");
    est->add_option("--eps-tol", ea.eps_tol, "Relative bracket width for --adaptive");
    est->add_option("--max-iter", ea.max_iter, "Projection step limit (0 = 50 x functionals)");
    est->add_option("--shuffle-seed", ea.shuffle_seed, "Shuffle rows with this seed before blocking");
    est->add_option("--out", ea.out, "Write the JSON report here instead of stdout");
    est->add_option("--threads", threads, "Worker threads (0 = auto)");

    BoundsArgs ba;
    ba.seed = seed;
    auto* bnd = app.add_subcommand("bounds", "Compute the target accuracy from a covariance");
    bnd->add_option("--norm", ba.norm, "linf | l1 | l2 | lp:<p> | poly:<file.csv>");
    bnd->add_option("--cov", ba.cov, "CSV covariance matrix")->required();
    bnd->add_option("--n-samples", ba.n_samples, "Sample size N")->required()->check(CLI::PositiveNumber);
    bnd->add_option("--delta", ba.delta, "Confidence parameter in (0,1)");
    bnd->add_option("--trials", ba.trials, "Monte Carlo trials");
    bnd->add_option("--seed", ba.seed, "Seed (default: $NORMEST_SEED or 0)");
    bnd->add_option("--c", ba.c, "Accuracy constant");
    bnd->add_option("--budget", ba.budget, "Functional budget for sampled dual balls");
    bnd->add_option("--input", ba.input, "Sample for E||Y_N|| (otherwise E||G|| is used)");
    bnd->add_option("--mu", ba.mu, "True mean for --input (otherwise the sample mean)");
    bnd->add_option("--out", ba.out, "Write the JSON report here instead of stdout");
    bnd->add_option("--threads", threads, "Worker threads (0 = auto)");

    CertifyArgs ca;
    ca.seed = seed;
    auto* cert = app.add_subcommand("certify", "Check uniform median-of-means coverage");
    cert->add_option("--input", ca.input, "CSV sample")->required();
    cert->add_option("--norm", ca.norm, "linf | l1 | l2 | lp:<p> | poly:<file.csv>");
    cert->add_option("--budget", ca.budget, "Functional budget for sampled dual balls");
    cert->add_option("--mu", ca.mu, "CSV true mean (one row or one column)")->required();
    cert->add_option("--r", ca.r, "Radius")->required();
    cert->add_option("--blocks", ca.blocks, "Block count n")->required();
    cert->add_option("--seed", ca.seed, "Seed (default: $NORMEST_SEED or 0)");
    cert->add_option("--out", ca.out, "Write the JSON report here instead of stdout");
    cert->add_option("--threads", threads, "Worker threads (0 = auto)");

    BenchArgs bea;
    auto* bench = app.add_subcommand("bench", "Run a Monte Carlo experiment");
    bench->add_option("--config", bea.config, "Experiment JSON")->required();
    bench->add_option("--out", bea.out, "Write the JSON report here instead of stdout");
    bench->add_option("--csv", bea.csv, "Also write quantiles as CSV");
    bench->add_option("--threads", threads, "Worker threads (0 = auto)");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (est->parsed()) {
            if (!ea.adaptive && !ea.epsilon) {
                err << "error: estimate requires --epsilon or --adaptive\n";
                return kUsage;
            }
            return run_estimate(ea, out, err);
        }
        ba.threads = threads;
        if (bnd->parsed()) return run_bounds(ba, out);
        if (cert->parsed()) return run_certify(ca, out);
        bea.threads = threads;
        return run_bench(bea, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace normest::cli
