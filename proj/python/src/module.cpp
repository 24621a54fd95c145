#include "normest/baselines.hpp"
#include "normest/blocks.hpp"
#include "normest/bounds.hpp"
#include "normest/harness.hpp"
#include "normest/io.hpp"
#include "normest/slab_estimator.hpp"
#include "normest/uniform_mom.hpp"
#include "normest/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace normest;

namespace {

FunctionalSet functionals(const std::string& norm, Index d, int budget, std::uint64_t seed) {
    return dual_functionals(parse_norm_spec(norm), d, budget, seed);
}

py::dict result_dict(const EstimateResult& r) {
    py::dict out;
    out["point"] = r.point;
    out["epsilon_used"] = r.epsilon_used;
    out["feasible"] = r.feasible;
    out["iterations"] = r.iterations;
    out["n"] = r.n;
    out["m"] = r.m;
    out["dropped"] = r.dropped;
    out["functional_count"] = r.functional_count;
    out["exact"] = r.exact;
    out["worst_violation"] = r.certificate.worst_violation;
    if (r.empty_witness) out["empty_witness"] = *r.empty_witness;
    return out;
}

EstimatorOptions options(int budget, std::uint64_t seed, double kappa) {
    EstimatorOptions o;
    o.budget = budget;
    o.seed = seed;
    o.kappa = kappa;
    return o;
}

}  // namespace

PYBIND11_MODULE(_normest, m) {
    m.doc() = "Norm-aware median-of-means mean estimation";
    m.attr("__version__") = kVersion;

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InvalidArgument& e) {
            py::set_error(PyExc_ValueError, e.what());
        }
    });

    py::class_<FunctionalSet>(m, "FunctionalSet")
        .def_readonly("vectors", &FunctionalSet::vectors)
        .def_readonly("exact", &FunctionalSet::exact)
        .def_property_readonly("size", &FunctionalSet::signed_size)
        .def_property_readonly("dim", &FunctionalSet::dim)
        .def_property_readonly("norm", [](const FunctionalSet& f) { return to_string(f.norm); });

    m.def("dual_functionals", &functionals, py::arg("norm"), py::arg("d"), py::arg("budget") = kDefaultBudget,
          py::arg("seed") = 0);
    m.def("norm_eval", [](const Vector& v, const FunctionalSet& fs) { return norm_eval(v, fs); });
    m.def("exact_norm", [](const Vector& v, const FunctionalSet& fs) { return exact_norm(v, fs); });

    m.def("scalar_mom", [](const std::vector<double>& v, Index n) { return scalar_mom(v, n); });
    m.def("blocks_for_confidence", [](double delta, Index N, double kappa) {
        return blocks_for_confidence(delta, N, kappa).n;
    }, py::arg("delta"), py::arg("N"), py::arg("kappa") = 1.0);
    m.def("majority_depth_set", [](const std::vector<double>& v, double eps) {
        std::vector<std::pair<double, double>> out;
        for (const auto& iv : majority_depth_set(v, eps).intervals) out.emplace_back(iv.lo, iv.hi);
        return out;
    });

    m.def("estimate_mean",
          [](const RowMatrix& x, const std::string& norm, double delta, double epsilon, int budget,
             std::uint64_t seed, double kappa) {
              return result_dict(
                  estimate_mean(SampleMatrix(x), parse_norm_spec(norm), delta, epsilon, options(budget, seed, kappa)));
          },
          py::arg("sample"), py::arg("norm") = "linf", py::arg("delta") = 0.05, py::arg("epsilon") = 1.0,
          py::arg("budget") = kDefaultBudget, py::arg("seed") = 0, py::arg("kappa") = 1.0);
    m.def("adaptive_estimate",
          [](const RowMatrix& x, const std::string& norm, double delta, double eps_tol, int budget,
             std::uint64_t seed, double kappa) {
              return result_dict(adaptive_estimate(SampleMatrix(x), parse_norm_spec(norm), delta, eps_tol,
                                                   options(budget, seed, kappa)));
          },
          py::arg("sample"), py::arg("norm") = "linf", py::arg("delta") = 0.05, py::arg("eps_tol") = 1e-3,
          py::arg("budget") = kDefaultBudget, py::arg("seed") = 0, py::arg("kappa") = 1.0);

    m.def("weak_variance_R", [](const Eigen::MatrixXd& cov, const std::string& norm, int budget, std::uint64_t seed) {
        return weak_variance_R(CovarianceModel(cov), functionals(norm, cov.rows(), budget, seed));
    }, py::arg("cov"), py::arg("norm") = "linf", py::arg("budget") = kDefaultBudget, py::arg("seed") = 0);
    m.def("gaussian_norm_expectation",
          [](const Eigen::MatrixXd& cov, const std::string& norm, Index trials, std::uint64_t seed, int budget) {
              const auto mc = gaussian_norm_expectation(CovarianceModel(cov), functionals(norm, cov.rows(), budget, seed),
                                                        trials, seed);
              return std::make_pair(mc.mean, mc.standard_error);
          },
          py::arg("cov"), py::arg("norm") = "linf", py::arg("trials") = 10000, py::arg("seed") = 0,
          py::arg("budget") = kDefaultBudget);
    m.def("oracle_epsilon",
          [](double e_yn, double e_g, double r_weak, Index N, double delta, double c) {
              return oracle_epsilon({e_yn, e_g, r_weak, N, delta, c});
          },
          py::arg("e_yn"), py::arg("e_g"), py::arg("r_weak"), py::arg("N"), py::arg("delta"), py::arg("c") = 1.0);
    m.def("euclidean_bound", [](const Eigen::MatrixXd& cov, Index N, double delta, double c) {
        return euclidean_bound(CovarianceModel(cov), N, delta, c);
    }, py::arg("cov"), py::arg("N"), py::arg("delta"), py::arg("c") = 1.0);

    m.def("certify_uniform",
          [](const RowMatrix& x, const std::string& norm, const Vector& mu, double r, Index n, int budget,
             std::uint64_t seed) {
              const auto rep = certify_uniform(SampleMatrix(x), functionals(norm, x.cols(), budget, seed), mu, r, n);
              py::dict out;
              out["r"] = rep.r;
              out["n"] = rep.n;
              out["required"] = rep.required;
              out["per_function_coverage"] = rep.per_function_coverage;
              out["min_coverage"] = rep.min_coverage;
              out["pass"] = rep.pass;
              return out;
          },
          py::arg("sample"), py::arg("norm"), py::arg("mu"), py::arg("r"), py::arg("n"),
          py::arg("budget") = kDefaultBudget, py::arg("seed") = 0);

    m.def("empirical_mean", [](const RowMatrix& x) { return empirical_mean(SampleMatrix(x)); });
    m.def("coordinatewise_mom", [](const RowMatrix& x, Index n) { return coordinatewise_mom(SampleMatrix(x), n); });
    m.def("geometric_mom", [](const RowMatrix& x, Index n) { return geometric_mom(SampleMatrix(x), n).point; });

    m.def("_sample_distribution", [](const std::string& spec, Index N, Index d, std::uint64_t seed) {
        return sample_distribution(distribution_from_json(nlohmann::json::parse(spec)), N, d, seed).data();
    });
    m.def("_run_experiment", [](const std::string& config, unsigned threads) {
        ExperimentConfig c = config_from_json(nlohmann::json::parse(config));
        c.threads = threads;
        ExperimentReport r;
        {
            py::gil_scoped_release release;
            r = run_experiment(c);
        }
        return io::dump_stable(to_json(r), -1);
    });
}
