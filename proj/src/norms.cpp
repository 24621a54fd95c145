#include "normest/norms.hpp"

#include "normest/io.hpp"
#include "normest/rng.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace normest {

NormSpec NormSpec::lp(double p) {
    NormSpec s{NormKind::Lp, p, {}};
    s.validate();
    return s;
}

NormSpec NormSpec::polytope(RowMatrix functionals) {
    NormSpec s{NormKind::CustomPolytope, 0.0, std::move(functionals)};
    s.validate();
    return s;
}

void NormSpec::validate() const {
    switch (kind) {
        case NormKind::Lp:
            if (!(p > 1.0) || !std::isfinite(p)) {
                throw InvalidArgument("lp norm requires finite p > 1 (use l1 / linf for the endpoints)");
            }
            break;
        case NormKind::CustomPolytope:
            if (custom_functionals.rows() == 0 || custom_functionals.cols() == 0) {
                throw InvalidArgument("polytope norm requires a nonempty list of functionals");
            }
            if (!custom_functionals.allFinite()) {
                throw InvalidArgument("polytope functionals must be finite");
            }
            for (Index k = 0; k < custom_functionals.rows(); ++k) {
                if (custom_functionals.row(k).cwiseAbs().maxCoeff() == 0.0) {
                    throw InvalidArgument("polytope functional " + std::to_string(k) + " is zero");
                }
            }
            break;
        default:
            break;
    }
}

std::string to_string(const NormSpec& spec) {
    switch (spec.kind) {
        case NormKind::Linf: return "linf";
        case NormKind::L1: return "l1";
        case NormKind::L2: return "l2";
        case NormKind::Lp: return "lp:" + io::format_double(spec.p);
        case NormKind::CustomPolytope: return "poly";
    }
    return "?";
}

NormSpec parse_norm_spec(std::string_view text) {
    if (text == "linf") return NormSpec::linf();
    if (text == "l1") return NormSpec::l1();
    if (text == "l2") return NormSpec::l2();
    if (text.starts_with("lp:")) {
        const auto arg = text.substr(3);
        double p = 0.0;
        auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), p);
        if (ec != std::errc() || ptr != arg.data() + arg.size()) {
            throw ParseError("norm: cannot parse exponent in '" + std::string(text) + "'");
        }
        if (!(p > 1.0) || !std::isfinite(p)) {
            throw ParseError("norm: lp exponent must be a finite number > 1, got '" + std::string(arg) + "'");
        }
        return NormSpec::lp(p);
    }
    if (text.starts_with("poly:")) {
        return NormSpec::polytope(io::read_csv(std::string(text.substr(5))));
    }
    throw ParseError("norm: unknown norm '" + std::string(text) +
                     "' (expected linf, l1, l2, lp:<p>, poly:<path.csv>)");
}

namespace {

RowMatrix sign_vectors_exact(Index d) {
    // Representatives have a +1 first coordinate; bit b of the index sets coordinate b+1.
    const Index reps = Index{1} << (d - 1);
    RowMatrix out(reps, d);
    for (Index r = 0; r < reps; ++r) {
        out(r, 0) = 1.0;
        for (Index b = 1; b < d; ++b) {
            out(r, b) = ((r >> (b - 1)) & 1) ? -1.0 : 1.0;
        }
    }
    return out;
}

RowMatrix sign_vectors_sampled(Index d, Index count, Rng& rng) {
    std::set<std::vector<bool>> seen;
    RowMatrix out(count, d);
    std::bernoulli_distribution coin(0.5);
    Index filled = 0;
    std::vector<bool> bits(static_cast<std::size_t>(d));
    while (filled < count) {
        bits[0] = false;
        for (Index b = 1; b < d; ++b) bits[static_cast<std::size_t>(b)] = coin(rng);
        if (!seen.insert(bits).second) continue;
        for (Index b = 0; b < d; ++b) out(filled, b) = bits[static_cast<std::size_t>(b)] ? -1.0 : 1.0;
        ++filled;
    }
    return out;
}

RowMatrix sphere_sample(Index d, Index count, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    RowMatrix out(count, d);
    for (Index k = 0; k < count; ++k) {
        double nrm = 0.0;
        do {
            for (Index i = 0; i < d; ++i) out(k, i) = gauss(rng);
            nrm = out.row(k).norm();
        } while (nrm == 0.0);
        out.row(k) /= nrm;
    }
    return out;
}

// Uniform-in-cone points on the unit q-sphere: normalize i.i.d. draws with
// density proportional to exp(-|x|^q).
RowMatrix q_sphere_sample(Index d, Index count, double q, Rng& rng) {
    std::gamma_distribution<double> gamma(1.0 / q, 1.0);
    std::bernoulli_distribution coin(0.5);
    RowMatrix out(count, d);
    for (Index k = 0; k < count; ++k) {
        double sum = 0.0;
        do {
            sum = 0.0;
            for (Index i = 0; i < d; ++i) {
                const double g = gamma(rng);
                const double mag = std::pow(g, 1.0 / q);
                out(k, i) = coin(rng) ? -mag : mag;
                sum += g;  // |x_i|^q == g
            }
        } while (sum == 0.0);
        out.row(k) /= std::pow(sum, 1.0 / q);
    }
    return out;
}

}  // namespace

FunctionalSet dual_functionals(const NormSpec& spec, Index d, int budget, std::uint64_t seed) {
    if (d < 1) throw InvalidArgument("dual_functionals: dimension must be >= 1");
    if (budget < 1) throw InvalidArgument("dual_functionals: budget must be >= 1");
    spec.validate();

    FunctionalSet fs;
    fs.norm = spec;
    fs.seed = seed;
    Rng rng(derive_seed(seed, 0));

    switch (spec.kind) {
        case NormKind::Linf:
            fs.vectors = RowMatrix::Identity(d, d);
            fs.exact = true;
            break;
        case NormKind::L1: {
            const bool small = d < 62 && (std::uint64_t{1} << d) <= static_cast<std::uint64_t>(budget);
            if (small) {
                fs.vectors = sign_vectors_exact(d);
                fs.exact = true;
            } else {
                Index reps = budget;
                if (d - 1 < 62) reps = std::min<Index>(reps, Index{1} << (d - 1));
                fs.vectors = sign_vectors_sampled(d, reps, rng);
                fs.exact = false;
            }
            break;
        }
        case NormKind::L2:
            fs.vectors = sphere_sample(d, budget, rng);
            fs.exact = d == 1;
            break;
        case NormKind::Lp: {
            const double q = spec.p / (spec.p - 1.0);
            fs.vectors = q_sphere_sample(d, budget, q, rng);
            fs.exact = d == 1;
            break;
        }
        case NormKind::CustomPolytope:
            if (spec.custom_functionals.cols() != d) {
                throw InvalidArgument("dual_functionals: polytope functionals have dimension " +
                                      std::to_string(spec.custom_functionals.cols()) + ", expected " +
                                      std::to_string(d));
            }
            fs.vectors = spec.custom_functionals;
            fs.exact = true;
            break;
    }
    return fs;
}

double norm_eval(const Eigen::Ref<const Vector>& v, const FunctionalSet& fs) {
    if (fs.size() == 0) throw InvalidArgument("norm_eval: empty functional set");
    if (v.size() != fs.dim()) {
        throw InvalidArgument("norm_eval: vector dimension " + std::to_string(v.size()) +
                              " does not match functional dimension " + std::to_string(fs.dim()));
    }
    return (fs.vectors * v).cwiseAbs().maxCoeff();
}

double exact_norm(const Eigen::Ref<const Vector>& v, const FunctionalSet& fs) {
    if (fs.norm.kind == NormKind::CustomPolytope) return norm_eval(v, fs);
    if (v.size() != fs.dim()) throw InvalidArgument("exact_norm: dimension mismatch");
    return direct_norm(v, fs.norm);
}

double direct_norm(const Eigen::Ref<const Vector>& v, const NormSpec& spec) {
    switch (spec.kind) {
        case NormKind::Linf: return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
        case NormKind::L1: return v.cwiseAbs().sum();
        case NormKind::L2: return v.norm();
        case NormKind::Lp: {
            const double scale = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
            if (scale == 0.0) return 0.0;
            double sum = 0.0;
            for (Index i = 0; i < v.size(); ++i) sum += std::pow(std::abs(v[i]) / scale, spec.p);
            return scale * std::pow(sum, 1.0 / spec.p);
        }
        case NormKind::CustomPolytope:
            throw InvalidArgument("direct_norm: a polytope norm has no closed form");
    }
    return 0.0;
}

}  // namespace normest
