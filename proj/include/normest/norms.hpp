#pragma once

// Norms on R^d described through their dual unit ball.
//
// A norm is evaluated as ||v|| = sup over extreme points t of the dual ball of
// <t, v>. For l_inf, l_1 (small d) and user-supplied polytopes the extreme
// points are enumerated exactly. For l_2 and l_p the dual sphere is replaced
// by a seeded random net, which only yields a lower bound on the norm; an
// estimator built on such a net certifies fewer directions than the true
// dual ball and can therefore be looser. `FunctionalSet::exact` reports which
// case applies.
//
// Functionals are stored as one representative per +/- pair. Every
// supremum in the library is taken over |<t, v>|.

#include "normest/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace normest {

enum class NormKind { Linf, L1, L2, Lp, CustomPolytope };

struct NormSpec {
    NormKind kind = NormKind::Linf;
    double p = 2.0;              // Lp only, p > 1
    RowMatrix custom_functionals;  // CustomPolytope only, one functional per row

    static NormSpec linf() { return {NormKind::Linf, 0.0, {}}; }
    static NormSpec l1() { return {NormKind::L1, 1.0, {}}; }
    static NormSpec l2() { return {NormKind::L2, 2.0, {}}; }
    static NormSpec lp(double p);
    static NormSpec polytope(RowMatrix functionals);

    /// Throws InvalidArgument when the invariants of `kind` do not hold.
    void validate() const;
};

/// Canonical text form: "linf", "l1", "l2", "lp:<p>", "poly".
std::string to_string(const NormSpec& spec);

/// Parses the CLI form: `linf`, `l1`, `l2`, `lp:<p>`, `poly:<path.csv>`.
NormSpec parse_norm_spec(std::string_view text);

inline constexpr int kDefaultBudget = 4096;

struct FunctionalSet {
    NormSpec norm;
    RowMatrix vectors;  // K x d, one representative per +/- pair
    bool exact = false;
    std::uint64_t seed = 0;

    Index size() const { return vectors.rows(); }
    Index dim() const { return vectors.cols(); }
    Index signed_size() const { return 2 * vectors.rows(); }
};

/// Extreme points (or a sampled net) of the dual unit ball of `spec` in R^d.
FunctionalSet dual_functionals(const NormSpec& spec, Index d, int budget = kDefaultBudget,
                               std::uint64_t seed = 0);

/// max over the sign-closed set of <t, v>. A lower bound on the norm when the
/// set is sampled.
double norm_eval(const Eigen::Ref<const Vector>& v, const FunctionalSet& fs);

/// The norm itself: the closed form for l_inf / l_1 / l_2 / l_p, the dual
/// supremum for polytopes. Unlike norm_eval this is exact for sampled sets.
double exact_norm(const Eigen::Ref<const Vector>& v, const FunctionalSet& fs);

/// Closed-form l_inf / l_1 / l_2 / l_p norm.
double direct_norm(const Eigen::Ref<const Vector>& v, const NormSpec& spec);

}  // namespace normest
