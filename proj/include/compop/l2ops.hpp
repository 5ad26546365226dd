#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "compop/radon.hpp"
#include "compop/vector.hpp"

namespace compop {

// ---------------------------------------------------------------------------
// C_phi and its polar-decomposition factors, applied to finitely supported
// vectors with exact arithmetic. All functions are pure in (engine state,
// vector); the engine only memoizes.
// ---------------------------------------------------------------------------

namespace detail {

/// Sum |f(y)|^2 h_phi(y) mu({y}) over the support, when every needed h-value
/// is exact. Returns nullopt if some value is only a lower bound; throws
/// NotInDomain on a certified infinite contribution.
inline std::optional<Rat> transport_norm_sq(HEngine& eng, const Vec& f) {
    Rat total = 0;
    for (auto& [y, c] : f.entries()) {
        if (eng.space()->mass(y) == 0) continue;  // no transport weight off the positive part
        HValue h = eng.h(y, 1);
        if (h.is_infinite())
            throw NotInDomain("||C_phi f||^2 is certified infinite: h(" + y.str() +
                              ") = inf on the support");
        if (!h.is_exact()) return std::nullopt;
        total += c.norm_sq() * h.exact_value() * eng.space()->mass(y);
    }
    return total;
}

}  // namespace detail

/// C_phi f = f o phi. The coordinate image exists only when the preimage of
/// the support is certified finite; otherwise IncompletePreimage is thrown,
/// carrying the exact squared norm whenever the h-values supply it.
inline Vec apply_cphi(HEngine& eng, const Vec& f) {
    const SpacePtr& space = eng.space();
    bool all_complete = true;
    std::vector<std::pair<AtomId, CRat>> placements;
    for (auto& [y, c] : f.entries()) {
        const Preimage& p = eng.preimage(y, 1);
        all_complete = all_complete && p.complete;
        for (const AtomId& x : p.atoms) placements.emplace_back(x, c);
    }
    // A certified-infinite norm rejects f from the domain regardless of the
    // support enumeration.
    std::optional<Rat> norm_sq;
    bool norm_known = true;
    try {
        norm_sq = detail::transport_norm_sq(eng, f);
    } catch (const NullAtomError&) {
        norm_known = false;  // support touches null atoms; transport does not apply
    }
    if (!all_complete) {
        std::string payload;
        if (norm_known && norm_sq) payload = norm_sq->str();
        throw IncompletePreimage(
            "support of C_phi f not certified finite at window " +
                std::to_string(eng.window().level()),
            payload);
    }
    Vec out(space);
    for (auto& [x, c] : placements) out.set(x, c);
    return out;
}

/// C_phi^* g at a positive atom y: (1/mu({y})) sum_{phi(x)=y} g(x) mu({x}).
/// Finitely supported vectors always lie in the adjoint domain and only the
/// support of g can contribute, so the result is exact and total.
inline Vec apply_adjoint(HEngine& eng, const Vec& g) {
    const SpacePtr& space = eng.space();
    std::map<AtomId, CRat> acc;
    for (auto& [x, c] : g.entries()) {
        const Rat mx = space->mass(x);
        if (mx == 0) continue;
        AtomId y = eng.phi()->apply(x);
        if (space->mass(y) == 0) continue;  // adjoint vanishes off the positive part
        auto [it, inserted] = acc.emplace(y, CRat());
        it->second = it->second + mx * c;
    }
    Vec out(space);
    for (auto& [y, s] : acc) out.set(y, s / space->mass(y));
    return out;
}

namespace detail {

/// The class members relevant to g: the enumerated preimage of y plus any
/// support atoms mapping to y, which may sit beyond the window when the
/// enumeration is incomplete.
inline std::vector<AtomId> class_members(HEngine& eng, const AtomId& y, const Vec& g) {
    const Preimage& cls = eng.preimage(y, 1);
    std::vector<AtomId> out = cls.atoms;  // sorted by the chaining
    for (auto& [x, c] : g.entries())
        if (eng.phi()->apply(x) == y &&
            !std::binary_search(cls.atoms.begin(), cls.atoms.end(), x))
            out.push_back(x);
    std::sort(out.begin(), out.end());
    return out;
}

inline CRat class_sum(HEngine& eng, const std::vector<AtomId>& members, const Vec& g) {
    CRat s;
    for (const AtomId& z : members) s = s + eng.space()->mass(z) * g.at(z);
    return s;
}

}  // namespace detail

/// Conditional expectation E(g | phi^{-1}(A)): the orthogonal projection
/// onto functions constant on the preimage classes phi^{-1}({y}). Classes of
/// total mass zero contribute 0 by convention.
inline Vec conditional_expectation(HEngine& eng, const Vec& g) {
    const SpacePtr& space = eng.space();
    Vec out(space);
    std::set<AtomId> seen;
    for (auto& [x, cx] : g.entries()) {
        AtomId y = eng.phi()->apply(x);
        if (!seen.insert(y).second) continue;
        const std::vector<AtomId> members = detail::class_members(eng, y, g);
        CRat sum = detail::class_sum(eng, members, g);
        if (sum.is_zero()) continue;  // expectation vanishes on this class
        const Preimage& cls = eng.preimage(y, 1);
        if (!cls.complete)
            throw IncompleteClass("class of " + y.str() + " not certified complete at window " +
                                  std::to_string(eng.window().level()));
        Rat class_mass = eng.preimage_mass(cls);
        if (class_mass == 0) continue;  // null class: value undefined a.e., use 0
        CRat avg = sum / class_mass;
        for (const AtomId& z : cls.atoms) out.set(z, avg);
    }
    return out;
}

/// |C_phi| f = h_phi^{1/2} f, as a SqrtVec. Requires exact h on the
/// positive part of the support.
inline SqrtVec apply_modulus(HEngine& eng, const Vec& f) {
    SqrtVec out(eng.space());
    for (auto& [x, c] : f.entries()) {
        if (eng.space()->mass(x) == 0) continue;
        HValue h = eng.h(x, 1);
        if (h.is_infinite())
            throw NotInDomain("f is outside D(|C_phi|): h(" + x.str() + ") = inf");
        if (!h.is_exact())
            throw NotCertified("h(" + x.str() + ") only known as a lower bound");
        out.set(x, c, h.exact_value());
    }
    return out;
}

namespace detail {

/// h_phi at the image atom phi(x), which is positive for every positive x
/// when phi is nonsingular. Exactness required.
inline Rat h_at_image(HEngine& eng, const AtomId& x) {
    AtomId y = eng.phi()->apply(x);
    if (eng.space()->mass(y) == 0)
        throw NotCertified("positive atom " + x.str() + " maps to null atom " + y.str() +
                           "; the symbol is not nonsingular");
    HValue h = eng.h(y, 1);
    if (!h.is_exact()) throw NotCertified("h(phi(" + x.str() + ")) not exact");
    Rat v = h.exact_value();
    if (v == 0)
        throw NotCertified("h(phi(" + x.str() + ")) = 0 at a positive atom; the symbol is not "
                           "nonsingular");
    return v;
}

}  // namespace detail

/// The partial isometry of the polar decomposition: (U g)(x) =
/// g(phi(x)) / h_phi(phi(x))^{1/2}.
inline SqrtVec apply_U(HEngine& eng, const SqrtVec& g) {
    SqrtVec out(eng.space());
    bool all_complete = true;
    for (auto& [y, e] : g.entries()) {
        const Preimage& p = eng.preimage(y, 1);
        all_complete = all_complete && p.complete;
        for (const AtomId& x : p.atoms) {
            if (eng.space()->mass(x) == 0) continue;  // L^2-irrelevant placement
            Rat h = detail::h_at_image(eng, x);
            out.set(x, e.coeff, e.radicand / h);
        }
    }
    if (!all_complete)
        throw IncompletePreimage("support of U g not certified finite at window " +
                                 std::to_string(eng.window().level()));
    return out;
}

inline SqrtVec apply_U(HEngine& eng, const Vec& g) {
    return apply_U(eng, SqrtVec::from_vector(g));
}

/// U^* g = h_phi^{1/2} V^{-1} P g: at a positive atom y with h_phi(y) > 0
/// the value is h_phi(y)^{1/2} times the class average of g over
/// phi^{-1}({y}); it vanishes where h_phi does.
inline SqrtVec apply_Ustar(HEngine& eng, const Vec& g) {
    const SpacePtr& space = eng.space();
    SqrtVec out(space);
    std::set<AtomId> seen;
    for (auto& [x, cx] : g.entries()) {
        if (space->mass(x) == 0) continue;
        AtomId y = eng.phi()->apply(x);
        if (space->mass(y) == 0) continue;
        if (!seen.insert(y).second) continue;
        CRat sum = detail::class_sum(eng, detail::class_members(eng, y, g), g);
        if (sum.is_zero()) continue;
        HValue h = eng.h(y, 1);
        if (h.is_infinite()) continue;  // class average against infinite mass is 0
        if (!h.is_exact()) throw NotCertified("h(" + y.str() + ") not exact");
        Rat hv = h.exact_value();
        if (hv == 0) continue;  // U^* vanishes on the kernel side
        out.set(y, sum / (hv * space->mass(y)), hv);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kernel and range descriptions.
// ---------------------------------------------------------------------------

/// Positive atoms with certified h_phi = 0 (the set N_phi carrying
/// ker C_phi), plus those the window cannot decide.
struct KernelAtoms {
    std::vector<AtomId> certified;   // h exactly 0
    std::vector<AtomId> undecided;   // lower bound 0, enumeration incomplete
};

inline KernelAtoms kernel_atoms(HEngine& eng) {
    KernelAtoms out;
    for (const AtomId& y : eng.window().positive_atoms()) {
        HValue h = eng.h(y, 1);
        if (h.is_infinite()) continue;
        if (h.is_exact() && h.exact_value() == 0)
            out.certified.push_back(y);
        else if (!h.is_exact() && h.value.finite() == 0)
            out.undecided.push_back(y);
    }
    return out;
}

/// Membership of g in the closure of ran C_phi: g must be constant on
/// every positive preimage class it touches.
inline Verdict range_membership(HEngine& eng, const Vec& g) {
    const SpacePtr& space = eng.space();
    const int level = eng.window().level();
    std::set<AtomId> seen;
    bool inconclusive = false;
    for (auto& [x, cx] : g.entries()) {
        AtomId y = eng.phi()->apply(x);
        if (!seen.insert(y).second) continue;
        std::optional<std::pair<AtomId, CRat>> first;
        for (const AtomId& z : detail::class_members(eng, y, g)) {
            if (space->mass(z) == 0) continue;
            CRat v = g.at(z);
            if (!first) {
                first = {z, v};
            } else if (v != first->second) {
                return Verdict::fails(level, Witness{{first->first, z},
                                                     "class of " + y.str() +
                                                         " carries two different values"});
            }
        }
        if (!eng.preimage(y, 1).complete && first && !first->second.is_zero())
            inconclusive = true;  // unseen class atoms would have to carry the same value
    }
    if (inconclusive)
        return Verdict::inconclusive(level, "incomplete preimage class with nonzero value");
    return Verdict::holds(level, space->is_finite());
}

/// Exact test ||C_phi f|| = ||C_phi^* f||; the direct oracle behind the
/// formal-normality characterization.
inline bool formal_normality_direct(HEngine& eng, const Vec& f) {
    Rat lhs;
    try {
        lhs = apply_cphi(eng, f).norm_sq();
    } catch (const IncompletePreimage& e) {
        if (e.norm_sq().empty() || e.norm_sq() == "inf") throw;
        lhs = parse_rat(e.norm_sq());
    }
    Rat rhs = apply_adjoint(eng, f).norm_sq();
    return lhs == rhs;
}

}  // namespace compop
