#pragma once

#include <string>
#include <utility>
#include <vector>

#include "compop/domains.hpp"
#include "compop/l2ops.hpp"
#include "compop/moments.hpp"

namespace compop {

/// C_phi is injective iff h_phi > 0 a.e.: no positive atom with certified
/// empty preimage. A positive partial sum already certifies h > 0, so only
/// exact zeros fail and only undecided zeros block the verdict.
inline Verdict injective(HEngine& eng) {
    KernelAtoms k = kernel_atoms(eng);
    const int level = eng.window().level();
    if (!k.certified.empty()) {
        Witness w;
        w.atoms = {k.certified.front()};
        w.note = "h_phi = 0 at " + k.certified.front().str() +
                 (k.certified.size() > 1
                      ? " and " + std::to_string(k.certified.size() - 1) + " more window atoms"
                      : "");
        return Verdict::fails(level, std::move(w));
    }
    if (!k.undecided.empty())
        return Verdict::inconclusive(level, "empty partial preimage of " +
                                                k.undecided.front().str() + " not certified");
    return Verdict::holds(level, eng.space()->is_finite());
}

/// Quasinormality: h_phi = h_phi o phi a.e.
inline Verdict quasinormal(HEngine& eng) {
    if (!densely_defined(eng).holds_p())
        throw NotDenselyDefined("quasinormality presumes a densely defined operator");
    const int level = eng.window().level();
    bool inconclusive = false;
    for (const AtomId& x : eng.window().positive_atoms()) {
        HValue hx = eng.h(x, 1);
        AtomId img = eng.phi()->apply(x);
        HValue himg = eng.h(img, 1);  // positive for positive x when phi is nonsingular
        if (!hx.is_certified() || !himg.is_certified()) {
            inconclusive = true;
            continue;
        }
        if (hx.value != himg.value)
            return Verdict::fails(level, Witness{{x}, "h(" + x.str() + ") = " + hx.str() +
                                                          " but h(phi(" + x.str() + ")) = h(" +
                                                          img.str() + ") = " + himg.str()});
    }
    if (inconclusive) return Verdict::inconclusive(level);
    return Verdict::holds(level, eng.space()->is_finite());
}

/// Normality: quasinormal with dense range. On atoms the range of C_phi is
/// dense iff no preimage class carries two distinct positive atoms.
inline Verdict normal(HEngine& eng) {
    if (!densely_defined(eng).holds_p())
        throw NotDenselyDefined("normality presumes a densely defined operator");
    const int level = eng.window().level();
    std::map<AtomId, AtomId> first_in_class;
    for (const AtomId& x : eng.window().positive_atoms()) {
        AtomId img = eng.phi()->apply(x);
        auto [it, inserted] = first_in_class.emplace(img, x);
        if (!inserted)
            return Verdict::fails(level,
                                  Witness{{it->second, x},
                                          "preimage class of " + img.str() +
                                              " contains two positive atoms; ker C_phi^* != 0"});
    }
    Verdict q = quasinormal(eng);
    if (!q.holds_p()) return q;
    // The "moreover" part: a normal composition operator is injective.
    Verdict inj = injective(eng);
    if (inj.fails_p())
        throw std::logic_error("internal inconsistency: quasinormal with nontrivial kernel");
    return Verdict::holds(level, eng.space()->is_finite() && q.certified);
}

/// A formally normal composition operator is automatically normal, so the
/// two verdicts coincide by construction.
inline Verdict formally_normal(HEngine& eng) { return normal(eng); }

/// Necessary condition only: hyponormal operators are injective. A
/// nontrivial kernel refutes hyponormality; otherwise the window cannot
/// decide (the full characterization is out of scope).
inline Verdict hyponormal_necessary(HEngine& eng) {
    Verdict inj = injective(eng);
    const int level = eng.window().level();
    if (inj.fails_p()) {
        Witness w = *inj.witness;
        w.note = "not hyponormal: " + w.note;
        return Verdict::fails(level, std::move(w));
    }
    if (inj.holds_p())
        return Verdict::inconclusive(level,
                                     "kernel trivial; hyponormality itself is not decided here");
    return inj;
}

/// h_{phi^{n+1}} = h_{phi^n} h_phi a.e.; inf * 0 is reported as a failure
/// with an indeterminate tag rather than skipped.
inline Verdict multiplicative_h(HEngine& eng, int n) {
    if (n < 1) throw UsageError("power must be >= 1");
    const int level = eng.window().level();
    bool inconclusive = false;
    for (const AtomId& x : eng.window().positive_atoms()) {
        HValue top = eng.h(x, n + 1), left = eng.h(x, n), right = eng.h(x, 1);
        if (!top.is_certified() || !left.is_certified() || !right.is_certified()) {
            inconclusive = true;
            continue;
        }
        auto prod = ExtRat::checked_mul(left.value, right.value);
        if (!prod)
            return Verdict::fails(level, Witness{{x}, "indeterminate product inf*0 at " + x.str()});
        if (*prod != top.value)
            return Verdict::fails(
                level, Witness{{x}, "h_{phi^" + std::to_string(n + 1) + "}(" + x.str() + ") = " +
                                        top.str() + " != " + left.str() + " * " + right.str()});
    }
    if (inconclusive) return Verdict::inconclusive(level);
    return Verdict::holds(level, eng.space()->is_finite());
}

/// C_phi generates Stieltjes moment sequences up to the tested order iff
/// every positive atom's truncated h-moment row passes both Hankel tests.
inline Verdict generates_stieltjes(HEngine& eng, int order) {
    if (order < 1) throw UsageError("order must be >= 1");
    const int level = eng.window().level();
    bool inconclusive = false;
    for (const AtomId& x : eng.window().positive_atoms()) {
        MomentSequence seq;
        bool row_ok = true;
        for (int n = 0; n <= order; ++n) {
            HValue h = eng.h(x, n);
            if (h.is_infinite())
                return Verdict::fails(level, Witness{{x}, "h_{phi^" + std::to_string(n) + "}(" +
                                                              x.str() + ") is infinite"});
            if (!h.is_exact()) {
                inconclusive = true;
                row_ok = false;
                break;
            }
            seq.entries.push_back(h.exact_value());
        }
        if (!row_ok) continue;
        StieltjesResult st = stieltjes_truncated(seq);
        if (!st.consistent) {
            std::string minor = "{";
            for (std::size_t i = 0; i < st.witness.size(); ++i)
                minor += (i ? "," : "") + std::to_string(st.witness[i]);
            minor += "}";
            return Verdict::fails(
                level, Witness{{x}, (st.failed_shift ? std::string("shifted ") : std::string()) +
                                        "Hankel minor " + minor + " has determinant " +
                                        st.witness_det.str()});
        }
    }
    if (inconclusive) return Verdict::inconclusive(level);
    return Verdict::holds(level, eng.space()->is_finite());
}

// ---------------------------------------------------------------------------
// Aggregate report.
// ---------------------------------------------------------------------------

struct ClassificationReport {
    int window = 0;
    int order = 0;
    Verdict nonsingular;
    Verdict densely_defined_v;
    std::vector<std::pair<int, Verdict>> power_dense;  // (n, verdict), n = 2..order
    Verdict injective_v;
    Verdict quasinormal_v;
    Verdict normal_v;
    Verdict formally_normal_v;
    Verdict hyponormal_v;
    std::vector<std::pair<int, Verdict>> multiplicative;  // (n, verdict), n = 1..order-1
    Verdict stieltjes_v;
    std::vector<std::string> implications_checked;
    std::vector<std::string> notes;
};

/// Runs every classifier and asserts the implication lattice on the way out;
/// a violation is an internal error, not a verdict.
inline ClassificationReport classify_all(SpacePtr space, TransformationPtr phi, const Window& w,
                                         int order) {
    HEngine eng(space, phi, w);
    ClassificationReport rep;
    rep.window = w.level();
    rep.order = order;
    rep.nonsingular = check_nonsingular(space, *phi, w);
    rep.densely_defined_v = densely_defined(eng);
    for (int n = 2; n <= order; ++n) rep.power_dense.emplace_back(n, densely_defined_power(eng, n));

    if (rep.nonsingular.fails_p()) {
        rep.notes.push_back("symbol is not nonsingular; the composition operator is not "
                            "well-defined on L^2 classes and the operator verdicts are skipped");
        Verdict skip = Verdict::inconclusive(w.level(), "symbol not nonsingular");
        rep.injective_v = rep.quasinormal_v = rep.normal_v = rep.formally_normal_v =
            rep.hyponormal_v = rep.stieltjes_v = skip;
        return rep;
    }

    rep.injective_v = injective(eng);
    if (rep.densely_defined_v.holds_p()) {
        rep.quasinormal_v = quasinormal(eng);
        rep.normal_v = normal(eng);
        rep.formally_normal_v = rep.normal_v;
        rep.notes.push_back("formal normality reported through its equivalence with normality");
    } else {
        Verdict skip = Verdict::inconclusive(w.level(), "operator not densely defined");
        rep.quasinormal_v = rep.normal_v = rep.formally_normal_v = skip;
    }
    rep.hyponormal_v = hyponormal_necessary(eng);
    for (int n = 1; n < order; ++n) rep.multiplicative.emplace_back(n, multiplicative_h(eng, n));
    rep.stieltjes_v = generates_stieltjes(eng, order);

    // Implication lattice; any violation is a bug in the engine.
    if (rep.normal_v.holds_p()) {
        if (!rep.quasinormal_v.holds_p())
            throw std::logic_error("lattice violation: normal but not quasinormal");
        if (rep.injective_v.fails_p())
            throw std::logic_error("lattice violation: normal but not injective");
        rep.implications_checked.push_back("normal => quasinormal");
        rep.implications_checked.push_back("normal => injective");
    }
    if (rep.quasinormal_v.holds_p()) {
        for (auto& [n, v] : rep.multiplicative) {
            if (v.fails_p())
                throw std::logic_error("lattice violation: quasinormal but h not multiplicative at " +
                                       std::to_string(n));
        }
        if (rep.stieltjes_v.fails_p())
            throw std::logic_error("lattice violation: quasinormal but Stieltjes generation fails");
        rep.implications_checked.push_back("quasinormal => h multiplicative");
        rep.implications_checked.push_back("quasinormal => generates Stieltjes sequences");
    }
    return rep;
}

}  // namespace compop
