#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "compop/space.hpp"

namespace compop {

/// How much of an h-value the window certifies. LowerBound values are
/// nondecreasing in the window level; Exact and CertifiedInfinite never
/// change once established.
enum class Certainty { Exact, LowerBound, CertifiedInfinite };

inline std::string certainty_str(Certainty c) {
    switch (c) {
        case Certainty::Exact: return "exact";
        case Certainty::LowerBound: return "lower-bound";
        default: return "certified-infinite";
    }
}

/// One value of the Radon-Nikodym derivative h_{phi^n}(y) =
/// mu(phi^{-n}({y})) / mu({y}), defined on positive-mass atoms only.
struct HValue {
    ExtRat value;
    Certainty certainty = Certainty::LowerBound;
    int window = 0;

    static HValue exact(Rat v, int w) { return HValue{ExtRat(std::move(v)), Certainty::Exact, w}; }
    static HValue lower_bound(Rat v, int w) {
        return HValue{ExtRat(std::move(v)), Certainty::LowerBound, w};
    }
    static HValue certified_infinite(int w) {
        return HValue{ExtRat::infinity(), Certainty::CertifiedInfinite, w};
    }

    bool is_exact() const { return certainty == Certainty::Exact; }
    bool is_infinite() const { return certainty == Certainty::CertifiedInfinite; }
    bool is_certified() const { return certainty != Certainty::LowerBound; }

    /// Finite exact value; throws unless Exact.
    const Rat& exact_value() const {
        if (!is_exact()) throw NotCertified("h-value not exact (" + certainty_str(certainty) + ")");
        return value.finite();
    }

    std::string str() const { return value.str(); }
};

/// Evaluates h_{phi^n} over a fixed window with memoized preimages. All
/// results are deterministic functions of (space, phi, window).
class HEngine {
public:
    HEngine(SpacePtr space, TransformationPtr phi, Window window)
        : space_(std::move(space)), phi_(std::move(phi)), window_(std::move(window)) {}

    const Window& window() const { return window_; }
    const SpacePtr& space() const { return space_; }
    const TransformationPtr& phi() const { return phi_; }

    /// The n-step preimage of y visible through the window, memoized.
    const Preimage& preimage(const AtomId& y, int n) {
        auto key = std::make_pair(n, y);
        auto it = preimages_.find(key);
        if (it != preimages_.end()) return it->second;
        std::vector<const Transformation*> steps(static_cast<std::size_t>(n), phi_.get());
        Preimage p = chained_preimage(steps, y, window_);
        return preimages_.emplace(key, std::move(p)).first->second;
    }

    Rat preimage_mass(const Preimage& p) const {
        Rat total = 0;
        for (const AtomId& x : p.atoms) total += space_->mass(x);
        return total;
    }

    /// h_{phi^n}(y). Null atoms are rejected: h is an a.e. class and has no
    /// canonical pointwise value there.
    HValue h(const AtomId& y, int n) {
        if (n < 0) throw UsageError("negative power");
        const Rat mu_y = space_->mass(y);
        if (mu_y == 0) throw NullAtomError("h undefined on null atom " + y.str());
        auto key = std::make_pair(n, y);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        HValue result = compute(y, n, mu_y);
        memo_.emplace(key, result);
        return result;
    }

private:
    HValue compute(const AtomId& y, int n, const Rat& mu_y) {
        const int level = window_.level();
        if (n == 0) return HValue::exact(Rat(1), level);
        const Tail annotation = phi_->tail(y, n, level);
        if (annotation.kind == Tail::Kind::Infinite) return HValue::certified_infinite(level);
        const Preimage& p = preimage(y, n);
        const Rat partial = preimage_mass(p);
        if (p.complete) {
            if (annotation.kind == Tail::Kind::Exact && annotation.total != partial)
                throw AnnotationError("tail annotation for " + y.str() + " at power " +
                                      std::to_string(n) + " declares total " +
                                      annotation.total.str() + " but the complete preimage has mass " +
                                      partial.str());
            return HValue::exact(partial / mu_y, level);
        }
        if (annotation.kind == Tail::Kind::Exact) {
            if (partial > annotation.total)
                throw AnnotationError("partial preimage mass " + partial.str() + " of " + y.str() +
                                      " at power " + std::to_string(n) +
                                      " exceeds annotated total " + annotation.total.str());
            if (annotation.remainder_bound &&
                annotation.total - partial > *annotation.remainder_bound)
                throw AnnotationError(
                    "annotated total " + annotation.total.str() + " for " + y.str() + " at power " +
                    std::to_string(n) + " leaves gap " + Rat(annotation.total - partial).str() +
                    " above the declared window-" + std::to_string(level) + " remainder bound " +
                    annotation.remainder_bound->str());
            return HValue::exact(annotation.total / mu_y, level);
        }
        return HValue::lower_bound(partial / mu_y, level);
    }

    SpacePtr space_;
    TransformationPtr phi_;
    Window window_;
    std::map<std::pair<int, AtomId>, HValue> memo_;
    std::map<std::pair<int, AtomId>, Preimage> preimages_;
};

// ---------------------------------------------------------------------------
// Batched tables.
// ---------------------------------------------------------------------------

/// h_{phi^n}(y) for all positive window atoms y and 0 <= n <= max_power.
/// Row n = 0 is identically 1.
struct HTable {
    std::vector<AtomId> atoms;  // positive atoms in id order
    int max_power = 0;
    std::map<AtomId, std::vector<HValue>> rows;

    const HValue& at(const AtomId& y, int n) const {
        return rows.at(y).at(static_cast<std::size_t>(n));
    }
};

inline HTable h_table(HEngine& engine, int max_power) {
    if (max_power < 0) throw UsageError("negative max power");
    HTable t;
    t.max_power = max_power;
    t.atoms = engine.window().positive_atoms();
    for (const AtomId& y : t.atoms) {
        std::vector<HValue> row;
        row.reserve(static_cast<std::size_t>(max_power) + 1);
        for (int n = 0; n <= max_power; ++n) row.push_back(engine.h(y, n));
        t.rows.emplace(y, std::move(row));
    }
    return t;
}

}  // namespace compop
