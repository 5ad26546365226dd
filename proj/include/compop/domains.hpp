#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "compop/l2ops.hpp"
#include "compop/radon.hpp"

namespace compop {

// ---------------------------------------------------------------------------
// Domain weights. D(C_phi^n) = L^2((sum_{j<=n} h_{phi^j}) dmu), while
// D(C_{phi^n}) = L^2((1 + h_{phi^n}) dmu) and products weigh
// 1 + sum_j h_{phi_1 o ... o phi_j}.
// ---------------------------------------------------------------------------

struct WeightValue {
    ExtRat value;
    bool certified = false;  // value is the true weight, not just a partial sum
};

/// A domain question: the n-th operator power of one symbol, the composition
/// operator of the n-th iterate, or a product C_{phi_k} ... C_{phi_1}.
struct DomainQuery {
    enum class Kind { Power, Iterate, Product };
    Kind kind = Kind::Power;
    TransformationPtr phi;
    int n = 1;
    std::vector<TransformationPtr> maps;

    static DomainQuery power(TransformationPtr p, int n) {
        DomainQuery q;
        q.kind = Kind::Power;
        q.phi = std::move(p);
        q.n = n;
        return q;
    }
    static DomainQuery iterate_of(TransformationPtr p, int n) {
        DomainQuery q;
        q.kind = Kind::Iterate;
        q.phi = std::move(p);
        q.n = n;
        return q;
    }
    static DomainQuery product(std::vector<TransformationPtr> maps) {
        DomainQuery q;
        q.kind = Kind::Product;
        q.maps = std::move(maps);
        return q;
    }
};

/// Evaluates the weight of a DomainQuery atomwise over a fixed window.
class WeightedQuery {
public:
    WeightedQuery(SpacePtr space, const Window& window, DomainQuery query)
        : query_(std::move(query)) {
        switch (query_.kind) {
            case DomainQuery::Kind::Power:
            case DomainQuery::Kind::Iterate:
                engines_.emplace_back(space, query_.phi, window);
                break;
            case DomainQuery::Kind::Product:
                if (query_.maps.empty()) throw UsageError("empty product query");
                for (std::size_t k = 1; k <= query_.maps.size(); ++k)
                    engines_.emplace_back(space, compose_prefix(query_.maps, k), window);
                break;
        }
    }

    WeightValue weight(const AtomId& y) {
        bool any_infinite = false;
        bool all_exact = true;
        Rat finite_sum = 0;
        auto add = [&](const HValue& h) {
            if (h.is_infinite()) {
                any_infinite = true;
            } else {
                if (!h.is_exact()) all_exact = false;
                finite_sum += h.value.finite();
            }
        };
        switch (query_.kind) {
            case DomainQuery::Kind::Power:
                for (int j = 0; j <= query_.n; ++j) add(engines_[0].h(y, j));
                break;
            case DomainQuery::Kind::Iterate:
                finite_sum += 1;
                add(engines_[0].h(y, query_.n));
                break;
            case DomainQuery::Kind::Product:
                finite_sum += 1;
                for (auto& eng : engines_) add(eng.h(y, 1));
                break;
        }
        if (any_infinite) return WeightValue{ExtRat::infinity(), true};
        return WeightValue{ExtRat(finite_sum), all_exact};
    }

    const DomainQuery& query() const { return query_; }

private:
    DomainQuery query_;
    std::vector<HEngine> engines_;
};

namespace detail {

/// f lies in the weighted L^2 space iff no positively weighted support atom
/// carries infinite weight.
inline bool vec_in_weighted_l2(WeightedQuery& wq, const Vec& f) {
    for (auto& [y, c] : f.entries()) {
        if (f.space()->mass(y) == 0) continue;
        WeightValue w = wq.weight(y);
        if (!w.certified)
            throw InconclusiveAtWindow("weight of " + y.str() + " not certified");
        if (w.value.is_infinite()) return false;
    }
    return true;
}

}  // namespace detail

inline bool in_domain_power(SpacePtr space, TransformationPtr phi, const Vec& f, int n,
                            const Window& w) {
    WeightedQuery wq(std::move(space), w, DomainQuery::power(std::move(phi), n));
    return detail::vec_in_weighted_l2(wq, f);
}

inline bool in_domain_iterate(SpacePtr space, TransformationPtr phi, const Vec& f, int n,
                              const Window& w) {
    WeightedQuery wq(std::move(space), w, DomainQuery::iterate_of(std::move(phi), n));
    return detail::vec_in_weighted_l2(wq, f);
}

// ---------------------------------------------------------------------------
// Dense definability.
// ---------------------------------------------------------------------------

/// C_phi is densely defined iff h_phi < infinity a.e.; witnesses are the
/// atoms with certified infinite h.
inline Verdict densely_defined(HEngine& eng) {
    const int level = eng.window().level();
    std::vector<AtomId> witnesses;
    bool inconclusive = false;
    for (const AtomId& y : eng.window().positive_atoms()) {
        HValue h = eng.h(y, 1);
        if (h.is_infinite())
            witnesses.push_back(y);
        else if (!h.is_exact())
            inconclusive = true;
    }
    if (!witnesses.empty())
        return Verdict::fails(level, Witness{std::move(witnesses), "h_phi certified infinite"});
    if (inconclusive) return Verdict::inconclusive(level, "some h-values only lower bounds");
    return Verdict::holds(level, eng.space()->is_finite());
}

inline Verdict densely_defined(SpacePtr space, TransformationPtr phi, const Window& w) {
    HEngine eng(std::move(space), std::move(phi), w);
    return densely_defined(eng);
}

/// C_phi^n is densely defined iff sum_{j<=n} h_{phi^j} < infinity a.e.
inline Verdict densely_defined_power(HEngine& eng, int n) {
    if (n < 1) throw UsageError("power must be >= 1");
    const int level = eng.window().level();
    std::vector<AtomId> witnesses;
    bool inconclusive = false;
    for (const AtomId& y : eng.window().positive_atoms()) {
        for (int j = 1; j <= n; ++j) {
            HValue h = eng.h(y, j);
            if (h.is_infinite()) {
                witnesses.push_back(y);
                break;
            }
            if (!h.is_exact()) inconclusive = true;
        }
    }
    if (!witnesses.empty())
        return Verdict::fails(level,
                              Witness{std::move(witnesses), "some h_{phi^j} certified infinite"});
    if (inconclusive) return Verdict::inconclusive(level, "some h-values only lower bounds");
    return Verdict::holds(level, eng.space()->is_finite());
}

inline Verdict densely_defined_power(SpacePtr space, TransformationPtr phi, int n,
                                     const Window& w) {
    HEngine eng(std::move(space), std::move(phi), w);
    return densely_defined_power(eng, n);
}

/// A product C_{phi_n} ... C_{phi_1} is densely defined iff every prefix
/// composite phi_1 o ... o phi_k induces a densely defined operator.
inline Verdict densely_defined_product(SpacePtr space,
                                       const std::vector<TransformationPtr>& maps,
                                       const Window& w) {
    if (maps.empty()) throw UsageError("empty transformation list");
    bool inconclusive = false;
    for (std::size_t k = 1; k <= maps.size(); ++k) {
        Verdict v = densely_defined(space, compose_prefix(maps, k), w);
        if (v.fails_p()) {
            v.witness->note += " (prefix of length " + std::to_string(k) + ")";
            return v;
        }
        if (v.status == Status::Inconclusive) inconclusive = true;
    }
    if (inconclusive) return Verdict::inconclusive(w.level());
    return Verdict::holds(w.level(), space->is_finite());
}

/// A linear combination with nonzero coefficients is densely defined iff
/// every summand is.
inline Verdict linear_combination_densely_defined(SpacePtr space,
                                                  const std::vector<TransformationPtr>& maps,
                                                  const Window& w) {
    if (maps.empty()) throw UsageError("empty transformation list");
    bool inconclusive = false;
    for (auto& phi : maps) {
        Verdict v = densely_defined(space, phi, w);
        if (v.fails_p()) {
            v.witness->note += " (summand " + phi->name() + ")";
            return v;
        }
        if (v.status == Status::Inconclusive) inconclusive = true;
    }
    if (inconclusive) return Verdict::inconclusive(w.level());
    return Verdict::holds(w.level(), space->is_finite());
}

// ---------------------------------------------------------------------------
// Closedness of powers and products via "there exists c" dominations.
// ---------------------------------------------------------------------------

struct BoundedVerdict {
    Verdict verdict;
    std::optional<BoundWitness> bound;  // present on Holds
};

namespace detail {

struct RatioScan {
    Rat max_ratio = 0;
    std::optional<AtomId> fail_witness;
    bool inconclusive = false;

    /// Feed one atom's numerator/denominator weights; the denominator is
    /// 1 + h and hence strictly positive when finite.
    void feed(const AtomId& y, const WeightValue& num, const WeightValue& den) {
        if (!num.certified || !den.certified) {
            inconclusive = true;
            return;
        }
        if (num.value.is_infinite()) {
            if (!den.value.is_infinite() && !fail_witness) fail_witness = y;
            return;  // infinite vs infinite: any c works
        }
        if (den.value.is_infinite()) return;  // finite over infinite: any c works
        Rat r = num.value.finite() / den.value.finite();
        if (r > max_ratio) max_ratio = r;
    }
};

inline BoundedVerdict finish_ratio_scan(const RatioScan& scan, const Window& w,
                                        const std::optional<Rat>& global_bound,
                                        const std::optional<Witness>& unbounded_family,
                                        const std::string& what) {
    const int level = w.level();
    if (unbounded_family)
        return {Verdict::fails(level, *unbounded_family), std::nullopt};
    if (scan.fail_witness)
        return {Verdict::fails(level, Witness{{*scan.fail_witness},
                                              what + " certified infinite against a finite bound"}),
                std::nullopt};
    if (scan.inconclusive)
        return {Verdict::inconclusive(level, "uncertified h-values in the ratio scan"),
                std::nullopt};
    BoundWitness bw;
    bw.c = scan.max_ratio;
    bw.window = level;
    if (w.space()->is_finite()) {
        bw.status = BoundStatus::UniformCertified;
    } else if (global_bound) {
        if (bw.c > *global_bound)
            throw AnnotationError("declared global bound " + global_bound->str() +
                                  " is below the window ratio " + bw.c.str());
        bw.status = BoundStatus::UniformCertified;
    } else {
        bw.status = BoundStatus::WindowOnly;
    }
    return {Verdict::holds(level, bw.status == BoundStatus::UniformCertified), bw};
}

}  // namespace detail

/// C_phi^n = C_{phi^n} iff there is c with h_{phi^k} <= c (1 + h_{phi^n})
/// for k < n. Returns the least window constant; Fails only on a certified
/// witness (an infinite-vs-finite atom or a generator-declared family).
inline BoundedVerdict power_equals_iterate(SpacePtr space, TransformationPtr phi, int n,
                                           const Window& w) {
    if (n < 1) throw UsageError("power must be >= 1");
    HEngine eng(space, phi, w);
    detail::RatioScan scan;
    for (const AtomId& y : w.positive_atoms()) {
        HValue hn = eng.h(y, n);
        WeightValue den{hn.is_infinite() ? ExtRat::infinity() : ExtRat(Rat(1) + hn.value.finite()),
                        hn.is_certified()};
        for (int k = 1; k < n; ++k) {
            HValue hk = eng.h(y, k);
            WeightValue num{hk.value, hk.is_certified()};
            scan.feed(y, num, den);
        }
    }
    return detail::finish_ratio_scan(scan, w, phi->power_bound(n), phi->power_unbounded(n),
                                     "h_{phi^k}");
}

/// Product closedness: sum_{j<n} h_{phi_1 o ... o phi_j} <= c (1 + h of the
/// full composite), atomwise.
inline BoundedVerdict product_closed(SpacePtr space, const std::vector<TransformationPtr>& maps,
                                     const Window& w) {
    if (maps.size() < 2) throw UsageError("product needs at least two factors");
    const std::size_t n = maps.size();
    std::vector<HEngine> engines;
    for (std::size_t k = 1; k <= n; ++k) engines.emplace_back(space, compose_prefix(maps, k), w);
    detail::RatioScan scan;
    for (const AtomId& y : w.positive_atoms()) {
        bool num_infinite = false, num_exact = true;
        Rat num_sum = 0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            HValue h = engines[j].h(y, 1);
            if (h.is_infinite())
                num_infinite = true;
            else {
                if (!h.is_exact()) num_exact = false;
                num_sum += h.value.finite();
            }
        }
        WeightValue num{num_infinite ? ExtRat::infinity() : ExtRat(num_sum),
                        num_infinite || num_exact};
        HValue hn = engines[n - 1].h(y, 1);
        WeightValue den{hn.is_infinite() ? ExtRat::infinity() : ExtRat(Rat(1) + hn.value.finite()),
                        hn.is_certified()};
        scan.feed(y, num, den);
    }
    // Certificates apply when the product is a power of a single symbol.
    std::optional<Rat> bound;
    std::optional<Witness> unbounded;
    bool all_same = true;
    for (auto& m : maps) all_same = all_same && m == maps[0];
    if (all_same) {
        bound = maps[0]->power_bound(static_cast<int>(n));
        unbounded = maps[0]->power_unbounded(static_cast<int>(n));
    }
    return detail::finish_ratio_scan(scan, w, bound, unbounded, "prefix weight sum");
}

/// D(query1) is contained in D(query2) iff weight(query2) <= c weight(query1)
/// atomwise (the weights are bounded below by 1).
inline BoundedVerdict domain_inclusion(SpacePtr space, const DomainQuery& q1,
                                       const DomainQuery& q2, const Window& w) {
    WeightedQuery w1(space, w, q1), w2(space, w, q2);
    detail::RatioScan scan;
    for (const AtomId& y : w.positive_atoms()) scan.feed(y, w2.weight(y), w1.weight(y));
    return detail::finish_ratio_scan(scan, w, std::nullopt, std::nullopt, "target weight");
}

/// D^infinity(C_phi) is dense (and a core for every power) iff every power
/// is densely defined; reported up to the tested order, never beyond.
inline Verdict cinfty_dense(SpacePtr space, TransformationPtr phi, const Window& w,
                            int max_order) {
    if (max_order < 1) throw UsageError("order must be >= 1");
    HEngine eng(std::move(space), std::move(phi), w);
    for (int n = 1; n <= max_order; ++n) {
        Verdict v = densely_defined_power(eng, n);
        if (v.fails_p()) {
            v.witness->note += " (power " + std::to_string(n) + ")";
            return v;
        }
        if (v.status == Status::Inconclusive) return v;
    }
    return Verdict::holds(w.level(), eng.space()->is_finite());
}

}  // namespace compop
