#pragma once

#include <map>
#include <utility>

#include "compop/space.hpp"

namespace compop {

/// Finitely supported complex-rational function on the atoms of a space; an
/// element of L^2(mu). Values on null atoms are allowed but invisible to
/// norms, inner products and L^2-equality.
class Vec {
public:
    explicit Vec(SpacePtr space) : space_(std::move(space)) {}

    const SpacePtr& space() const { return space_; }
    const std::map<AtomId, CRat>& entries() const { return coef_; }

    Vec& set(const AtomId& atom, CRat value) {
        if (!space_->has_atom(atom))
            throw SchemaError("atom " + atom.str() + " not in space '" + space_->name() + "'");
        if (value.is_zero())
            coef_.erase(atom);
        else
            coef_[atom] = std::move(value);
        return *this;
    }

    CRat at(const AtomId& atom) const {
        auto it = coef_.find(atom);
        return it == coef_.end() ? CRat() : it->second;
    }

    static Vec indicator(const SpacePtr& space, const AtomId& atom) {
        Vec v(space);
        v.set(atom, CRat(1));
        return v;
    }

    Rat norm_sq() const {
        Rat s = 0;
        for (auto& [a, c] : coef_) s += c.norm_sq() * space_->mass(a);
        return s;
    }

    friend Vec operator+(const Vec& a, const Vec& b) {
        require_same_space(a, b);
        Vec out = a;
        for (auto& [atom, c] : b.coef_) out.set(atom, out.at(atom) + c);
        return out;
    }
    friend Vec operator-(const Vec& a, const Vec& b) {
        require_same_space(a, b);
        Vec out = a;
        for (auto& [atom, c] : b.coef_) out.set(atom, out.at(atom) - c);
        return out;
    }
    friend Vec operator*(const CRat& s, const Vec& a) {
        Vec out(a.space_);
        for (auto& [atom, c] : a.coef_) out.set(atom, s * c);
        return out;
    }

    /// Equality as elements of L^2: differences on null atoms do not count.
    friend bool l2_equal(const Vec& a, const Vec& b) {
        require_same_space(a, b);
        auto check = [&](const Vec& x, const Vec& y) {
            for (auto& [atom, c] : x.coef_) {
                if (x.space_->mass(atom) == 0) continue;
                if (y.at(atom) != c) return false;
            }
            return true;
        };
        return check(a, b) && check(b, a);
    }

    static void require_same_space(const Vec& a, const Vec& b) {
        if (a.space_ == b.space_) return;
        if (a.space_->name() != b.space_->name())
            throw SpaceMismatch("vectors live on '" + a.space_->name() + "' and '" +
                                b.space_->name() + "'");
    }

private:
    SpacePtr space_;
    std::map<AtomId, CRat> coef_;
};

/// Exact inner product <f, g> = sum f(x) conj(g(x)) mu({x}).
inline CRat inner(const Vec& f, const Vec& g) {
    Vec::require_same_space(f, g);
    CRat s;
    for (auto& [atom, c] : f.entries()) {
        CRat gc = g.at(atom);
        if (gc.is_zero()) continue;
        s = s + f.space()->mass(atom) * (c * gc.conj());
    }
    return s;
}

// ---------------------------------------------------------------------------
// Vectors with per-atom square roots.
// ---------------------------------------------------------------------------

/// Value coeff * sqrt(radicand) at each atom, radicand a nonnegative
/// rational. Houses |C_phi| f and U g, whose formulas involve h^{1/2}.
/// Radicands are kept unreduced; equality compares the exactly computable
/// data coeff^2 * radicand plus the direction of coeff.
class SqrtVec {
public:
    struct Entry {
        CRat coeff;
        Rat radicand;  // >= 0
    };

    explicit SqrtVec(SpacePtr space) : space_(std::move(space)) {}

    static SqrtVec from_vector(const Vec& v) {
        SqrtVec out(v.space());
        for (auto& [atom, c] : v.entries()) out.set(atom, c, Rat(1));
        return out;
    }

    const SpacePtr& space() const { return space_; }
    const std::map<AtomId, Entry>& entries() const { return entries_; }

    SqrtVec& set(const AtomId& atom, CRat coeff, Rat radicand) {
        if (radicand < 0) throw UsageError("negative radicand");
        if (coeff.is_zero() || radicand == 0)
            entries_.erase(atom);
        else
            entries_[atom] = Entry{std::move(coeff), std::move(radicand)};
        return *this;
    }

    Rat norm_sq() const {
        Rat s = 0;
        for (auto& [a, e] : entries_) s += e.coeff.norm_sq() * e.radicand * space_->mass(a);
        return s;
    }

    friend bool l2_equal(const SqrtVec& a, const SqrtVec& b) {
        if (a.space_ != b.space_ && a.space_->name() != b.space_->name())
            throw SpaceMismatch("sqrt-vectors on different spaces");
        auto value_equal = [](const Entry& x, const Entry& y) {
            Rat sq_x = x.coeff.norm_sq() * x.radicand;
            Rat sq_y = y.coeff.norm_sq() * y.radicand;
            if (sq_x != sq_y) return false;
            if (sq_x == 0) return true;
            // coeff_y must be a positive real multiple of coeff_x
            CRat dir = x.coeff * y.coeff.conj();
            return dir.im == 0 && dir.re > 0;
        };
        static const Entry kZero{CRat(), Rat(0)};
        auto entry = [](const SqrtVec& v, const AtomId& a) -> const Entry& {
            auto it = v.entries_.find(a);
            return it == v.entries_.end() ? kZero : it->second;
        };
        auto check = [&](const SqrtVec& x, const SqrtVec& y) {
            for (auto& [atom, e] : x.entries_) {
                if (x.space_->mass(atom) == 0) continue;
                if (!value_equal(e, entry(y, atom))) return false;
            }
            return true;
        };
        return check(a, b) && check(b, a);
    }

private:
    SpacePtr space_;
    std::map<AtomId, Entry> entries_;
};

}  // namespace compop
