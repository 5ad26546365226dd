#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "compop/atom.hpp"
#include "compop/errors.hpp"
#include "compop/rational.hpp"
#include "compop/verdict.hpp"

namespace compop {

class MeasureSpace;
class Window;

// ---------------------------------------------------------------------------
// Preimage enumeration and certification annotations.
// ---------------------------------------------------------------------------

/// Result of a one-step preimage query. `complete` asserts that `atoms` is
/// the full preimage in the whole space, not merely its part visible in the
/// window; once true at some window it stays true at every larger one.
struct Preimage {
    std::vector<AtomId> atoms;
    bool complete = false;
};

/// Generator-supplied certification for the total mass of phi^{-n}({y})
/// when the enumerated preimage cannot be complete at any finite window.
struct Tail {
    enum class Kind { None, Exact, Infinite };
    Kind kind = Kind::None;
    /// Exact total mass of the full preimage (Kind::Exact only).
    Rat total;
    /// Declared bound on the mass beyond the current window; used to
    /// cross-validate the exact total against partial sums.
    std::optional<Rat> remainder_bound;
    /// Short justification, e.g. the divergent family backing an
    /// infinite-tail certificate.
    std::string certificate;

    static Tail none() { return Tail{}; }
    static Tail exact(Rat total, std::optional<Rat> remainder, std::string why = "") {
        return Tail{Kind::Exact, std::move(total), std::move(remainder), std::move(why)};
    }
    static Tail infinite(std::string why) {
        return Tail{Kind::Infinite, Rat(0), std::nullopt, std::move(why)};
    }
};

// ---------------------------------------------------------------------------
// Transformations (symbols phi).
// ---------------------------------------------------------------------------

/// A total map on the atoms of a space. Implementations must answer
/// one-step preimage queries; the default scans the window and can certify
/// completeness only on finite spaces. Generated-space rules override it
/// with exact structural knowledge.
class Transformation {
public:
    virtual ~Transformation() = default;

    virtual std::string name() const = 0;
    virtual AtomId apply(const AtomId& x) const = 0;

    /// All known atoms mapping to y under this transformation. Atoms beyond
    /// the window may be returned when the rule knows them.
    virtual Preimage step_preimage(const AtomId& y, const Window& w) const;

    /// Certification for the total mass of the n-step preimage of y, used
    /// when enumeration is incomplete. `window_level` lets the annotation
    /// report a remainder bound for the current cut-off.
    virtual Tail tail(const AtomId& y, int n, int window_level) const {
        (void)y;
        (void)n;
        (void)window_level;
        return Tail::none();
    }

    /// Global constant certifying h_{phi^k} <= c (1 + h_{phi^n}) for all
    /// k < n on the whole space, when the rule can prove one.
    virtual std::optional<Rat> power_bound(int n) const {
        (void)n;
        return std::nullopt;
    }

    /// Certified family of atoms along which the ratio above is unbounded,
    /// when the rule can prove unboundedness.
    virtual std::optional<Witness> power_unbounded(int n) const {
        (void)n;
        return std::nullopt;
    }
};

using TransformationPtr = std::shared_ptr<const Transformation>;

// ---------------------------------------------------------------------------
// Generators of countable spaces.
// ---------------------------------------------------------------------------

/// Presents a countable atomic space in finite levels. Levels are disjoint,
/// every level is finite, and window L is the union of levels 1..L.
class Generator : public std::enable_shared_from_this<Generator> {
public:
    virtual ~Generator() = default;

    virtual std::string name() const = 0;
    virtual std::vector<AtomId> level_atoms(int level) const = 0;
    virtual Rat mass(const AtomId& atom) const = 0;

    /// True when the space has no null atoms at all; lets nonsingularity
    /// checks certify Holds beyond the window.
    virtual bool all_positive() const { return true; }

    /// Named transformations shipped with the space; the first is the
    /// default symbol.
    virtual std::vector<std::string> transformation_names() const = 0;
    virtual TransformationPtr transformation(const std::string& name) const = 0;

    /// Consistency of the declared annotations; throws AnnotationError.
    virtual void validate() const {}
};

using GeneratorPtr = std::shared_ptr<const Generator>;

// ---------------------------------------------------------------------------
// Measure spaces and windows.
// ---------------------------------------------------------------------------

class MeasureSpace {
public:
    static std::shared_ptr<const MeasureSpace> finite(
        std::string name, std::vector<std::pair<AtomId, Rat>> atoms) {
        auto sp = std::shared_ptr<MeasureSpace>(new MeasureSpace());
        sp->name_ = std::move(name);
        std::sort(atoms.begin(), atoms.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (atoms[i].second < 0)
                throw SchemaError("negative mass at atom " + atoms[i].first.str());
            if (i > 0 && atoms[i].first == atoms[i - 1].first)
                throw SchemaError("duplicate atom " + atoms[i].first.str());
        }
        sp->atoms_ = std::move(atoms);
        for (std::size_t i = 0; i < sp->atoms_.size(); ++i) sp->index_[sp->atoms_[i].first] = i;
        return sp;
    }

    static std::shared_ptr<const MeasureSpace> generated(GeneratorPtr gen) {
        auto sp = std::shared_ptr<MeasureSpace>(new MeasureSpace());
        sp->name_ = gen->name();
        sp->generator_ = std::move(gen);
        return sp;
    }

    bool is_finite() const { return generator_ == nullptr; }
    const std::string& name() const { return name_; }
    const GeneratorPtr& generator() const { return generator_; }

    Rat mass(const AtomId& atom) const {
        if (is_finite()) {
            auto it = index_.find(atom);
            if (it == index_.end())
                throw SchemaError("atom " + atom.str() + " not in space '" + name_ + "'");
            return atoms_[it->second].second;
        }
        return generator_->mass(atom);
    }

    bool has_atom(const AtomId& atom) const {
        if (is_finite()) return index_.count(atom) > 0;
        return true;  // generated spaces answer mass() for all their atoms
    }

    const std::vector<std::pair<AtomId, Rat>>& finite_atoms() const {
        if (!is_finite()) throw std::logic_error("finite_atoms() on generated space");
        return atoms_;
    }

private:
    MeasureSpace() = default;

    std::string name_;
    std::vector<std::pair<AtomId, Rat>> atoms_;  // sorted, finite presentation
    std::map<AtomId, std::size_t> index_;
    GeneratorPtr generator_;
};

using SpacePtr = std::shared_ptr<const MeasureSpace>;

/// Finite snapshot of a space: all atoms of generation level <= level, with
/// their masses, sorted. Windows are nested; a finite space is its own
/// window at every level.
class Window {
public:
    Window(SpacePtr space, int level) : space_(std::move(space)), level_(level) {
        if (level < 1) throw UsageError("window level must be >= 1");
        if (space_->is_finite()) {
            atoms_ = space_->finite_atoms();
        } else {
            for (int l = 1; l <= level; ++l) {
                for (auto& a : space_->generator()->level_atoms(l)) {
                    atoms_.emplace_back(a, space_->mass(a));
                }
            }
            std::sort(atoms_.begin(), atoms_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t i = 1; i < atoms_.size(); ++i)
                if (atoms_[i].first == atoms_[i - 1].first)
                    throw SchemaError("generator emitted duplicate atom " + atoms_[i].first.str());
        }
        for (auto& [id, m] : atoms_) members_.insert(id);
    }

    int level() const { return level_; }
    const SpacePtr& space() const { return space_; }
    const std::vector<std::pair<AtomId, Rat>>& atoms() const { return atoms_; }
    bool contains(const AtomId& a) const { return members_.count(a) > 0; }

    /// Atoms of positive mass, in id order; "a.e." conditions quantify over
    /// exactly these.
    std::vector<AtomId> positive_atoms() const {
        std::vector<AtomId> out;
        for (auto& [id, m] : atoms_)
            if (m > 0) out.push_back(id);
        return out;
    }

private:
    SpacePtr space_;
    int level_;
    std::vector<std::pair<AtomId, Rat>> atoms_;
    std::set<AtomId> members_;
};

inline Preimage Transformation::step_preimage(const AtomId& y, const Window& w) const {
    Preimage p;
    for (auto& [id, m] : w.atoms())
        if (apply(id) == y) p.atoms.push_back(id);
    p.complete = w.space()->is_finite();
    return p;
}

// ---------------------------------------------------------------------------
// Concrete transformations.
// ---------------------------------------------------------------------------

/// Extensionally given map on a finite space.
class FiniteMap : public Transformation {
public:
    FiniteMap(std::string name, std::map<AtomId, AtomId> rule)
        : name_(std::move(name)), rule_(std::move(rule)) {}

    std::string name() const override { return name_; }

    AtomId apply(const AtomId& x) const override {
        auto it = rule_.find(x);
        if (it == rule_.end())
            throw SchemaError("transformation '" + name_ + "' undefined at atom " + x.str());
        return it->second;
    }

    const std::map<AtomId, AtomId>& rule() const { return rule_; }

private:
    std::string name_;
    std::map<AtomId, AtomId> rule_;
};

/// phi^n. Power 0 is the identity.
class IteratedMap : public Transformation {
public:
    IteratedMap(TransformationPtr base, int power) : base_(std::move(base)), power_(power) {
        if (power < 0) throw UsageError("negative iterate power");
    }

    std::string name() const override {
        return base_->name() + "^" + std::to_string(power_);
    }

    AtomId apply(const AtomId& x) const override {
        AtomId cur = x;
        for (int i = 0; i < power_; ++i) cur = base_->apply(cur);
        return cur;
    }

    Preimage step_preimage(const AtomId& y, const Window& w) const override;

    Tail tail(const AtomId& y, int n, int window_level) const override {
        return base_->tail(y, n * power_, window_level);
    }

    std::optional<Rat> power_bound(int n) const override {
        if (power_ == 1) return base_->power_bound(n);
        return std::nullopt;
    }
    std::optional<Witness> power_unbounded(int n) const override {
        if (power_ == 1) return base_->power_unbounded(n);
        return std::nullopt;
    }

    const TransformationPtr& base() const { return base_; }
    int power() const { return power_; }

private:
    TransformationPtr base_;
    int power_;
};

/// phi_1 o phi_2 o ... o phi_k; the last factor is applied first.
class CompositeMap : public Transformation {
public:
    explicit CompositeMap(std::vector<TransformationPtr> factors)
        : factors_(std::move(factors)) {
        if (factors_.empty()) throw UsageError("empty composite");
    }

    std::string name() const override {
        std::string s;
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (i) s += "o";
            s += factors_[i]->name();
        }
        return s;
    }

    AtomId apply(const AtomId& x) const override {
        AtomId cur = x;
        for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) cur = (*it)->apply(cur);
        return cur;
    }

    Preimage step_preimage(const AtomId& y, const Window& w) const override;

private:
    std::vector<TransformationPtr> factors_;
};

/// Preimage of y under g1 o g2 o ... o gm, chaining one-step preimages in
/// factor order. Distinct intermediate atoms have disjoint preimages, so no
/// deduplication is needed; completeness survives only if every link is
/// complete.
inline Preimage chained_preimage(const std::vector<const Transformation*>& steps,
                                 const AtomId& y, const Window& w) {
    Preimage cur;
    cur.atoms = {y};
    cur.complete = true;
    for (const Transformation* g : steps) {
        Preimage next;
        next.complete = cur.complete;
        for (const AtomId& z : cur.atoms) {
            Preimage p = g->step_preimage(z, w);
            next.complete = next.complete && p.complete;
            next.atoms.insert(next.atoms.end(), p.atoms.begin(), p.atoms.end());
        }
        cur = std::move(next);
    }
    std::sort(cur.atoms.begin(), cur.atoms.end());
    return cur;
}

inline Preimage IteratedMap::step_preimage(const AtomId& y, const Window& w) const {
    std::vector<const Transformation*> steps(static_cast<std::size_t>(power_), base_.get());
    return chained_preimage(steps, y, w);
}

inline Preimage CompositeMap::step_preimage(const AtomId& y, const Window& w) const {
    std::vector<const Transformation*> steps;
    for (auto& f : factors_) steps.push_back(f.get());
    return chained_preimage(steps, y, w);
}

inline TransformationPtr iterate(TransformationPtr phi, int n) {
    return std::make_shared<IteratedMap>(std::move(phi), n);
}

/// Composite of a prefix phi_1 o ... o phi_k of the given list. A prefix of
/// one repeated symbol becomes an iterate, so its tail annotations apply.
inline TransformationPtr compose_prefix(const std::vector<TransformationPtr>& maps,
                                        std::size_t k) {
    if (k == 0 || k > maps.size()) throw UsageError("bad composite prefix length");
    if (k == 1) return maps[0];
    bool all_same = true;
    for (std::size_t i = 1; i < k; ++i) all_same = all_same && maps[i] == maps[0];
    if (all_same) return std::make_shared<IteratedMap>(maps[0], static_cast<int>(k));
    return std::make_shared<CompositeMap>(
        std::vector<TransformationPtr>(maps.begin(), maps.begin() + static_cast<long>(k)));
}

// ---------------------------------------------------------------------------
// Structural checks.
// ---------------------------------------------------------------------------

/// Nonsingularity of phi: null sets must pull back to null sets. On atoms
/// this fails exactly when some null atom has a positive-mass preimage atom.
inline Verdict check_nonsingular(const SpacePtr& space, const Transformation& phi,
                                 const Window& w) {
    if (!space->is_finite() && space->generator()->all_positive())
        return Verdict::holds(w.level(), true);
    bool saw_incomplete = false;
    for (auto& [y, m] : w.atoms()) {
        if (m != 0) continue;
        Preimage p = phi.step_preimage(y, w);
        for (const AtomId& x : p.atoms) {
            if (space->mass(x) > 0)
                return Verdict::fails(
                    w.level(), Witness{{y, x}, "null atom " + y.str() +
                                                   " has positive-mass preimage atom " + x.str()});
        }
        if (!p.complete) saw_incomplete = true;
    }
    if (saw_incomplete)
        return Verdict::inconclusive(w.level(), "incomplete preimage of a null atom");
    return Verdict::holds(w.level(), space->is_finite());
}

/// Sigma-finiteness. Atomic spaces with finite atom masses are sigma-finite
/// by construction; the check exists to reject ill-formed documents and to
/// cross-validate generator annotations.
inline Verdict check_sigma_finite(const SpacePtr& space, const Window& w) {
    if (!space->is_finite()) space->generator()->validate();
    for (auto& [id, m] : w.atoms())
        if (m < 0) throw SchemaError("negative mass at atom " + id.str());
    return Verdict::holds(w.level(), true);
}

}  // namespace compop
