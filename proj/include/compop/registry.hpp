#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "compop/classify.hpp"
#include "compop/domains.hpp"
#include "compop/space.hpp"

namespace compop {

// ---------------------------------------------------------------------------
// Countable example spaces, presented as generators with the annotations
// needed to certify their h-values at finite windows.
// ---------------------------------------------------------------------------

namespace detail {

inline Rat pow2_inv(std::uint64_t e) {
    // 2^{-e}
    Int den = Int(1) << e;
    return Rat(Int(1), den);
}

}  // namespace detail

/// Three families a_i, b_i, c_{i,j}; masses 1, 2^{-(i+1)}, 2^{-(j+1)};
/// a_i -> a_{i+1}, b_i -> a_0, c_{i,j} -> b_i. The symbol is densely
/// defined while no higher power is; the domain of C_{phi^3} strictly
/// contains the domain of C_phi^3.
class NumerekGenerator : public Generator {
public:
    explicit NumerekGenerator(std::map<std::string, std::string> params = {})
        : params_(std::move(params)) {}

    std::string name() const override { return "numerek"; }

    std::vector<AtomId> level_atoms(int level) const override {
        std::vector<AtomId> out;
        const std::uint64_t i = static_cast<std::uint64_t>(level) - 1;
        out.emplace_back("a", i);
        out.emplace_back("b", i);
        for (std::uint64_t j = 0; j < i; ++j) {
            out.emplace_back("c", i, j);
            out.emplace_back("c", j, i);
        }
        out.emplace_back("c", i, i);
        return out;
    }

    Rat mass(const AtomId& atom) const override {
        if (atom.family == "a" && atom.indices.size() == 1) return Rat(1);
        if (atom.family == "b" && atom.indices.size() == 1)
            return detail::pow2_inv(atom.indices[0] + 1);
        if (atom.family == "c" && atom.indices.size() == 2)
            return detail::pow2_inv(atom.indices[1] + 1);
        throw SchemaError("atom " + atom.str() + " not in space 'numerek'");
    }

    std::vector<std::string> transformation_names() const override { return {"phi"}; }

    TransformationPtr transformation(const std::string& nm) const override;

    void validate() const override {
        auto it = params_.find("a0_mass");
        if (it != params_.end() && it->second == "inf")
            throw AnnotationError(
                "generator declares mass(a(0)) = inf; sigma-finiteness of an atomic space "
                "requires every atom mass finite");
    }

    const std::map<std::string, std::string>& params() const { return params_; }

private:
    std::map<std::string, std::string> params_;
};

class NumerekMap : public Transformation {
public:
    explicit NumerekMap(std::shared_ptr<const NumerekGenerator> gen) : gen_(std::move(gen)) {}

    std::string name() const override { return "phi"; }

    AtomId apply(const AtomId& x) const override {
        if (x.family == "a") return AtomId("a", x.indices[0] + 1);
        if (x.family == "b") return AtomId("a", std::uint64_t{0});
        if (x.family == "c") return AtomId("b", x.indices[0]);
        throw SchemaError("atom " + x.str() + " not in space 'numerek'");
    }

    Preimage step_preimage(const AtomId& y, const Window& w) const override {
        Preimage p;
        const std::uint64_t level = static_cast<std::uint64_t>(w.level());
        if (y.family == "a") {
            if (y.indices[0] == 0) {
                for (std::uint64_t i = 0; i < level; ++i) p.atoms.emplace_back("b", i);
                p.complete = false;
            } else {
                p.atoms.emplace_back("a", y.indices[0] - 1);
                p.complete = true;
            }
        } else if (y.family == "b") {
            for (std::uint64_t j = 0; j < level; ++j) p.atoms.emplace_back("c", y.indices[0], j);
            p.complete = false;
        } else {
            p.complete = true;  // nothing maps into the c-family
        }
        return p;
    }

    Tail tail(const AtomId& y, int n, int window_level) const override {
        if (n < 1) return Tail::none();
        const Rat rem = detail::pow2_inv(static_cast<std::uint64_t>(window_level));
        if (y.family == "a") {
            const std::uint64_t k = y.indices[0];
            const std::uint64_t nn = static_cast<std::uint64_t>(n);
            if (nn == k + 1) {
                Rat total(1);
                auto it = gen_->params().find("a0_tail");
                if (it != gen_->params().end()) total = parse_rat(it->second);
                return Tail::exact(total, rem, "the b-family has total mass 1");
            }
            if (nn == k + 2)
                return Tail::infinite("the preimage contains the families {c(i,j)}_j, one per i, "
                                      "each of total mass 1");
            if (nn >= k + 3) return Tail::exact(Rat(0), Rat(0), "nothing maps into the c-family");
            return Tail::none();
        }
        if (y.family == "b") {
            if (n == 1)
                return Tail::exact(Rat(1), rem, "the family {c(i,j)}_j has total mass 1");
            return Tail::exact(Rat(0), Rat(0), "nothing maps into the c-family");
        }
        return Tail::none();
    }

private:
    std::shared_ptr<const NumerekGenerator> gen_;
};

inline TransformationPtr NumerekGenerator::transformation(const std::string& nm) const {
    if (nm != "phi") throw UnknownGenerator("numerek has no transformation '" + nm + "'");
    auto self = std::static_pointer_cast<const NumerekGenerator>(shared_from_this());
    return std::make_shared<NumerekMap>(self);
}

// ---------------------------------------------------------------------------

/// Counting measure on the nonnegative integers with phi1(2n) = n,
/// phi1(2n+1) = 0 and phi2(n) = 2n. The composite phi1 o phi2 is the
/// identity although C_{phi1} is not even densely defined.
class HalvingDoublingGenerator : public Generator {
public:
    std::string name() const override { return "identity-product"; }

    std::vector<AtomId> level_atoms(int level) const override {
        const std::uint64_t base = 2 * (static_cast<std::uint64_t>(level) - 1);
        return {AtomId("n", base), AtomId("n", base + 1)};
    }

    Rat mass(const AtomId& atom) const override {
        if (atom.family == "n" && atom.indices.size() == 1) return Rat(1);
        throw SchemaError("atom " + atom.str() + " not in space 'identity-product'");
    }

    std::vector<std::string> transformation_names() const override {
        return {"phi1", "phi2", "phi1ophi2"};
    }

    TransformationPtr transformation(const std::string& nm) const override;
};

class HalvingMap : public Transformation {
public:
    std::string name() const override { return "phi1"; }

    AtomId apply(const AtomId& x) const override {
        const std::uint64_t v = x.indices.at(0);
        return AtomId("n", v % 2 == 0 ? v / 2 : 0);
    }

    Preimage step_preimage(const AtomId& y, const Window& w) const override {
        Preimage p;
        const std::uint64_t v = y.indices.at(0);
        if (v == 0) {
            const std::uint64_t bound = 2 * static_cast<std::uint64_t>(w.level());
            p.atoms.emplace_back("n", std::uint64_t{0});
            for (std::uint64_t odd = 1; odd < bound; odd += 2) p.atoms.emplace_back("n", odd);
            p.complete = false;
        } else {
            p.atoms.emplace_back("n", 2 * v);
            p.complete = true;
        }
        return p;
    }

    Tail tail(const AtomId& y, int n, int) const override {
        if (n >= 1 && y.indices.at(0) == 0)
            return Tail::infinite("every odd atom maps to 0 and carries mass 1");
        return Tail::none();
    }
};

class DoublingMap : public Transformation {
public:
    std::string name() const override { return "phi2"; }

    AtomId apply(const AtomId& x) const override { return AtomId("n", 2 * x.indices.at(0)); }

    Preimage step_preimage(const AtomId& y, const Window&) const override {
        Preimage p;
        p.complete = true;
        const std::uint64_t v = y.indices.at(0);
        if (v % 2 == 0) p.atoms.emplace_back("n", v / 2);
        return p;
    }
};

/// The composite phi1 o phi2, shipped with its exact preimage rule: for
/// every y, phi2^{-1}(phi1^{-1}({y})) collapses to the singleton {y} (the
/// odd atoms in phi1^{-1}({0}) have no phi2-preimage), which the generic
/// factor chaining cannot certify at any finite window.
class HalvingDoublingComposite : public Transformation {
public:
    std::string name() const override { return "phi1ophi2"; }

    AtomId apply(const AtomId& x) const override { return first_.apply(second_.apply(x)); }

    Preimage step_preimage(const AtomId& y, const Window&) const override {
        Preimage p;
        p.atoms = {y};
        p.complete = true;
        return p;
    }

private:
    HalvingMap first_;
    DoublingMap second_;
};

inline TransformationPtr HalvingDoublingGenerator::transformation(const std::string& nm) const {
    if (nm == "phi1") return std::make_shared<HalvingMap>();
    if (nm == "phi2") return std::make_shared<DoublingMap>();
    if (nm == "phi1ophi2") return std::make_shared<HalvingDoublingComposite>();
    throw UnknownGenerator("identity-product has no transformation '" + nm + "'");
}

// ---------------------------------------------------------------------------

/// Counting measure on the positive integers partitioned into consecutive
/// blocks J_1, J_2, ...; phi sends every point of J_n to min J_{n^2}. The
/// block cardinalities follow one of two presets: with card J_{q^{2^m}} =
/// kappa^m every operator power is closed and unbounded; with card J_q = q
/// unbounded along the nonsquares no power beyond the first is closed.
class PartitionGenerator : public Generator {
public:
    PartitionGenerator(int kappa, bool closed_regime, std::size_t max_blocks = 70000)
        : kappa_(kappa), closed_(closed_regime) {
        if (kappa < 2) throw UsageError("partition preset needs kappa >= 2");
        starts_.reserve(max_blocks + 2);
        starts_.push_back(0);  // unused slot: blocks are 1-based
        starts_.push_back(1);  // min J_1 = 1
        for (std::size_t k = 1; k <= max_blocks; ++k)
            starts_.push_back(starts_.back() + cardinality(static_cast<std::uint64_t>(k)));
    }

    std::string name() const override {
        return std::string("partition-") + (closed_ ? "closed" : "unbounded") + "-k" +
               std::to_string(kappa_);
    }

    /// card J_k under the active preset.
    std::uint64_t cardinality(std::uint64_t k) const {
        if (k == 1) return 1;
        // k = q^{2^m} with q not a perfect square
        int m = 0;
        std::uint64_t q = k;
        while (true) {
            std::uint64_t r = integer_sqrt(q);
            if (r * r != q) break;
            q = r;
            ++m;
        }
        if (closed_) {
            std::uint64_t c = 1;
            for (int i = 0; i < m; ++i) c *= static_cast<std::uint64_t>(kappa_);
            return c;
        }
        return m == 0 ? q : 1;
    }

    std::uint64_t block_start(std::uint64_t k) const {
        if (k + 1 >= starts_.size())
            throw UsageError("partition query beyond precomputed blocks");
        return starts_[static_cast<std::size_t>(k)];
    }

    std::uint64_t block_of(std::uint64_t x) const {
        auto it = std::upper_bound(starts_.begin() + 1, starts_.end(), x);
        return static_cast<std::uint64_t>((it - starts_.begin()) - 1);
    }

    std::vector<AtomId> level_atoms(int level) const override {
        std::vector<AtomId> out;
        const std::uint64_t k = static_cast<std::uint64_t>(level);
        for (std::uint64_t x = block_start(k); x < block_start(k + 1); ++x)
            out.emplace_back("n", x);
        return out;
    }

    Rat mass(const AtomId& atom) const override {
        if (atom.family == "n" && atom.indices.size() == 1 && atom.indices[0] >= 1) return Rat(1);
        throw SchemaError("atom " + atom.str() + " not in space '" + name() + "'");
    }

    std::vector<std::string> transformation_names() const override { return {"phi"}; }
    TransformationPtr transformation(const std::string& nm) const override;

    bool closed_regime() const { return closed_; }
    int kappa() const { return kappa_; }

    /// h_{phi^j}(x) in closed form, for cross-checking the window engine.
    Rat h_closed_form(std::uint64_t x, int j) const {
        const std::uint64_t b = block_of(x);
        if (x != block_start(b)) return Rat(0);
        // x = min J_b; h_{phi^j}(x) = card J_{root} when b has a 2^j-th root
        // chain, per the square-chain structure of the partition.
        std::uint64_t q = b;
        for (int step = 0; step < j; ++step) {
            std::uint64_t r = integer_sqrt(q);
            if (r * r != q) return Rat(0);
            q = r;
        }
        return Rat(cardinality(q));
    }

    static std::uint64_t integer_sqrt(std::uint64_t v) {
        if (v < 2) return v;
        std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
        while (r * r > v) --r;
        while ((r + 1) * (r + 1) <= v) ++r;
        return r;
    }

private:
    int kappa_;
    bool closed_;
    std::vector<std::uint64_t> starts_;  // starts_[k] = min J_k
};

class PartitionMap : public Transformation {
public:
    explicit PartitionMap(std::shared_ptr<const PartitionGenerator> gen) : gen_(std::move(gen)) {}

    std::string name() const override { return "phi"; }

    AtomId apply(const AtomId& x) const override {
        const std::uint64_t b = gen_->block_of(x.indices.at(0));
        return AtomId("n", gen_->block_start(b * b));
    }

    Preimage step_preimage(const AtomId& y, const Window&) const override {
        Preimage p;
        p.complete = true;
        const std::uint64_t v = y.indices.at(0);
        const std::uint64_t b = gen_->block_of(v);
        if (v != gen_->block_start(b)) return p;
        const std::uint64_t root = PartitionGenerator::integer_sqrt(b);
        if (root * root != b) return p;
        for (std::uint64_t x = gen_->block_start(root); x < gen_->block_start(root + 1); ++x)
            p.atoms.emplace_back("n", x);
        return p;
    }

    std::optional<Rat> power_bound(int n) const override {
        if (!gen_->closed_regime() || n < 1) return std::nullopt;
        Rat c(1);
        for (int i = 0; i + 1 < n; ++i) c *= gen_->kappa();
        return c;  // kappa^{n-1} dominates every window ratio globally
    }

    std::optional<Witness> power_unbounded(int n) const override {
        if (gen_->closed_regime() || n < 2) return std::nullopt;
        Witness w;
        for (std::uint64_t q = 2; w.atoms.size() < 3; ++q) {
            std::uint64_t r = PartitionGenerator::integer_sqrt(q);
            if (r * r == q) continue;
            w.atoms.emplace_back("n", gen_->block_start(q * q));
        }
        w.note = "along x = min J_{q^2} for nonsquare q, h_phi(x) = card J_q = q grows without "
                 "bound while h_{phi^n}(x) = 0";
        return w;
    }

private:
    std::shared_ptr<const PartitionGenerator> gen_;
};

inline TransformationPtr PartitionGenerator::transformation(const std::string& nm) const {
    if (nm != "phi") throw UnknownGenerator(name() + " has no transformation '" + nm + "'");
    auto self = std::static_pointer_cast<const PartitionGenerator>(shared_from_this());
    return std::make_shared<PartitionMap>(self);
}

// ---------------------------------------------------------------------------

/// Rootless, leafless binary tree under the parent map: every vertex has
/// exactly two children and one parent, so h_{phi^n} = 2^n everywhere. The
/// vertex set is a spine s(k) with an off-spine heap t(k,m) per spine node
/// and one extra heap r(m) below s(0).
class BinaryTreeGenerator : public Generator {
public:
    std::string name() const override { return "binary"; }

    static int heap_depth(std::uint64_t m) {
        int d = 0;
        while (m > 1) {
            m >>= 1;
            ++d;
        }
        return d;
    }

    /// level(s(k)) = k+1, level(r(m)) = depth(m)+1,
    /// level(t(j,m)) = max(j, depth(m))+1.
    std::vector<AtomId> level_atoms(int level) const override {
        std::vector<AtomId> out;
        const std::uint64_t k = static_cast<std::uint64_t>(level) - 1;
        const std::uint64_t lo = std::uint64_t{1} << k;
        const std::uint64_t hi = std::uint64_t{1} << (k + 1);
        out.emplace_back("s", k);
        for (std::uint64_t m = lo; m < hi; ++m) out.emplace_back("r", m);
        for (std::uint64_t m = 1; m < hi; ++m) out.emplace_back("t", k, m);
        for (std::uint64_t j = 0; j < k; ++j)
            for (std::uint64_t m = lo; m < hi; ++m) out.emplace_back("t", j, m);
        return out;
    }

    Rat mass(const AtomId& atom) const override {
        if ((atom.family == "s" && atom.indices.size() == 1) ||
            (atom.family == "r" && atom.indices.size() == 1 && atom.indices[0] >= 1) ||
            (atom.family == "t" && atom.indices.size() == 2 && atom.indices[1] >= 1))
            return Rat(1);
        throw SchemaError("atom " + atom.str() + " not in space 'binary'");
    }

    std::vector<std::string> transformation_names() const override { return {"phi"}; }
    TransformationPtr transformation(const std::string& nm) const override;
};

class BinaryParentMap : public Transformation {
public:
    std::string name() const override { return "phi"; }

    AtomId apply(const AtomId& x) const override {
        if (x.family == "s") return AtomId("s", x.indices[0] + 1);
        if (x.family == "r") {
            const std::uint64_t m = x.indices[0];
            return m == 1 ? AtomId("s", std::uint64_t{0}) : AtomId("r", m / 2);
        }
        if (x.family == "t") {
            const std::uint64_t m = x.indices[1];
            return m == 1 ? AtomId("s", x.indices[0]) : AtomId("t", x.indices[0], m / 2);
        }
        throw SchemaError("atom " + x.str() + " not in space 'binary'");
    }

    Preimage step_preimage(const AtomId& y, const Window&) const override {
        Preimage p;
        p.complete = true;
        if (y.family == "s") {
            const std::uint64_t k = y.indices[0];
            if (k == 0) {
                p.atoms.emplace_back("r", std::uint64_t{1});
            } else {
                p.atoms.emplace_back("s", k - 1);
            }
            p.atoms.emplace_back("t", k, std::uint64_t{1});
        } else if (y.family == "r") {
            const std::uint64_t m = y.indices[0];
            p.atoms.emplace_back("r", 2 * m);
            p.atoms.emplace_back("r", 2 * m + 1);
        } else {
            const std::uint64_t m = y.indices[1];
            p.atoms.emplace_back("t", y.indices[0], 2 * m);
            p.atoms.emplace_back("t", y.indices[0], 2 * m + 1);
        }
        return p;
    }

    std::optional<Rat> power_bound(int n) const override {
        if (n < 1) return std::nullopt;
        return Rat(1);  // 2^k <= 1 + 2^n for every k <= n
    }
};

inline TransformationPtr BinaryTreeGenerator::transformation(const std::string& nm) const {
    if (nm != "phi") throw UnknownGenerator("binary has no transformation '" + nm + "'");
    return std::make_shared<BinaryParentMap>();
}

// ---------------------------------------------------------------------------
// Example bundles: spaces, symbols, and their executable expected facts.
// ---------------------------------------------------------------------------

struct ExampleFact {
    std::string label;
    std::string provenance;  // "published" or "derived"
    std::function<bool()> check;
};

struct ExampleBundle {
    std::string name;
    std::map<std::string, std::string> params;
    SpacePtr space;
    TransformationPtr phi;  // default symbol
    std::map<std::string, TransformationPtr> maps;
    int default_window = 16;
    std::vector<ExampleFact> facts;
};

namespace detail {

inline SpacePtr make_t3() {
    return MeasureSpace::finite("t3", {{AtomId("1"), Rat(1)},
                                       {AtomId("2"), Rat(1)},
                                       {AtomId("3"), Rat(1)}});
}

inline TransformationPtr make_t3_map() {
    return std::make_shared<FiniteMap>(
        "phi", std::map<AtomId, AtomId>{{AtomId("1"), AtomId("1")},
                                        {AtomId("2"), AtomId("1")},
                                        {AtomId("3"), AtomId("2")}});
}

inline SpacePtr make_null_atom_space() {
    return MeasureSpace::finite("null-atom", {{AtomId("t"), Rat(0)},
                                              {AtomId("z0"), Rat(1)},
                                              {AtomId("z1"), Rat(1)}});
}

inline TransformationPtr make_null_atom_map() {
    return std::make_shared<FiniteMap>(
        "phi", std::map<AtomId, AtomId>{{AtomId("z0"), AtomId("t")},
                                        {AtomId("z1"), AtomId("z1")},
                                        {AtomId("t"), AtomId("z1")}});
}

inline SpacePtr make_swap_space() {
    return MeasureSpace::finite("swap", {{AtomId("1"), Rat(1)}, {AtomId("2"), Rat(1)}});
}

inline TransformationPtr make_swap_map() {
    return std::make_shared<FiniteMap>(
        "phi",
        std::map<AtomId, AtomId>{{AtomId("1"), AtomId("2")}, {AtomId("2"), AtomId("1")}});
}

}  // namespace detail

inline std::vector<std::string> example_names() {
    return {"t3", "null-atom", "swap", "numerek", "identity-product", "partition", "binary"};
}

/// Builds a registered example together with its regression facts. Every
/// fact is executable; the regression suite is exactly their execution.
inline ExampleBundle example(const std::string& name,
                             std::map<std::string, std::string> params = {}) {
    ExampleBundle b;
    b.name = name;
    b.params = params;

    if (name == "t3") {
        b.space = detail::make_t3();
        b.phi = detail::make_t3_map();
        b.maps = {{"phi", b.phi}};
        b.default_window = 1;
        SpacePtr sp = b.space;
        TransformationPtr phi = b.phi;
        auto eng = [sp, phi]() { return HEngine(sp, phi, Window(sp, 1)); };
        b.facts = {
            {"h_phi = (2, 1, 0)", "derived",
             [=]() {
                 HEngine e = eng();
                 return e.h(AtomId("1"), 1).exact_value() == 2 &&
                        e.h(AtomId("2"), 1).exact_value() == 1 &&
                        e.h(AtomId("3"), 1).exact_value() == 0;
             }},
            {"h_{phi^2}(1) = 3", "derived",
             [=]() { return eng().h(AtomId("1"), 2).exact_value() == 3; }},
            {"kernel = {3}", "derived",
             [=]() {
                 HEngine e = eng();
                 auto k = kernel_atoms(e);
                 return k.certified == std::vector<AtomId>{AtomId("3")} && k.undecided.empty();
             }},
            {"quasinormal fails with witness 2", "derived",
             [=]() {
                 HEngine e = eng();
                 Verdict v = quasinormal(e);
                 return v.fails_p() && v.witness->atoms.front() == AtomId("2");
             }},
            {"h not multiplicative at atom 1", "derived",
             [=]() {
                 HEngine e = eng();
                 Verdict v = multiplicative_h(e, 1);
                 return v.fails_p() && v.witness->atoms.front() == AtomId("1");
             }},
            {"||C_phi chi_1|| != ||C_phi^* chi_1||", "derived",
             [=]() {
                 HEngine e = eng();
                 return !formal_normality_direct(e, Vec::indicator(sp, AtomId("1")));
             }},
        };
        return b;
    }

    if (name == "null-atom") {
        b.space = detail::make_null_atom_space();
        b.phi = detail::make_null_atom_map();
        b.maps = {{"phi", b.phi}};
        b.default_window = 1;
        SpacePtr sp = b.space;
        TransformationPtr phi = b.phi;
        b.facts = {
            {"phi is not nonsingular: witness (t, z0)", "published",
             [=]() {
                 Window w(sp, 1);
                 Verdict v = check_nonsingular(sp, *phi, w);
                 return v.fails_p() && v.witness->atoms == std::vector<AtomId>{AtomId("t"),
                                                                               AtomId("z0")};
             }},
            {"phi^2 is nonsingular", "published",
             [=]() {
                 Window w(sp, 1);
                 return check_nonsingular(sp, *iterate(phi, 2), w).holds_p();
             }},
        };
        return b;
    }

    if (name == "swap") {
        b.space = detail::make_swap_space();
        b.phi = detail::make_swap_map();
        b.maps = {{"phi", b.phi}};
        b.default_window = 1;
        SpacePtr sp = b.space;
        TransformationPtr phi = b.phi;
        b.facts = {
            {"unitary permutation: normal, injective, Stieltjes", "derived",
             [=]() {
                 auto rep = classify_all(sp, phi, Window(sp, 1), 4);
                 return rep.normal_v.holds_p() && rep.injective_v.holds_p() &&
                        rep.quasinormal_v.holds_p() && rep.stieltjes_v.holds_p();
             }},
            {"adjoint of the swap is its inverse", "derived",
             [=]() {
                 HEngine e(sp, phi, Window(sp, 1));
                 Vec g = Vec::indicator(sp, AtomId("1"));
                 return l2_equal(apply_adjoint(e, g), Vec::indicator(sp, AtomId("2")));
             }},
        };
        return b;
    }

    if (name == "numerek") {
        auto gen = std::make_shared<NumerekGenerator>(params);
        b.space = MeasureSpace::generated(gen);
        b.phi = gen->transformation("phi");
        b.maps = {{"phi", b.phi}};
        b.default_window = 16;
        SpacePtr sp = b.space;
        TransformationPtr phi = b.phi;
        const AtomId a0("a", std::uint64_t{0});
        auto eng = [sp, phi]() { return HEngine(sp, phi, Window(sp, 16)); };
        b.facts = {
            {"C_phi is densely defined", "published",
             [=]() {
                 HEngine e = eng();
                 return densely_defined(e).holds_p();
             }},
            {"h_{phi^2}(a0) = inf, certified", "published",
             [=]() { return eng().h(a0, 2).is_infinite(); }},
            {"h_{phi^3}(a0) = 0, exact", "published",
             [=]() { return eng().h(a0, 3).exact_value() == 0; }},
            {"h_phi(a0) = 1 via the geometric tail", "derived",
             [=]() { return eng().h(a0, 1).exact_value() == 1; }},
            {"C_{phi^j} and C_phi^j not densely defined for j = 2..6", "published",
             [=]() {
                 HEngine e = eng();
                 for (int j = 2; j <= 6; ++j) {
                     Verdict v = densely_defined_power(e, j);
                     std::vector<AtomId> expect;
                     for (std::uint64_t k = 0; k + 2 <= static_cast<std::uint64_t>(j); ++k)
                         expect.emplace_back("a", k);
                     if (!v.fails_p() || v.witness->atoms != expect) return false;
                 }
                 return true;
             }},
            {"chi_{a0} lies in D(C_{phi^3}) but not in D(C_phi^3)", "published",
             [=]() {
                 Window w(sp, 16);
                 Vec f = Vec::indicator(sp, a0);
                 return in_domain_iterate(sp, phi, f, 3, w) &&
                        !in_domain_power(sp, phi, f, 3, w);
             }},
            {"D(C_{phi^3}) not contained in D(C_phi^3), witness a0", "published",
             [=]() {
                 Window w(sp, 16);
                 auto r = domain_inclusion(sp, DomainQuery::iterate_of(phi, 3),
                                           DomainQuery::power(phi, 3), w);
                 return r.verdict.fails_p() && r.verdict.witness->atoms.front() == a0;
             }},
            {"C_phi chi_{a0} has infinite support but norm^2 = 1", "derived",
             [=]() {
                 HEngine e = eng();
                 try {
                     apply_cphi(e, Vec::indicator(sp, a0));
                     return false;
                 } catch (const IncompletePreimage& err) {
                     return err.norm_sq() == "1";
                 }
             }},
            {"phi^2 sends a_i to a_{i+2}, b_i to a_1, c_{i,j} to a_0", "derived",
             [=]() {
                 auto phi2 = iterate(phi, 2);
                 return phi2->apply(AtomId("a", std::uint64_t{3})) == AtomId("a", std::uint64_t{5}) &&
                        phi2->apply(AtomId("b", std::uint64_t{4})) == AtomId("a", std::uint64_t{1}) &&
                        phi2->apply(AtomId("c", 2, 7)) == a0;
             }},
        };
        return b;
    }

    if (name == "identity-product") {
        auto gen = std::make_shared<HalvingDoublingGenerator>();
        b.space = MeasureSpace::generated(gen);
        auto phi1 = gen->transformation("phi1");
        auto phi2 = gen->transformation("phi2");
        auto comp = gen->transformation("phi1ophi2");
        b.phi = phi1;
        b.maps = {{"phi1", phi1}, {"phi2", phi2}, {"phi1ophi2", comp}};
        b.default_window = 32;
        SpacePtr sp = b.space;
        const AtomId zero("n", std::uint64_t{0});
        b.facts = {
            {"phi1 o phi2 is the identity; h = 1 exactly on window 32", "published",
             [=]() {
                 Window w(sp, 32);
                 HEngine e(sp, comp, w);
                 for (const AtomId& y : w.positive_atoms()) {
                     if (comp->apply(y) != y) return false;
                     HValue h = e.h(y, 1);
                     if (!h.is_exact() || h.exact_value() != 1) return false;
                 }
                 return true;
             }},
            {"C_{phi1} is not densely defined; witness atom 0", "published",
             [=]() {
                 Window w(sp, 32);
                 Verdict v = densely_defined(sp, phi1, w);
                 return v.fails_p() && v.witness->atoms == std::vector<AtomId>{zero};
             }},
            {"h_{phi1}(0) is certified infinite", "published",
             [=]() {
                 HEngine e(sp, phi1, Window(sp, 32));
                 return e.h(zero, 1).is_infinite();
             }},
            {"C_{phi2} is densely defined", "derived",
             [=]() {
                 Window w(sp, 32);
                 return densely_defined(sp, phi2, w).holds_p();
             }},
            {"the product C_{phi2} C_{phi1} is not densely defined", "published",
             [=]() {
                 Window w(sp, 32);
                 return densely_defined_product(sp, {phi1, phi2}, w).fails_p();
             }},
        };
        return b;
    }

    if (name == "partition") {
        int kappa = 2;
        bool closed = true;
        if (auto it = params.find("kappa"); it != params.end()) kappa = std::stoi(it->second);
        if (auto it = params.find("regime"); it != params.end()) closed = it->second != "unbounded";
        auto gen = std::make_shared<PartitionGenerator>(kappa, closed);
        b.space = MeasureSpace::generated(gen);
        b.phi = gen->transformation("phi");
        b.maps = {{"phi", b.phi}};
        b.default_window = 16;
        SpacePtr sp = b.space;
        TransformationPtr phi = b.phi;
        if (closed) {
            b.facts = {
                {"window h matches the closed-form case table for j <= 4", "published",
                 [=]() {
                     Window w(sp, 16);
                     HEngine e(sp, phi, w);
                     for (const AtomId& y : w.positive_atoms())
                         for (int j = 1; j <= 4; ++j) {
                             HValue h = e.h(y, j);
                             if (!h.is_exact()) return false;
                             if (h.exact_value() != gen->h_closed_form(y.indices[0], j))
                                 return false;
                         }
                     return true;
                 }},
                {"every power is closed: global bound certified", "published",
                 [=]() {
                     Window w(sp, 16);
                     for (int n = 2; n <= 3; ++n) {
                         auto r = power_equals_iterate(sp, phi, n, w);
                         if (!r.verdict.holds_p() ||
                             r.bound->status != BoundStatus::UniformCertified)
                             return false;
                     }
                     return true;
                 }},
                {"C^infinity vectors dense up to order 6", "published",
                 [=]() { return cinfty_dense(sp, phi, Window(sp, 16), 6).holds_p(); }},
            };
        } else {
            b.facts = {
                {"no power beyond the first is closed: certified witness family", "published",
                 [=]() {
                     Window w(sp, 16);
                     for (int n = 2; n <= 3; ++n) {
                         auto r = power_equals_iterate(sp, phi, n, w);
                         if (!r.verdict.fails_p() || r.verdict.witness->atoms.empty())
                             return false;
                     }
                     return true;
                 }},
                {"still densely defined with dense C^infinity vectors", "published",
                 [=]() { return cinfty_dense(sp, phi, Window(sp, 16), 4).holds_p(); }},
            };
        }
        return b;
    }

    if (name == "binary") {
        auto gen = std::make_shared<BinaryTreeGenerator>();
        b.space = MeasureSpace::generated(gen);
        b.phi = gen->transformation("phi");
        b.maps = {{"phi", b.phi}};
        b.default_window = 6;
        SpacePtr sp = b.space;
        TransformationPtr phi = b.phi;
        b.facts = {
            {"h_{phi^n} = 2^n exactly for n <= 3", "derived",
             [=]() {
                 Window w(sp, 5);
                 HEngine e(sp, phi, w);
                 HTable t = h_table(e, 3);
                 for (const AtomId& y : t.atoms) {
                     Rat expect = 1;
                     for (int n = 0; n <= 3; ++n) {
                         if (t.at(y, n).exact_value() != expect) return false;
                         expect *= 2;
                     }
                 }
                 return true;
             }},
            {"quasinormal but not normal", "derived",
             [=]() {
                 HEngine e(sp, phi, Window(sp, 5));
                 return quasinormal(e).holds_p() && normal(e).fails_p();
             }},
            {"generates Stieltjes sequences at order 6 (delta_2 moments)", "derived",
             [=]() {
                 HEngine e(sp, phi, Window(sp, 5));
                 return generates_stieltjes(e, 6).holds_p();
             }},
        };
        return b;
    }

    throw UnknownExample("no example named '" + name + "'");
}

// ---------------------------------------------------------------------------
// Seeded random finite spaces and the counterexample search.
// ---------------------------------------------------------------------------

/// Deterministic recipe for a random finite space; identical specs produce
/// identical spaces. Raw mt19937_64 draws with modulo keep the construction
/// independent of distribution implementations.
struct RandomSpaceSpec {
    std::uint64_t seed = 1;
    int max_atoms = 8;
    int mass_numerator_bound = 4;
    int mass_denominator_bound = 4;
    int null_percent = 0;
};

inline std::pair<SpacePtr, TransformationPtr> random_finite(const RandomSpaceSpec& spec) {
    if (spec.max_atoms < 2 || spec.mass_numerator_bound < 1 || spec.mass_denominator_bound < 1)
        throw UsageError("random space bounds must be positive (and at least two atoms)");
    std::mt19937_64 rng(spec.seed);
    const int count = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(spec.max_atoms - 1));
    std::vector<std::pair<AtomId, Rat>> atoms;
    for (int i = 0; i < count; ++i) {
        AtomId id("p", static_cast<std::uint64_t>(i));
        Rat mass;
        if (spec.null_percent > 0 &&
            rng() % 100 < static_cast<std::uint64_t>(spec.null_percent)) {
            mass = 0;
        } else {
            Int num = 1 + Int(rng() % static_cast<std::uint64_t>(spec.mass_numerator_bound));
            Int den = 1 + Int(rng() % static_cast<std::uint64_t>(spec.mass_denominator_bound));
            mass = Rat(num, den);
        }
        atoms.emplace_back(id, mass);
    }
    std::map<AtomId, AtomId> rule;
    for (int i = 0; i < count; ++i)
        rule.emplace(AtomId("p", static_cast<std::uint64_t>(i)),
                     AtomId("p", rng() % static_cast<std::uint64_t>(count)));
    auto space = MeasureSpace::finite("random-" + std::to_string(spec.seed), std::move(atoms));
    auto phi = std::make_shared<FiniteMap>("phi", std::move(rule));
    return {space, phi};
}

// ---------------------------------------------------------------------------
// Predicate language over classification reports: identifiers combined with
// !, & and | under Kleene three-valued logic; a report matches when the
// whole expression evaluates to Holds.
// ---------------------------------------------------------------------------

namespace detail {

class PredicateParser {
public:
    explicit PredicateParser(const std::string& text) : text_(text) {}

    std::function<Status(const ClassificationReport&)> parse() {
        auto e = parse_or();
        skip_ws();
        if (pos_ != text_.size()) throw UsageError("trailing input in predicate: '" + text_ + "'");
        return e;
    }

private:
    using Eval = std::function<Status(const ClassificationReport&)>;

    static Status neg(Status s) {
        if (s == Status::Holds) return Status::Fails;
        if (s == Status::Fails) return Status::Holds;
        return Status::Inconclusive;
    }

    Eval parse_or() {
        Eval lhs = parse_and();
        skip_ws();
        while (peek() == '|') {
            ++pos_;
            Eval rhs = parse_and();
            Eval prev = lhs;
            lhs = [prev, rhs](const ClassificationReport& r) {
                Status a = prev(r), b = rhs(r);
                if (a == Status::Holds || b == Status::Holds) return Status::Holds;
                if (a == Status::Fails && b == Status::Fails) return Status::Fails;
                return Status::Inconclusive;
            };
            skip_ws();
        }
        return lhs;
    }

    Eval parse_and() {
        Eval lhs = parse_factor();
        skip_ws();
        while (peek() == '&') {
            ++pos_;
            Eval rhs = parse_factor();
            Eval prev = lhs;
            lhs = [prev, rhs](const ClassificationReport& r) {
                Status a = prev(r), b = rhs(r);
                if (a == Status::Fails || b == Status::Fails) return Status::Fails;
                if (a == Status::Holds && b == Status::Holds) return Status::Holds;
                return Status::Inconclusive;
            };
            skip_ws();
        }
        return lhs;
    }

    Eval parse_factor() {
        skip_ws();
        if (peek() == '!') {
            ++pos_;
            Eval inner = parse_factor();
            return [inner](const ClassificationReport& r) { return neg(inner(r)); };
        }
        if (peek() == '(') {
            ++pos_;
            Eval inner = parse_or();
            skip_ws();
            if (peek() != ')') throw UsageError("unbalanced parenthesis in predicate");
            ++pos_;
            return inner;
        }
        std::string ident;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' ||
                text_[pos_] == '_'))
            ident += text_[pos_++];
        if (ident.empty()) throw UsageError("expected identifier in predicate");
        return identifier(ident);
    }

    static Eval identifier(const std::string& name) {
        if (name == "true") return [](const ClassificationReport&) { return Status::Holds; };
        if (name == "false") return [](const ClassificationReport&) { return Status::Fails; };
        auto field = [name](const ClassificationReport& r) -> const Verdict& {
            if (name == "nonsingular") return r.nonsingular;
            if (name == "dense" || name == "densely-defined") return r.densely_defined_v;
            if (name == "injective") return r.injective_v;
            if (name == "quasinormal") return r.quasinormal_v;
            if (name == "normal") return r.normal_v;
            if (name == "formally-normal" || name == "formally_normal")
                return r.formally_normal_v;
            if (name == "hyponormal") return r.hyponormal_v;
            if (name == "stieltjes") return r.stieltjes_v;
            throw UsageError("unknown property '" + name + "' in predicate");
        };
        return [field](const ClassificationReport& r) { return field(r).status; };
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::function<Status(const ClassificationReport&)> parse_predicate(
    const std::string& text) {
    return detail::PredicateParser(text).parse();
}

struct SearchHit {
    std::uint64_t seed = 0;
    SpacePtr space;
    TransformationPtr phi;
    ClassificationReport report;
};

/// Enumerates seeded random spaces, classifies each, and collects those the
/// predicate accepts; results are ordered by seed.
inline std::vector<SearchHit> search(const std::string& predicate, RandomSpaceSpec base,
                                     std::uint64_t budget, int order = 4) {
    auto pred = parse_predicate(predicate);
    std::vector<SearchHit> hits;
    for (std::uint64_t s = 0; s < budget; ++s) {
        RandomSpaceSpec spec = base;
        spec.seed = base.seed + s;
        auto [space, phi] = random_finite(spec);
        ClassificationReport rep = classify_all(space, phi, Window(space, 1), order);
        if (pred(rep) == Status::Holds)
            hits.push_back(SearchHit{spec.seed, space, phi, std::move(rep)});
    }
    return hits;
}

}  // namespace compop
