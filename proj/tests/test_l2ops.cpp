#include <catch2/catch_amalgamated.hpp>

#include "compop/l2ops.hpp"
#include "compop/registry.hpp"
#include "support/oracles.hpp"

using namespace compop;

namespace {

HEngine engine_of(const ExampleBundle& b, int level = 1) {
    return HEngine(b.space, b.phi, Window(b.space, level));
}

}  // namespace

TEST_CASE("inner products are exact") {
    auto t3 = example("t3");
    Vec e1 = Vec::indicator(t3.space, AtomId("1"));
    Vec e2 = Vec::indicator(t3.space, AtomId("2"));
    REQUIRE(inner(e1, e1) == CRat(1));
    REQUIRE(inner(e1, e2) == CRat(0));

    auto nb = example("numerek");
    Vec b0 = Vec::indicator(nb.space, AtomId("b", std::uint64_t{0}));
    REQUIRE(inner(CRat(2) * b0, b0) == CRat(1));  // 2 * (1/2)

    Vec other(nb.space);
    REQUIRE_THROWS_AS(inner(e1, other), SpaceMismatch);
}

TEST_CASE("C_phi on T3") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    Vec e1 = Vec::indicator(t3.space, AtomId("1"));
    Vec out = apply_cphi(eng, e1);
    Vec expect = Vec::indicator(t3.space, AtomId("1")) + Vec::indicator(t3.space, AtomId("2"));
    REQUIRE(l2_equal(out, expect));
    REQUIRE(out.norm_sq() == 2);
    REQUIRE(out.norm_sq() == eng.h(AtomId("1"), 1).exact_value() * t3.space->mass(AtomId("1")));

    Vec zero(t3.space);
    REQUIRE(l2_equal(apply_cphi(eng, zero), zero));
}

TEST_CASE("C_phi image with infinite support reports its exact norm") {
    auto nb = example("numerek");
    HEngine eng(nb.space, nb.phi, Window(nb.space, 16));
    Vec f = Vec::indicator(nb.space, AtomId("a", std::uint64_t{0}));
    try {
        apply_cphi(eng, f);
        FAIL("expected IncompletePreimage");
    } catch (const IncompletePreimage& e) {
        REQUIRE(e.norm_sq() == "1");
    }
}

TEST_CASE("adjoint formula and swap") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    REQUIRE(l2_equal(apply_adjoint(eng, Vec::indicator(t3.space, AtomId("1"))),
                     Vec::indicator(t3.space, AtomId("1"))));
    REQUIRE(l2_equal(apply_adjoint(eng, Vec::indicator(t3.space, AtomId("2"))),
                     Vec::indicator(t3.space, AtomId("1"))));

    auto sw = example("swap");
    HEngine seng = engine_of(sw);
    REQUIRE(l2_equal(apply_adjoint(seng, Vec::indicator(sw.space, AtomId("1"))),
                     Vec::indicator(sw.space, AtomId("2"))));
}

TEST_CASE("pairing identity on seeded random spaces") {
    std::mt19937_64 seeds(7);
    for (int trial = 0; trial < 100; ++trial) {
        RandomSpaceSpec spec;
        spec.seed = seeds();
        auto [space, phi] = random_finite(spec);
        HEngine eng(space, phi, Window(space, 1));
        std::mt19937_64 vrng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
        for (int pair = 0; pair < 5; ++pair) {
            Vec f = oracles::random_vector(space, vrng);
            Vec g = oracles::random_vector(space, vrng);
            REQUIRE(inner(apply_cphi(eng, f), g) == inner(f, apply_adjoint(eng, g)));
        }
    }
}

TEST_CASE("conditional expectation is the class-averaging projection") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    Vec e1 = Vec::indicator(t3.space, AtomId("1"));
    Vec expect = CRat(Rat(1, 2)) * (Vec::indicator(t3.space, AtomId("1")) +
                                    Vec::indicator(t3.space, AtomId("2")));
    REQUIRE(l2_equal(conditional_expectation(eng, e1), expect));

    // class-constant vectors are fixed
    Vec cc = Vec::indicator(t3.space, AtomId("1")) + Vec::indicator(t3.space, AtomId("2"));
    REQUIRE(l2_equal(conditional_expectation(eng, cc), cc));

    // injective symbols have singleton classes
    auto sw = example("swap");
    HEngine seng = engine_of(sw);
    Vec g(sw.space);
    g.set(AtomId("1"), CRat(Rat(2), Rat(1, 3)));
    g.set(AtomId("2"), CRat(Rat(-1)));
    REQUIRE(l2_equal(conditional_expectation(seng, g), g));
}

TEST_CASE("conditional expectation is an orthogonal projection, exactly") {
    std::mt19937_64 seeds(8);
    for (int trial = 0; trial < 60; ++trial) {
        RandomSpaceSpec spec;
        spec.seed = seeds();
        auto [space, phi] = random_finite(spec);
        HEngine eng(space, phi, Window(space, 1));
        std::mt19937_64 vrng(spec.seed + 1);
        Vec g = oracles::random_vector(space, vrng);
        Vec k = oracles::random_vector(space, vrng);
        Vec eg = conditional_expectation(eng, g);
        REQUIRE(l2_equal(conditional_expectation(eng, eg), eg));      // idempotent
        REQUIRE(inner(eg, k) == inner(g, conditional_expectation(eng, k)));  // self-adjoint
        REQUIRE(eg.norm_sq() <= g.norm_sq());                         // contraction
    }
}

TEST_CASE("modulus multiplies by the square root of h") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    SqrtVec m1 = apply_modulus(eng, Vec::indicator(t3.space, AtomId("1")));
    REQUIRE(m1.entries().at(AtomId("1")).radicand == 2);
    REQUIRE(m1.norm_sq() == 2);

    // vectors supported in the kernel set are annihilated
    SqrtVec m3 = apply_modulus(eng, Vec::indicator(t3.space, AtomId("3")));
    REQUIRE(m3.entries().empty());

    auto sw = example("swap");
    HEngine seng = engine_of(sw);
    Vec g = Vec::indicator(sw.space, AtomId("1"));
    SqrtVec mg = apply_modulus(seng, g);
    REQUIRE(l2_equal(mg, SqrtVec::from_vector(g)));  // h = 1
}

TEST_CASE("the partial isometry U and its adjoint") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    SqrtVec u1 = apply_U(eng, Vec::indicator(t3.space, AtomId("1")));
    REQUIRE(u1.norm_sq() == 1);  // isometric off the kernel
    SqrtVec u3 = apply_U(eng, Vec::indicator(t3.space, AtomId("3")));
    REQUIRE(u3.norm_sq() == 0);  // chi_3 lies in ker|C_phi|

    // U^*(f o phi) = h^{1/2} f on T3 with f = chi_1
    Vec f_o_phi = Vec::indicator(t3.space, AtomId("1")) + Vec::indicator(t3.space, AtomId("2"));
    SqrtVec ustar = apply_Ustar(eng, f_o_phi);
    SqrtVec expect(t3.space);
    expect.set(AtomId("1"), CRat(1), Rat(2));
    REQUIRE(l2_equal(ustar, expect));
}

TEST_CASE("polar factorization and isometry split on random spaces") {
    std::mt19937_64 seeds(9);
    for (int trial = 0; trial < 60; ++trial) {
        RandomSpaceSpec spec;
        spec.seed = seeds();
        auto [space, phi] = random_finite(spec);
        HEngine eng(space, phi, Window(space, 1));
        std::mt19937_64 vrng(spec.seed + 2);
        Vec f = oracles::random_vector(space, vrng);

        // U |C_phi| f = C_phi f
        SqrtVec lhs = apply_U(eng, apply_modulus(eng, f));
        SqrtVec rhs = SqrtVec::from_vector(apply_cphi(eng, f));
        REQUIRE(l2_equal(lhs, rhs));

        // ||U f||^2 + ||f restricted to N_phi||^2 = ||f||^2
        Rat kernel_part = 0;
        for (const AtomId& y : kernel_atoms(eng).certified)
            kernel_part += f.at(y).norm_sq() * space->mass(y);
        REQUIRE(apply_U(eng, f).norm_sq() + kernel_part == f.norm_sq());

        // adjoint through the expectation: C*g(y) = h(y) avg_{class(y)}(g)
        Vec g = oracles::random_vector(space, vrng);
        Vec adj = apply_adjoint(eng, g);
        Vec eg = conditional_expectation(eng, g);
        for (auto& [y, m] : space->finite_atoms()) {
            if (m == 0) continue;
            Rat h = eng.h(y, 1).exact_value();
            if (h == 0) {
                REQUIRE(adj.at(y) == CRat(0));
                continue;
            }
            const Preimage& cls = eng.preimage(y, 1);
            REQUIRE(adj.at(y) == h * eg.at(cls.atoms.front()));
        }
    }
}

TEST_CASE("kernel atoms") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    REQUIRE(kernel_atoms(eng).certified == std::vector<AtomId>{AtomId("3")});

    auto nb = example("numerek");
    HEngine neng(nb.space, nb.phi, Window(nb.space, 4));
    auto k = kernel_atoms(neng);
    REQUIRE_FALSE(k.certified.empty());
    for (const AtomId& a : k.certified) REQUIRE(a.family == "c");

    auto sw = example("swap");
    HEngine seng = engine_of(sw);
    REQUIRE(kernel_atoms(seng).certified.empty());
}

TEST_CASE("range membership is the class-constancy test") {
    auto t3 = example("t3");
    HEngine eng = engine_of(t3);
    Vec cc = Vec::indicator(t3.space, AtomId("1")) + Vec::indicator(t3.space, AtomId("2"));
    REQUIRE(range_membership(eng, cc).holds_p());
    Verdict v = range_membership(eng, Vec::indicator(t3.space, AtomId("1")));
    REQUIRE(v.fails_p());

    auto sw = example("swap");
    HEngine seng = engine_of(sw);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i)
        REQUIRE(range_membership(seng, oracles::random_vector(sw.space, rng)).holds_p());
}

TEST_CASE("transport identity against the h-engine") {
    std::mt19937_64 seeds(10);
    for (int trial = 0; trial < 60; ++trial) {
        RandomSpaceSpec spec;
        spec.seed = seeds();
        auto [space, phi] = random_finite(spec);
        HEngine eng(space, phi, Window(space, 1));
        std::mt19937_64 vrng(spec.seed + 3);
        Vec f = oracles::random_vector(space, vrng);
        Rat direct = apply_cphi(eng, f).norm_sq();
        Rat via_h = 0;
        for (auto& [y, m] : space->finite_atoms()) {
            if (m == 0) continue;
            via_h += f.at(y).norm_sq() * eng.h(y, 1).exact_value() * m;
        }
        REQUIRE(direct == via_h);
    }
}

TEST_CASE("class operations see support atoms beyond the window") {
    // b(20) lies outside window 16, but it maps into the class of a(0); the
    // class machinery must account for it rather than treating g as zero.
    auto nb = example("numerek");
    HEngine eng(nb.space, nb.phi, Window(nb.space, 16));
    Vec g = Vec::indicator(nb.space, AtomId("b", std::uint64_t{20}));

    REQUIRE_THROWS_AS(conditional_expectation(eng, g), IncompleteClass);

    SqrtVec u = apply_Ustar(eng, g);  // h(a0) = 1 is exactly annotated
    auto it = u.entries().find(AtomId("a", std::uint64_t{0}));
    REQUIRE(it != u.entries().end());
    REQUIRE(it->second.coeff == CRat(Rat(Int(1), Int(1) << 21)));
    REQUIRE(it->second.radicand == 1);

    Verdict v = range_membership(eng, g);  // 0 on b(0)..b(15), 1 on b(20)
    REQUIRE(v.fails_p());
}

TEST_CASE("values on null atoms are quotiented away in L2 equality") {
    auto b = example("null-atom");
    Vec zero(b.space);
    Vec on_null(b.space);
    on_null.set(AtomId("t"), CRat(Rat(5), Rat(7)));
    REQUIRE(l2_equal(on_null, zero));
    REQUIRE(on_null.norm_sq() == 0);
    on_null.set(AtomId("z0"), CRat(1));
    REQUIRE_FALSE(l2_equal(on_null, zero));

    SqrtVec s1(b.space), s2(b.space);
    s1.set(AtomId("t"), CRat(3), Rat(2));
    REQUIRE(l2_equal(s1, s2));
    // equal squared values with opposite directions differ
    s1 = SqrtVec(b.space);
    s1.set(AtomId("z0"), CRat(1), Rat(2));
    s2.set(AtomId("z0"), CRat(-1), Rat(2));
    REQUIRE_FALSE(l2_equal(s1, s2));
    // 2 * sqrt(1) equals 1 * sqrt(4)
    SqrtVec s3(b.space), s4(b.space);
    s3.set(AtomId("z0"), CRat(2), Rat(1));
    s4.set(AtomId("z0"), CRat(1), Rat(4));
    REQUIRE(l2_equal(s3, s4));
}

TEST_CASE("formal normality oracle on the depth-3 tree with a null root") {
    // Rooted binary heap 1..15, root mass 0, root fixed; the symbol is not
    // nonsingular but the pointwise formulas still evaluate.
    std::vector<std::pair<AtomId, Rat>> atoms;
    std::map<AtomId, AtomId> rule;
    for (std::uint64_t i = 1; i <= 15; ++i) {
        atoms.emplace_back(AtomId("v", i), i == 1 ? Rat(0) : Rat(1));
        rule.emplace(AtomId("v", i), AtomId("v", i == 1 ? 1 : i / 2));
    }
    auto space = MeasureSpace::finite("depth3", std::move(atoms));
    auto phi = std::make_shared<FiniteMap>("phi", std::move(rule));
    HEngine eng(space, phi, Window(space, 1));
    Vec root = Vec::indicator(space, AtomId("v", std::uint64_t{1}));
    REQUIRE(apply_cphi(eng, root).norm_sq() == 2);
    REQUIRE(apply_adjoint(eng, root).norm_sq() == 0);
    REQUIRE_FALSE(formal_normality_direct(eng, root));
}
