#include <catch2/catch_amalgamated.hpp>

#include "compop/space_io.hpp"

using namespace compop;
using nlohmann::json;

TEST_CASE("finite space documents load and validate") {
    json doc = {
        {"kind", "finite"},
        {"atoms", json::array({{{"family", "1"}, {"mass", "1"}},
                               {{"family", "2"}, {"mass", "1"}},
                               {{"family", "3"}, {"mass", "1"}}})},
        {"map", json::array({{{"from", "1"}, {"to", "1"}},
                             {{"from", "2"}, {"to", "1"}},
                             {{"from", "3"}, {"to", "2"}}})},
    };
    LoadedSpace ls = load_space_json(doc);
    REQUIRE(ls.space->is_finite());
    REQUIRE(ls.space->finite_atoms().size() == 3);
    REQUIRE(ls.space->mass(AtomId("2")) == 1);
    REQUIRE(ls.maps.at("phi")->apply(AtomId("3")) == AtomId("2"));
}

TEST_CASE("schema violations are rejected") {
    json base = {
        {"kind", "finite"},
        {"atoms", json::array({{{"family", "1"}, {"mass", "1"}}})},
        {"map", json::array({{{"from", "1"}, {"to", "1"}}})},
    };

    SECTION("negative mass") {
        json doc = base;
        doc["atoms"][0]["mass"] = "-1/2";
        REQUIRE_THROWS_AS(load_space_json(doc), SchemaError);
    }
    SECTION("zero denominator") {
        json doc = base;
        doc["atoms"][0]["mass"] = "1/0";
        REQUIRE_THROWS_AS(load_space_json(doc), ParseError);
    }
    SECTION("duplicate atom") {
        json doc = base;
        doc["atoms"].push_back({{"family", "1"}, {"mass", "2"}});
        REQUIRE_THROWS_AS(load_space_json(doc), SchemaError);
    }
    SECTION("map leaving the space") {
        json doc = base;
        doc["map"][0]["to"] = "9";
        REQUIRE_THROWS_AS(load_space_json(doc), SchemaError);
    }
    SECTION("partial map") {
        json doc = base;
        doc["atoms"].push_back({{"family", "2"}, {"mass", "2"}});
        REQUIRE_THROWS_AS(load_space_json(doc), SchemaError);
    }
    SECTION("unknown generator") {
        json doc = {{"kind", "generated"}, {"generator", {{"name", "nope"}}}};
        REQUIRE_THROWS_AS(load_space_json(doc), UnknownGenerator);
    }
}

TEST_CASE("generated documents resolve against the registry") {
    json doc = {{"kind", "generated"}, {"generator", {{"name", "numerek"}}}};
    LoadedSpace ls = load_space_json(doc);
    REQUIRE_FALSE(ls.space->is_finite());
    Window w(ls.space, 3);
    REQUIRE(w.contains(AtomId("a", std::uint64_t{2})));
    REQUIRE(w.contains(AtomId("b", std::uint64_t{0})));
    REQUIRE(w.contains(AtomId("c", 2, 2)));
    REQUIRE_FALSE(w.contains(AtomId("a", std::uint64_t{3})));
    REQUIRE_FALSE(w.contains(AtomId("c", 0, 3)));
}

TEST_CASE("windows are nested and finite presentations are window-stable") {
    for (const std::string& name : {"numerek", "binary"}) {
        auto b = example(name);
        Window small(b.space, 3), big(b.space, 4);
        for (auto& [id, m] : small.atoms()) {
            REQUIRE(big.contains(id));
            REQUIRE(b.space->mass(id) == m);
        }
        REQUIRE(small.atoms().size() < big.atoms().size());
    }
    auto t3 = example("t3");
    REQUIRE(Window(t3.space, 7).atoms() == Window(t3.space, 1).atoms());
}

TEST_CASE("partition window at level 1 is the first block") {
    auto b = example("partition");
    Window w(b.space, 1);
    REQUIRE(w.atoms().size() == 1);
    REQUIRE(w.atoms().front().first == AtomId("n", std::uint64_t{1}));
}

TEST_CASE("preimages grow monotonically and completeness is stable") {
    auto b = example("numerek");
    const AtomId a0("a", std::uint64_t{0});
    const AtomId a2("a", std::uint64_t{2});
    Window w4(b.space, 4), w8(b.space, 8);
    Preimage p4 = b.phi->step_preimage(a0, w4);
    Preimage p8 = b.phi->step_preimage(a0, w8);
    REQUIRE_FALSE(p4.complete);
    REQUIRE_FALSE(p8.complete);
    for (auto& x : p4.atoms) REQUIRE(std::count(p8.atoms.begin(), p8.atoms.end(), x) == 1);
    REQUIRE(p4.atoms.size() < p8.atoms.size());

    Preimage q4 = b.phi->step_preimage(a2, w4);
    Preimage q8 = b.phi->step_preimage(a2, w8);
    REQUIRE(q4.complete);
    REQUIRE(q8.complete);
    REQUIRE(q4.atoms == q8.atoms);
}

TEST_CASE("nonsingularity detects null atoms with positive preimages") {
    auto b = example("null-atom");
    Window w(b.space, 1);

    Verdict v1 = check_nonsingular(b.space, *b.phi, w);
    REQUIRE(v1.fails_p());
    REQUIRE(v1.witness->atoms == std::vector<AtomId>{AtomId("t"), AtomId("z0")});

    Verdict v2 = check_nonsingular(b.space, *iterate(b.phi, 2), w);
    REQUIRE(v2.holds_p());

    auto t3 = example("t3");
    Verdict v3 = check_nonsingular(t3.space, *t3.phi, Window(t3.space, 1));
    REQUIRE(v3.holds_p());  // no null atoms at all

    auto ident = std::make_shared<FiniteMap>(
        "id", std::map<AtomId, AtomId>{{AtomId("t"), AtomId("t")},
                                       {AtomId("z0"), AtomId("z0")},
                                       {AtomId("z1"), AtomId("z1")}});
    REQUIRE(check_nonsingular(b.space, *ident, w).holds_p());
}

TEST_CASE("sigma-finiteness accepts counting measures and flags bad annotations") {
    auto ip = example("identity-product");
    REQUIRE(check_sigma_finite(ip.space, Window(ip.space, 8)).holds_p());

    auto t3 = example("t3");
    REQUIRE(check_sigma_finite(t3.space, Window(t3.space, 1)).holds_p());

    auto tampered = example("numerek", {{"a0_mass", "inf"}});
    REQUIRE_THROWS_AS(check_sigma_finite(tampered.space, Window(tampered.space, 2)),
                      AnnotationError);
}

TEST_CASE("atom spellings round-trip") {
    REQUIRE(parse_atom("a(0)") == AtomId("a", std::uint64_t{0}));
    REQUIRE(parse_atom("c(1,2)") == AtomId("c", 1, 2));
    REQUIRE(parse_atom("z1") == AtomId("z1"));
    REQUIRE(parse_atom(AtomId("c", 3, 4).str()) == AtomId("c", 3, 4));
    REQUIRE_THROWS_AS(parse_atom("a("), ParseError);
    REQUIRE_THROWS_AS(parse_atom("a(x)"), ParseError);
    REQUIRE_THROWS_AS(parse_atom(""), ParseError);
}
