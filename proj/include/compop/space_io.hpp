#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "compop/registry.hpp"

namespace compop {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Atom spellings: "a", "a(0)", "c(1,2)".
// ---------------------------------------------------------------------------

inline AtomId parse_atom(const std::string& text) {
    auto open = text.find('(');
    if (open == std::string::npos) {
        if (text.empty()) throw ParseError("empty atom name");
        return AtomId(text);
    }
    if (text.back() != ')') throw ParseError("malformed atom '" + text + "'");
    AtomId id(text.substr(0, open));
    if (id.family.empty()) throw ParseError("malformed atom '" + text + "'");
    std::string inside = text.substr(open + 1, text.size() - open - 2);
    std::stringstream ss(inside);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("malformed atom index in '" + text + "'");
        id.indices.push_back(std::stoull(part));
    }
    if (id.indices.empty()) throw ParseError("malformed atom '" + text + "'");
    return id;
}

inline json atom_json(const AtomId& a) {
    json j;
    j["family"] = a.family;
    j["indices"] = a.indices;
    return j;
}

inline AtomId atom_from_json(const json& j) {
    if (j.is_string()) return parse_atom(j.get<std::string>());
    if (!j.is_object() || !j.contains("family"))
        throw ParseError("atom must be an object with a 'family' field");
    AtomId id(j.at("family").get<std::string>());
    if (j.contains("indices"))
        for (auto& v : j.at("indices")) id.indices.push_back(v.get<std::uint64_t>());
    return id;
}

// ---------------------------------------------------------------------------
// Space files.
// ---------------------------------------------------------------------------

/// A space document resolved into objects: the space, its named symbols and,
/// for generated presentations, the registry coordinates that rebuilt it.
struct LoadedSpace {
    SpacePtr space;
    std::map<std::string, TransformationPtr> maps;
    std::string default_map;
    std::string generator_name;  // empty for finite presentations
    std::map<std::string, std::string> generator_params;
};

inline GeneratorPtr resolve_generator(const std::string& name,
                                      const std::map<std::string, std::string>& params) {
    if (name == "numerek") return std::make_shared<NumerekGenerator>(params);
    if (name == "identity-product") return std::make_shared<HalvingDoublingGenerator>();
    if (name == "binary") return std::make_shared<BinaryTreeGenerator>();
    if (name == "partition") {
        int kappa = 2;
        bool closed = true;
        if (auto it = params.find("kappa"); it != params.end()) {
            try {
                kappa = std::stoi(it->second);
            } catch (const std::exception&) {
                throw ParseError("partition parameter kappa must be an integer");
            }
        }
        if (auto it = params.find("regime"); it != params.end()) closed = it->second != "unbounded";
        return std::make_shared<PartitionGenerator>(kappa, closed);
    }
    throw UnknownGenerator("no registered generator named '" + name + "'");
}

inline LoadedSpace load_space_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("kind"))
        throw ParseError("space document must be an object with a 'kind' field");
    LoadedSpace out;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "finite") {
        if (!doc.contains("atoms") || !doc.at("atoms").is_array())
            throw ParseError("finite space document needs an 'atoms' array");
        std::vector<std::pair<AtomId, Rat>> atoms;
        for (auto& entry : doc.at("atoms")) {
            AtomId id = atom_from_json(entry);
            if (!entry.contains("mass")) throw ParseError("atom " + id.str() + " lacks a mass");
            Rat mass = parse_rat(entry.at("mass").get<std::string>());
            if (mass < 0) throw SchemaError("negative mass at atom " + id.str());
            atoms.emplace_back(id, mass);
        }
        std::string name = doc.value("name", std::string("finite"));
        out.space = MeasureSpace::finite(name, std::move(atoms));
        if (!doc.contains("map") || !doc.at("map").is_array())
            throw ParseError("finite space document needs a 'map' array");
        std::map<AtomId, AtomId> rule;
        for (auto& arrow : doc.at("map")) {
            AtomId from = atom_from_json(arrow.at("from"));
            AtomId to = atom_from_json(arrow.at("to"));
            if (!out.space->has_atom(from) || !out.space->has_atom(to))
                throw SchemaError("map arrow " + from.str() + " -> " + to.str() +
                                  " leaves the space");
            if (!rule.emplace(from, to).second)
                throw SchemaError("duplicate map entry for " + from.str());
        }
        for (auto& [id, m] : out.space->finite_atoms())
            if (!rule.count(id)) throw SchemaError("map undefined at atom " + id.str());
        out.maps["phi"] = std::make_shared<FiniteMap>("phi", std::move(rule));
        out.default_map = "phi";
        return out;
    }
    if (kind == "generated") {
        if (!doc.contains("generator") || !doc.at("generator").contains("name"))
            throw ParseError("generated space document needs generator.name");
        out.generator_name = doc.at("generator").at("name").get<std::string>();
        if (doc.at("generator").contains("params"))
            for (auto& [k, v] : doc.at("generator").at("params").items())
                out.generator_params[k] = v.is_string() ? v.get<std::string>() : v.dump();
        GeneratorPtr gen = resolve_generator(out.generator_name, out.generator_params);
        out.space = MeasureSpace::generated(gen);
        for (auto& nm : gen->transformation_names()) out.maps[nm] = gen->transformation(nm);
        out.default_map = gen->transformation_names().front();
        return out;
    }
    throw ParseError("unknown space kind '" + kind + "'");
}

inline LoadedSpace load_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open space file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("space file '" + path + "' is not valid JSON: " + e.what());
    }
    return load_space_json(doc);
}

/// The document form of an example bundle: generated presentations round-trip
/// through their registry coordinates, finite ones are listed explicitly.
inline json space_file_json(const ExampleBundle& bundle) {
    json doc;
    if (!bundle.space->is_finite()) {
        doc["kind"] = "generated";
        doc["generator"]["name"] = bundle.name;
        json params = json::object();
        for (auto& [k, v] : bundle.params) params[k] = v;
        doc["generator"]["params"] = params;
        return doc;
    }
    doc["kind"] = "finite";
    doc["name"] = bundle.space->name();
    json atoms = json::array();
    for (auto& [id, mass] : bundle.space->finite_atoms()) {
        json a = atom_json(id);
        a["mass"] = mass.str();
        atoms.push_back(a);
    }
    doc["atoms"] = atoms;
    json arrows = json::array();
    for (auto& [id, mass] : bundle.space->finite_atoms()) {
        json arrow;
        arrow["from"] = atom_json(id);
        arrow["to"] = atom_json(bundle.phi->apply(id));
        arrows.push_back(arrow);
    }
    doc["map"] = arrows;
    return doc;
}

/// Document form of an arbitrary finite space and symbol (used when the
/// search harness emits witnesses).
inline json space_file_json(const SpacePtr& space, const Transformation& phi) {
    json doc;
    doc["kind"] = "finite";
    doc["name"] = space->name();
    json atoms = json::array();
    for (auto& [id, mass] : space->finite_atoms()) {
        json a = atom_json(id);
        a["mass"] = mass.str();
        atoms.push_back(a);
    }
    doc["atoms"] = atoms;
    json arrows = json::array();
    for (auto& [id, mass] : space->finite_atoms()) {
        json arrow;
        arrow["from"] = atom_json(id);
        arrow["to"] = atom_json(phi.apply(id));
        arrows.push_back(arrow);
    }
    doc["map"] = arrows;
    return doc;
}

// ---------------------------------------------------------------------------
// Vectors.
// ---------------------------------------------------------------------------

/// {"a(0)": "1/2", "b(1)": ["1/2", "-1"]}; a bare string is a real value,
/// a two-element array is [re, im].
inline Vec vector_from_json(const SpacePtr& space, const json& doc) {
    if (!doc.is_object()) throw ParseError("vector document must be an object");
    Vec v(space);
    for (auto& [key, value] : doc.items()) {
        AtomId atom = parse_atom(key);
        CRat c;
        if (value.is_string()) {
            c = CRat(parse_rat(value.get<std::string>()));
        } else if (value.is_array() && value.size() == 2) {
            c = CRat(parse_rat(value.at(0).get<std::string>()),
                     parse_rat(value.at(1).get<std::string>()));
        } else {
            throw ParseError("vector value at " + atom.str() +
                             " must be a rational string or an [re, im] pair");
        }
        v.set(atom, c);
    }
    return v;
}

inline json vector_json(const Vec& v) {
    json doc = json::object();
    for (auto& [atom, c] : v.entries()) {
        if (c.im == 0)
            doc[atom.str()] = c.re.str();
        else
            doc[atom.str()] = json::array({c.re.str(), c.im.str()});
    }
    return doc;
}

inline json sqrt_vector_json(const SqrtVec& v) {
    json doc = json::object();
    for (auto& [atom, e] : v.entries()) {
        json entry;
        if (e.coeff.im == 0)
            entry["coeff"] = e.coeff.re.str();
        else
            entry["coeff"] = json::array({e.coeff.re.str(), e.coeff.im.str()});
        entry["radicand"] = e.radicand.str();
        doc[atom.str()] = entry;
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Verdicts and reports.
// ---------------------------------------------------------------------------

inline json verdict_json(const Verdict& v) {
    json j;
    j["status"] = status_str(v.status);
    j["window"] = v.window;
    j["certified"] = v.certified;
    if (v.witness) {
        json w;
        json atoms = json::array();
        for (auto& a : v.witness->atoms) atoms.push_back(a.str());
        w["atoms"] = atoms;
        w["note"] = v.witness->note;
        j["witness"] = w;
    }
    return j;
}

inline json bound_json(const BoundWitness& b) {
    json j;
    j["c"] = b.c.str();
    j["window"] = b.window;
    j["status"] = b.status == BoundStatus::UniformCertified ? "uniform-certified" : "window-only";
    return j;
}

inline json report_json(const ClassificationReport& r) {
    json j;
    j["window"] = r.window;
    j["order"] = r.order;
    j["nonsingular"] = verdict_json(r.nonsingular);
    j["densely-defined"] = verdict_json(r.densely_defined_v);
    json powers = json::array();
    for (auto& [n, v] : r.power_dense) {
        json entry;
        entry["n"] = n;
        entry["verdict"] = verdict_json(v);
        powers.push_back(entry);
    }
    j["densely-defined-powers"] = powers;
    j["injective"] = verdict_json(r.injective_v);
    j["quasinormal"] = verdict_json(r.quasinormal_v);
    j["normal"] = verdict_json(r.normal_v);
    j["formally-normal"] = verdict_json(r.formally_normal_v);
    j["hyponormal-necessary"] = verdict_json(r.hyponormal_v);
    json mult = json::array();
    for (auto& [n, v] : r.multiplicative) {
        json entry;
        entry["n"] = n;
        entry["verdict"] = verdict_json(v);
        mult.push_back(entry);
    }
    j["h-multiplicative"] = mult;
    j["generates-stieltjes"] = verdict_json(r.stieltjes_v);
    j["implications-checked"] = r.implications_checked;
    j["notes"] = r.notes;
    return j;
}

inline json htable_json(const HTable& t) {
    json rows = json::array();
    for (const AtomId& y : t.atoms) {
        for (int n = 0; n <= t.max_power; ++n) {
            const HValue& h = t.at(y, n);
            json row;
            row["atom"] = y.str();
            row["n"] = n;
            row["value"] = h.str();
            row["certainty"] = certainty_str(h.certainty);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace compop
