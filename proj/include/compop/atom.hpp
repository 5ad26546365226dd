#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

namespace compop {

/// Identifier of a point of an atomic measure space. Standalone atoms carry
/// an empty index tuple; indexed families (a_i, c_{i,j}, ...) carry one or
/// more nonnegative indices. Ordered lexicographically by (family, indices).
struct AtomId {
    std::string family;
    std::vector<std::uint64_t> indices;

    AtomId() = default;
    explicit AtomId(std::string fam) : family(std::move(fam)) {}
    AtomId(std::string fam, std::vector<std::uint64_t> idx)
        : family(std::move(fam)), indices(std::move(idx)) {}
    AtomId(std::string fam, std::uint64_t i) : family(std::move(fam)), indices{i} {}
    AtomId(std::string fam, std::uint64_t i, std::uint64_t j)
        : family(std::move(fam)), indices{i, j} {}

    friend bool operator==(const AtomId& a, const AtomId& b) {
        return a.family == b.family && a.indices == b.indices;
    }
    friend bool operator!=(const AtomId& a, const AtomId& b) { return !(a == b); }
    friend bool operator<(const AtomId& a, const AtomId& b) {
        return std::tie(a.family, a.indices) < std::tie(b.family, b.indices);
    }

    std::string str() const {
        if (indices.empty()) return family;
        std::string s = family + "(";
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (k) s += ",";
            s += std::to_string(indices[k]);
        }
        s += ")";
        return s;
    }
};

struct AtomIdHash {
    std::size_t operator()(const AtomId& a) const {
        std::size_t h = std::hash<std::string>{}(a.family);
        for (auto i : a.indices) h = h * 1000003u + std::hash<std::uint64_t>{}(i);
        return h;
    }
};

}  // namespace compop
