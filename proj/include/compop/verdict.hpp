#pragma once

#include <optional>
#include <string>
#include <vector>

#include "compop/atom.hpp"
#include "compop/rational.hpp"

namespace compop {

/// Three-valued outcome reflecting what the current window can prove.
/// Fails carries a witness; Inconclusive means the window was too small to
/// decide either way.
enum class Status { Holds, Fails, Inconclusive };

inline std::string status_str(Status s) {
    switch (s) {
        case Status::Holds: return "holds";
        case Status::Fails: return "fails";
        default: return "inconclusive";
    }
}

/// Witness data attached to a Fails (or, for informational purposes, to an
/// Inconclusive) verdict: the atoms that break the property and a short note
/// saying how.
struct Witness {
    std::vector<AtomId> atoms;
    std::string note;
};

struct Verdict {
    Status status = Status::Inconclusive;
    int window = 0;
    /// True when the verdict is certified beyond the window: Fails witnesses
    /// always persist; Holds is certified on finite spaces and whenever a
    /// generator certificate covers the whole space.
    bool certified = false;
    std::optional<Witness> witness;

    static Verdict holds(int window, bool certified) {
        return Verdict{Status::Holds, window, certified, std::nullopt};
    }
    static Verdict fails(int window, Witness w) {
        return Verdict{Status::Fails, window, true, std::move(w)};
    }
    static Verdict inconclusive(int window, std::string note = "") {
        Verdict v{Status::Inconclusive, window, false, std::nullopt};
        if (!note.empty()) v.witness = Witness{{}, std::move(note)};
        return v;
    }

    bool holds_p() const { return status == Status::Holds; }
    bool fails_p() const { return status == Status::Fails; }
};

/// Certification grade of a "there exists c" bound: exact on finite spaces
/// (the window is the space), window-only otherwise, unless a generator
/// supplies a global bound.
enum class BoundStatus { UniformCertified, WindowOnly };

/// The constant c answering a domination question, together with how far the
/// certification reaches. `c` is the exact maximum of the defining ratios
/// over the window.
struct BoundWitness {
    Rat c;
    int window = 0;
    BoundStatus status = BoundStatus::WindowOnly;
};

}  // namespace compop
