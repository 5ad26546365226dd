#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "compop/radon.hpp"

namespace compop {

using RatMatrix = std::vector<std::vector<Rat>>;

// ---------------------------------------------------------------------------
// Moment sequences and Hankel forms.
// ---------------------------------------------------------------------------

/// A truncated candidate moment sequence gamma_0..gamma_N.
struct MomentSequence {
    std::vector<Rat> entries;

    int order() const { return static_cast<int>(entries.size()) - 1; }
    const Rat& at(int n) const { return entries.at(static_cast<std::size_t>(n)); }
};

/// [gamma_{i+j+shift}] for shift 0 (plain) or 1 (shifted); symmetric by
/// construction. The size is the largest the truncation supports.
struct HankelForm {
    RatMatrix matrix;
    int shift = 0;

    static std::optional<HankelForm> from(const MomentSequence& seq, int shift) {
        const int N = seq.order();
        const int size = (N - shift) / 2 + 1;
        if (N < shift) return std::nullopt;
        HankelForm h;
        h.shift = shift;
        h.matrix.assign(static_cast<std::size_t>(size), std::vector<Rat>(static_cast<std::size_t>(size)));
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j)
                h.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    seq.at(i + j + shift);
        return h;
    }
};

// ---------------------------------------------------------------------------
// Exact positive-semidefiniteness.
// ---------------------------------------------------------------------------

/// Exact determinant by rational Gaussian elimination.
inline Rat det_exact(RatMatrix a) {
    const std::size_t n = a.size();
    Rat det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        while (pivot < n && a[pivot][k] == 0) ++pivot;
        if (pivot == n) return Rat(0);
        if (pivot != k) {
            std::swap(a[pivot], a[k]);
            det = -det;
        }
        det *= a[k][k];
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a[i][k] == 0) continue;
            Rat factor = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= factor * a[k][j];
        }
    }
    return det;
}

/// Outcome of the exact PSD decision. On NotPSD, `witness` is an index set
/// of a principal submatrix with negative determinant and `witness_det` its
/// exact value.
struct PsdResult {
    bool psd = false;
    std::vector<std::size_t> witness;
    Rat witness_det;
};

namespace detail {

inline Rat principal_minor_det(const RatMatrix& m, const std::vector<std::size_t>& idx) {
    RatMatrix sub(idx.size(), std::vector<Rat>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) sub[i][j] = m[idx[i]][idx[j]];
    return det_exact(sub);
}

inline PsdResult not_psd(const RatMatrix& original, std::vector<std::size_t> witness) {
    std::sort(witness.begin(), witness.end());
    PsdResult r;
    r.psd = false;
    r.witness_det = principal_minor_det(original, witness);
    if (r.witness_det >= 0)
        throw std::logic_error("psd witness minor is not negative");
    r.witness = std::move(witness);
    return r;
}

}  // namespace detail

/// Decides positive semidefiniteness of a symmetric rational matrix by
/// symmetric elimination with diagonal pivoting. Zero diagonals are handled
/// semidefinitely: the matching row must vanish, otherwise a 2x2 principal
/// minor is already negative.
inline PsdResult psd_exact(const RatMatrix& input) {
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (input[i].size() != n) throw UsageError("matrix not square");
        for (std::size_t j = i + 1; j < n; ++j)
            if (input[i][j] != input[j][i]) throw UsageError("matrix not symmetric");
    }
    RatMatrix a = input;
    std::vector<std::size_t> orig(n);
    for (std::size_t i = 0; i < n; ++i) orig[i] = i;
    std::vector<std::size_t> pivots;  // original indices of positive pivots used
    for (std::size_t k = 0; k < n; ++k) {
        // Any negative Schur diagonal certifies a negative principal minor.
        for (std::size_t i = k; i < n; ++i) {
            if (a[i][i] < 0) {
                auto witness = pivots;
                witness.push_back(orig[i]);
                return detail::not_psd(input, std::move(witness));
            }
        }
        std::size_t p = k;
        while (p < n && a[p][p] == 0) ++p;
        if (p == n) {
            // All remaining diagonals vanish; PSD forces the block to vanish.
            for (std::size_t i = k; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (a[i][j] != 0) {
                        auto witness = pivots;
                        witness.push_back(orig[i]);
                        witness.push_back(orig[j]);
                        return detail::not_psd(input, std::move(witness));
                    }
            break;
        }
        if (p != k) {
            std::swap(a[p], a[k]);
            for (std::size_t i = 0; i < n; ++i) std::swap(a[i][p], a[i][k]);
            std::swap(orig[p], orig[k]);
        }
        pivots.push_back(orig[k]);
        // Schur complement; the pivot row must stay intact until every row
        // below has been eliminated against it.
        for (std::size_t i = k + 1; i < n; ++i) {
            if (a[i][k] == 0) continue;
            Rat factor = a[i][k] / a[k][k];
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= factor * a[k][j];
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            a[i][k] = 0;
            a[k][i] = 0;
        }
    }
    PsdResult r;
    r.psd = true;
    return r;
}

// ---------------------------------------------------------------------------
// Truncated Stieltjes test.
// ---------------------------------------------------------------------------

/// Verdict of the truncated Stieltjes test. Truncated data can only certify
/// the necessary conditions up to the given order, never the full property.
struct StieltjesResult {
    bool consistent = false;
    int order = 0;
    /// On rejection: which form failed and its negative principal minor.
    int failed_shift = 0;
    std::vector<std::size_t> witness;
    Rat witness_det;
};

/// Applies psd_exact to the largest plain and shifted Hankel forms the
/// truncation supports.
inline StieltjesResult stieltjes_truncated(const MomentSequence& seq) {
    if (seq.entries.empty()) throw UsageError("empty moment sequence");
    StieltjesResult out;
    out.order = seq.order();
    for (int shift = 0; shift <= 1; ++shift) {
        auto form = HankelForm::from(seq, shift);
        if (!form) continue;
        PsdResult p = psd_exact(form->matrix);
        if (!p.psd) {
            out.consistent = false;
            out.failed_shift = shift;
            out.witness = std::move(p.witness);
            out.witness_det = std::move(p.witness_det);
            return out;
        }
    }
    out.consistent = true;
    return out;
}

/// Moments of the point mass delta_t: (1, t, t^2, ..., t^N), with 0^0 = 1.
inline MomentSequence point_mass_moments(const Rat& t, int order) {
    if (t < 0) throw UsageError("point mass must sit on the nonnegative axis");
    if (order < 0) throw UsageError("negative order");
    MomentSequence seq;
    Rat power = 1;
    for (int n = 0; n <= order; ++n) {
        seq.entries.push_back(power);
        power *= t;
    }
    return seq;
}

/// Moments gamma_n = sum_k w_k t_k^n of a finite atomic measure on the
/// nonnegative axis; the brute-force source of consistent sequences.
inline MomentSequence finite_atomic_moments(const std::vector<std::pair<Rat, Rat>>& weighted_points,
                                            int order) {
    if (order < 0) throw UsageError("negative order");
    MomentSequence seq;
    seq.entries.assign(static_cast<std::size_t>(order) + 1, Rat(0));
    for (auto& [w, t] : weighted_points) {
        if (w < 0) throw UsageError("negative weight");
        if (t < 0) throw UsageError("point off the nonnegative axis");
        Rat power = 1;
        for (int n = 0; n <= order; ++n) {
            seq.entries[static_cast<std::size_t>(n)] += w * power;
            power *= t;
        }
    }
    return seq;
}

// ---------------------------------------------------------------------------
// The nonnegative-polynomial functional L(t^n) = h_{phi^n}.
// ---------------------------------------------------------------------------

/// p(t) = t |q1(t)|^2 + |q2(t)|^2, nonnegative on the half line by
/// construction; the input format for testing positivity of L.
struct PolynomialPair {
    std::vector<CRat> q1;
    std::vector<CRat> q2;

    int degree(const std::vector<CRat>& q) const {
        int d = -1;
        for (std::size_t i = 0; i < q.size(); ++i)
            if (!q[i].is_zero()) d = static_cast<int>(i);
        return d;
    }
    /// Highest power of t appearing in p.
    int max_moment_power() const {
        int d1 = degree(q1), d2 = degree(q2);
        int m = 0;
        if (d1 >= 0) m = std::max(m, 2 * d1 + 1);
        if (d2 >= 0) m = std::max(m, 2 * d2);
        return m;
    }
};

/// L(p)(x) as an exact rational: sum of q_i conj(q_j) against the h-moments
/// of x. Real by symmetry.
inline Rat functional_L_value(HEngine& eng, const PolynomialPair& pair, const AtomId& x) {
    const int top = pair.max_moment_power();
    std::vector<Rat> gamma;
    for (int n = 0; n <= top; ++n) {
        HValue h = eng.h(x, n);
        if (h.is_infinite())
            throw NotInDomain("moment h_{phi^" + std::to_string(n) + "}(" + x.str() + ") is infinite");
        gamma.push_back(h.exact_value());
    }
    auto quad = [&](const std::vector<CRat>& q, int shift) {
        Rat s = 0;
        for (std::size_t i = 0; i < q.size(); ++i)
            for (std::size_t j = 0; j < q.size(); ++j) {
                if (q[i].is_zero() || q[j].is_zero()) continue;
                CRat prod = q[i] * q[j].conj();
                s += prod.re * gamma[static_cast<std::size_t>(static_cast<int>(i + j) + shift)];
            }
        return s;
    };
    Rat value = 0;
    if (pair.degree(pair.q1) >= 0) value += quad(pair.q1, 1);
    if (pair.degree(pair.q2) >= 0) value += quad(pair.q2, 0);
    return value;
}

/// Checks L(p) >= 0 at every positive window atom. Fails carries the first
/// atom with a negative value; uncertified moments abort the scan.
inline Verdict functional_L_nonneg(HEngine& eng, const PolynomialPair& pair) {
    const int level = eng.window().level();
    const int top = pair.max_moment_power();
    for (const AtomId& x : eng.window().positive_atoms()) {
        for (int n = 0; n <= top; ++n) {
            HValue h = eng.h(x, n);
            if (h.is_infinite())
                return Verdict::fails(level, Witness{{x}, "h_{phi^" + std::to_string(n) +
                                                              "} infinite; L(t^n) has no finite value"});
            if (!h.is_exact())
                throw InconclusiveAtWindow("moment of " + x.str() + " not certified at window " +
                                           std::to_string(level));
        }
        Rat v = functional_L_value(eng, pair, x);
        if (v < 0)
            return Verdict::fails(level, Witness{{x}, "L(p)(" + x.str() + ") = " + v.str() + " < 0"});
    }
    return Verdict::holds(level, eng.space()->is_finite());
}

/// The h-moment row of one atom as a MomentSequence; requires exact finite
/// values throughout.
inline MomentSequence moment_row(HEngine& eng, const AtomId& x, int order) {
    MomentSequence seq;
    for (int n = 0; n <= order; ++n) {
        HValue h = eng.h(x, n);
        if (h.is_infinite())
            throw NotInDomain("h_{phi^" + std::to_string(n) + "}(" + x.str() + ") is infinite");
        seq.entries.push_back(h.exact_value());
    }
    return seq;
}

}  // namespace compop
