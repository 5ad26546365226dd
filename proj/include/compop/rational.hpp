#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "compop/errors.hpp"

namespace compop {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Parses an exact rational from "p", "-p/q" or "p/q". Rejects zero
/// denominators and anything that is not a plain fraction literal.
inline Rat parse_rat(const std::string& text) {
    if (text.empty())
        throw ParseError("empty rational literal");
    for (char ch : text) {
        if (!(std::isdigit(static_cast<unsigned char>(ch)) || ch == '/' || ch == '-' || ch == '+'))
            throw ParseError("invalid rational literal: '" + text + "'");
    }
    try {
        return Rat(text);
    } catch (const std::exception& e) {
        throw ParseError("invalid rational literal: '" + text + "' (" + e.what() + ")");
    }
}

/// Canonical string form: "p" when the denominator is 1, else "p/q".
inline std::string format_rat(const Rat& r) { return r.str(); }

// ---------------------------------------------------------------------------
// Extended nonnegative-or-any rationals: a finite value or +infinity.
// ---------------------------------------------------------------------------

class ExtRat {
public:
    ExtRat() : finite_(0), infinite_(false) {}
    ExtRat(Rat value) : finite_(std::move(value)), infinite_(false) {}
    ExtRat(int value) : finite_(value), infinite_(false) {}

    static ExtRat infinity() {
        ExtRat e;
        e.infinite_ = true;
        return e;
    }

    bool is_infinite() const { return infinite_; }
    const Rat& finite() const {
        if (infinite_)
            throw std::logic_error("finite() on infinite extended rational");
        return finite_;
    }

    friend bool operator==(const ExtRat& a, const ExtRat& b) {
        if (a.infinite_ != b.infinite_) return false;
        return a.infinite_ || a.finite_ == b.finite_;
    }
    friend bool operator!=(const ExtRat& a, const ExtRat& b) { return !(a == b); }
    friend bool operator<(const ExtRat& a, const ExtRat& b) {
        if (a.infinite_) return false;
        if (b.infinite_) return true;
        return a.finite_ < b.finite_;
    }
    friend bool operator<=(const ExtRat& a, const ExtRat& b) { return a < b || a == b; }

    friend ExtRat operator+(const ExtRat& a, const ExtRat& b) {
        if (a.infinite_ || b.infinite_) return infinity();
        return ExtRat(a.finite_ + b.finite_);
    }

    /// Product with the measure-theoretic convention left open: 0 * inf is
    /// indeterminate and must be handled by the caller.
    static std::optional<ExtRat> checked_mul(const ExtRat& a, const ExtRat& b) {
        const bool a_zero = !a.infinite_ && a.finite_ == 0;
        const bool b_zero = !b.infinite_ && b.finite_ == 0;
        if ((a.infinite_ && b_zero) || (b.infinite_ && a_zero))
            return std::nullopt;
        if (a.infinite_ || b.infinite_) return infinity();
        return ExtRat(a.finite_ * b.finite_);
    }

    std::string str() const { return infinite_ ? "inf" : finite_.str(); }

private:
    Rat finite_;
    bool infinite_;
};

// ---------------------------------------------------------------------------
// Complex numbers with exact rational parts.
// ---------------------------------------------------------------------------

struct CRat {
    Rat re;
    Rat im;

    CRat() = default;
    CRat(Rat real) : re(std::move(real)) {}
    CRat(Rat real, Rat imag) : re(std::move(real)), im(std::move(imag)) {}
    CRat(int real) : re(real) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    CRat conj() const { return CRat(re, -im); }
    Rat norm_sq() const { return re * re + im * im; }

    friend CRat operator+(const CRat& a, const CRat& b) { return CRat(a.re + b.re, a.im + b.im); }
    friend CRat operator-(const CRat& a, const CRat& b) { return CRat(a.re - b.re, a.im - b.im); }
    friend CRat operator-(const CRat& a) { return CRat(-a.re, -a.im); }
    friend CRat operator*(const CRat& a, const CRat& b) {
        return CRat(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
    }
    friend CRat operator*(const Rat& s, const CRat& a) { return CRat(s * a.re, s * a.im); }
    friend CRat operator/(const CRat& a, const Rat& s) {
        if (s == 0) throw std::domain_error("division by zero rational");
        return CRat(a.re / s, a.im / s);
    }
    friend bool operator==(const CRat& a, const CRat& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const CRat& a, const CRat& b) { return !(a == b); }

    std::string str() const {
        if (im == 0) return re.str();
        return re.str() + (im < 0 ? "-" : "+") + Rat(boost::multiprecision::abs(im)).str() + "i";
    }
};

}  // namespace compop
