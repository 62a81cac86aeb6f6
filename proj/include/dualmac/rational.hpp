#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dualmac/errors.hpp"

namespace dualmac {

// Exact rational number used for simulation time. Always normalized:
// denominator > 0, gcd(|num|, den) == 1. Intermediate products go through
// __int128 and the result must fit back into int64, which is far beyond
// anything a desk-scale run produces.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value), den_(1) {}

    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) throw InvalidParameter("Rational: zero denominator");
        __int128 n = num, d = den;
        normalize(n, d);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(__int128(a.num_) * b.den_ + __int128(b.num_) * a.den_,
                    __int128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(__int128(a.num_) * b.den_ - __int128(b.num_) * a.den_,
                    __int128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(__int128(a.num_) * b.num_, __int128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw InvalidParameter("Rational: division by zero");
        return make(__int128(a.num_) * b.den_, __int128(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        __int128 lhs = __int128(a.num_) * b.den_;
        __int128 rhs = __int128(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    // Largest integer <= value.
    std::int64_t floor() const {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }

    double to_double() const { return double(num_) / double(den_); }

    // "7/2" for non-integers, "7" otherwise. parse() accepts both forms.
    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    static Rational parse(const std::string& text) {
        try {
            auto slash = text.find('/');
            if (slash == std::string::npos) return Rational(std::stoll(text));
            std::int64_t n = std::stoll(text.substr(0, slash));
            std::int64_t d = std::stoll(text.substr(slash + 1));
            return Rational(n, d);
        } catch (const std::invalid_argument&) {
            throw ParseError("Rational: cannot parse '" + text + "'");
        } catch (const std::out_of_range&) {
            throw ParseError("Rational: out of range '" + text + "'");
        }
    }

private:
    static Rational make(__int128 n, __int128 d) {
        Rational r;
        r.normalize(n, d);
        return r;
    }

    void normalize(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 g = gcd128(a, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        constexpr __int128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi)
            throw std::overflow_error("Rational: value out of 64-bit range");
        num_ = std::int64_t(n);
        den_ = std::int64_t(d);
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

} // namespace dualmac
