#pragma once

#include <cctype>
#include <cmath>
#include <compare>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <gmpxx.h>

#include "slowvary/error.hpp"

namespace slowvary {

/// Exact rational scalar for golden-value runs. Wraps GMP's mpq_class without
/// exposing its expression templates, so it can serve as an Eigen scalar.
class Rational {
public:
    Rational() = default;
    Rational(int v) : q_(v) {}
    Rational(long v) : q_(v) {}
    Rational(long long v) : q_(static_cast<long>(v)) {}
    Rational(long num, long den)
    {
        if (den == 0)
            fail(ErrorKind::InvalidArgument, "rational with zero denominator");
        q_ = mpq_class(num, den);
        q_.canonicalize();
    }
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    /// Exact binary value of a double.
    static Rational from_double(double v)
    {
        if (!std::isfinite(v))
            fail(ErrorKind::InvalidArgument, "non-finite value cannot be made rational");
        return Rational(mpq_class(v));
    }

    /// Accepts "p", "p/q", and decimal or scientific notation ("-0.125", "1e-3").
    static Rational parse(std::string_view text)
    {
        std::string s(text);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
            s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            s.pop_back();
        if (s.empty())
            fail(ErrorKind::Parse, "empty numeric string");
        if (auto slash = s.find('/'); slash != std::string::npos) {
            Rational num = parse_decimal(s.substr(0, slash));
            Rational den = parse_decimal(s.substr(slash + 1));
            if (den.is_zero())
                fail(ErrorKind::Parse, "zero denominator in '" + s + "'");
            return num / den;
        }
        return parse_decimal(s);
    }

    bool is_zero() const { return sgn(q_) == 0; }
    int sign() const { return sgn(q_); }
    double to_double() const { return q_.get_d(); }
    const mpq_class& value() const noexcept { return q_; }

    /// "p/q", or "p" for integers.
    std::string str() const { return q_.get_str(); }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
    friend Rational operator/(const Rational& a, const Rational& b)
    {
        if (b.is_zero())
            fail(ErrorKind::InvalidArgument, "rational division by zero");
        return Rational(mpq_class(a.q_ / b.q_));
    }
    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational operator+() const { return *this; }

    Rational& operator+=(const Rational& b) { q_ += b.q_; return *this; }
    Rational& operator-=(const Rational& b) { q_ -= b.q_; return *this; }
    Rational& operator*=(const Rational& b) { q_ *= b.q_; return *this; }
    Rational& operator/=(const Rational& b) { *this = *this / b; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b)
    {
        return cmp(a.q_, b.q_) <=> 0;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    static Rational parse_decimal(const std::string& s)
    {
        // [sign] digits [. digits] [e|E [sign] digits]
        size_t i = 0;
        bool negative = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-'))
            negative = s[i++] == '-';
        std::string digits;
        long frac_digits = 0;
        bool seen_point = false, any_digit = false;
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits += c;
                any_digit = true;
                if (seen_point)
                    ++frac_digits;
            } else if (c == '.' && !seen_point) {
                seen_point = true;
            } else {
                break;
            }
        }
        long exponent = 0;
        if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
            ++i;
            char* end = nullptr;
            std::string rest = s.substr(i);
            exponent = std::strtol(rest.c_str(), &end, 10);
            if (rest.empty() || end != rest.c_str() + rest.size())
                fail(ErrorKind::Parse, "malformed exponent in '" + s + "'");
            i = s.size();
        }
        if (!any_digit || i != s.size())
            fail(ErrorKind::Parse, "malformed number '" + s + "'");
        mpz_class mantissa(digits, 10);
        mpq_class value(mantissa);
        const long shift = exponent - frac_digits;
        mpz_class ten_pow;
        mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
        if (shift >= 0)
            value *= ten_pow;
        else
            value /= ten_pow;
        if (negative)
            value = -value;
        return Rational(value);
    }

    mpq_class q_;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
inline Rational abs2(const Rational& r) { return r * r; }
inline const Rational& conj(const Rational& r) { return r; }
inline const Rational& real(const Rational& r) { return r; }
inline Rational imag(const Rational&) { return Rational(0); }
// Only reached through Eigen norm helpers; exact code paths avoid it.
inline Rational sqrt(const Rational& r) { return Rational::from_double(std::sqrt(r.to_double())); }

} // namespace slowvary

namespace Eigen {

template <>
struct NumTraits<slowvary::Rational> : GenericNumTraits<slowvary::Rational> {
    using Real = slowvary::Rational;
    using NonInteger = slowvary::Rational;
    using Nested = slowvary::Rational;
    using Literal = slowvary::Rational;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 10,
        MulCost = 10
    };
    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }
    static inline Real highest() { return Real(std::numeric_limits<long>::max()); }
    static inline Real lowest() { return -highest(); }
};

} // namespace Eigen
