#pragma once

#include <cmath>
#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "calm/error.hpp"

namespace calm {

/// Exact fixed-point decimal: a signed 128-bit mantissa with 18 fractional digits.
///
/// Addition and subtraction are exact. Multiplication and division are rounded
/// half-to-even at the 18th fractional digit. Every overflow throws DomainError;
/// nothing wraps silently. Range is roughly +/-1.7e20, far above any balance
/// sheet this library deals with.
class Decimal {
public:
    __extension__ using rep = __int128;
    static constexpr int kScale = 18;
    static constexpr rep kOne = 1'000'000'000'000'000'000;

    constexpr Decimal() = default;

    template <std::integral I>
    constexpr Decimal(I units) : raw_(rep(units) * kOne) {}  // NOLINT(google-explicit-constructor)

    Decimal(double) = delete;
    Decimal(float) = delete;

    static constexpr Decimal from_raw(rep raw) {
        Decimal d;
        d.raw_ = raw;
        return d;
    }

    /// Parses `[-]digits[.digits]` with at most 18 fractional digits. No exponent,
    /// no whitespace, no leading '+'.
    static Decimal parse(std::string_view text);

    /// Converts a binary double, rounding half-to-even at `places` fractional digits.
    /// Used only at the boundary of the floating-point simulation kernel.
    static Decimal from_double(double x, int places);

    constexpr rep raw() const { return raw_; }

    /// Shortest exact representation ("12.5", "-3", "0.005136").
    std::string to_string() const;

    /// Fixed number of fractional digits, rounded half-to-even.
    std::string to_fixed(int places) const;

    Decimal round(int places) const;
    double to_double() const { return static_cast<double>(raw_) / 1e18; }

    constexpr bool is_zero() const { return raw_ == 0; }
    constexpr bool is_negative() const { return raw_ < 0; }
    constexpr Decimal abs() const { return from_raw(raw_ < 0 ? -raw_ : raw_); }

    friend constexpr auto operator<=>(const Decimal&, const Decimal&) = default;
    friend constexpr bool operator==(const Decimal&, const Decimal&) = default;

    friend Decimal operator+(Decimal a, Decimal b) {
        rep out;
        if (__builtin_add_overflow(a.raw_, b.raw_, &out)) throw DomainError("decimal overflow in addition");
        return from_raw(out);
    }
    friend Decimal operator-(Decimal a, Decimal b) {
        rep out;
        if (__builtin_sub_overflow(a.raw_, b.raw_, &out)) throw DomainError("decimal overflow in subtraction");
        return from_raw(out);
    }
    friend constexpr Decimal operator-(Decimal a) { return from_raw(-a.raw_); }
    friend Decimal operator*(Decimal a, Decimal b);
    friend Decimal operator/(Decimal a, Decimal b);

    Decimal& operator+=(Decimal o) { return *this = *this + o; }
    Decimal& operator-=(Decimal o) { return *this = *this - o; }
    Decimal& operator*=(Decimal o) { return *this = *this * o; }
    Decimal& operator/=(Decimal o) { return *this = *this / o; }

    friend std::ostream& operator<<(std::ostream& os, const Decimal& d) { return os << d.to_string(); }

private:
    rep raw_ = 0;
};

/// Money in USD. Same representation as every other decimal quantity; the alias
/// documents intent at API boundaries.
using Money = Decimal;
/// A ratio, usually in [0, 1].
using Fraction = Decimal;

namespace detail {

__extension__ using urep = unsigned __int128;

inline constexpr urep pow10(int n) {
    urep r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

inline constexpr urep kUOne = static_cast<urep>(Decimal::kOne);
inline constexpr urep kMaxMagnitude = static_cast<urep>(std::numeric_limits<Decimal::rep>::max());

inline urep magnitude(Decimal::rep v) { return v < 0 ? urep(0) - urep(v) : urep(v); }

inline Decimal::rep apply_sign(urep mag, bool negative, const char* op) {
    if (mag > kMaxMagnitude) throw DomainError(std::string("decimal overflow in ") + op);
    auto v = static_cast<Decimal::rep>(mag);
    return negative ? -v : v;
}

/// Rounds q + rem/den half-to-even; rem < den.
inline urep round_half_even(urep q, urep rem, urep den) {
    const urep other = den - rem;
    if (rem > other || (rem == other && (q & 1u))) ++q;
    return q;
}

inline void checked_mul(urep a, urep b, urep& out, const char* op) {
    if (__builtin_mul_overflow(a, b, &out)) throw DomainError(std::string("decimal overflow in ") + op);
}
inline void checked_add(urep a, urep b, urep& out, const char* op) {
    if (__builtin_add_overflow(a, b, &out)) throw DomainError(std::string("decimal overflow in ") + op);
}

inline std::string urep_to_string(urep v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

}  // namespace detail

inline Decimal operator*(Decimal a, Decimal b) {
    using namespace detail;
    const bool negative = (a.raw_ < 0) != (b.raw_ < 0);
    const urep ua = magnitude(a.raw_), ub = magnitude(b.raw_);
    const urep a_hi = ua / kUOne, a_lo = ua % kUOne;
    const urep b_hi = ub / kUOne, b_lo = ub % kUOne;

    // (a_hi*S + a_lo)(b_hi*S + b_lo)/S = a_hi*b_hi*S + a_hi*b_lo + a_lo*b_hi + a_lo*b_lo/S
    urep acc, t;
    checked_mul(a_hi, b_hi, t, "multiplication");
    checked_mul(t, kUOne, acc, "multiplication");
    checked_mul(a_hi, b_lo, t, "multiplication");
    checked_add(acc, t, acc, "multiplication");
    checked_mul(a_lo, b_hi, t, "multiplication");
    checked_add(acc, t, acc, "multiplication");
    const urep low = a_lo * b_lo;  // < 1e36, cannot overflow
    checked_add(acc, low / kUOne, acc, "multiplication");
    acc = round_half_even(acc, low % kUOne, kUOne);
    const auto r = Decimal::from_raw(apply_sign(acc, negative, "multiplication"));
    return r;
}

inline Decimal operator/(Decimal a, Decimal b) {
    using namespace detail;
    if (b.raw_ == 0) throw DomainError("decimal division by zero");
    const bool negative = (a.raw_ < 0) != (b.raw_ < 0);
    const urep ua = magnitude(a.raw_), ub = magnitude(b.raw_);

    urep q = ua / ub;
    urep r = ua % ub;
    checked_mul(q, kUOne, q, "division");
    // Long division for the 18 fractional digits.
    urep frac = 0;
    for (int i = 0; i < Decimal::kScale; ++i) {
        checked_mul(r, 10, r, "division");
        frac = frac * 10 + r / ub;
        r %= ub;
    }
    checked_add(q, frac, q, "division");
    q = round_half_even(q, r, ub);
    return Decimal::from_raw(apply_sign(q, negative, "division"));
}

inline Decimal Decimal::parse(std::string_view text) {
    using namespace detail;
    const std::string original(text);
    auto fail = [&](const char* why) -> Decimal {
        throw DomainError("malformed decimal '" + original + "': " + why);
    };
    if (text.empty()) return fail("empty");
    bool negative = false;
    if (text.front() == '-') {
        negative = true;
        text.remove_prefix(1);
    }
    const auto dot = text.find('.');
    const std::string_view int_part = text.substr(0, dot);
    const std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (int_part.empty()) return fail("missing integer digits");
    if (dot != std::string_view::npos && frac_part.empty()) return fail("missing fractional digits");
    if (frac_part.size() > static_cast<std::size_t>(kScale)) return fail("more than 18 fractional digits");

    urep mag = 0;
    for (char c : int_part) {
        if (c < '0' || c > '9') return fail("unexpected character");
        if (__builtin_mul_overflow(mag, urep(10), &mag) || __builtin_add_overflow(mag, urep(c - '0'), &mag))
            return fail("out of range");
    }
    urep frac = 0;
    for (char c : frac_part) {
        if (c < '0' || c > '9') return fail("unexpected character");
        frac = frac * 10 + urep(c - '0');
    }
    frac *= pow10(kScale - static_cast<int>(frac_part.size()));
    if (__builtin_mul_overflow(mag, kUOne, &mag) || __builtin_add_overflow(mag, frac, &mag) || mag > kMaxMagnitude)
        return fail("out of range");
    auto v = static_cast<rep>(mag);
    return from_raw(negative ? -v : v);
}

inline Decimal Decimal::from_double(double x, int places) {
    if (!std::isfinite(x)) throw DomainError("non-finite value cannot become a decimal");
    if (places < 0 || places > 12) throw DomainError("from_double supports 0..12 places");
    const long double scaled = std::nearbyint(static_cast<long double>(x) * static_cast<long double>(detail::pow10(places)));
    if (std::fabs(scaled) > 1e30L) throw DomainError("decimal overflow converting double");
    const auto units = static_cast<rep>(scaled);
    rep out;
    if (__builtin_mul_overflow(units, static_cast<rep>(detail::pow10(kScale - places)), &out))
        throw DomainError("decimal overflow converting double");
    return from_raw(out);
}

inline Decimal Decimal::round(int places) const {
    using namespace detail;
    if (places >= kScale) return *this;
    if (places < 0) throw DomainError("negative rounding places");
    const urep unit = pow10(kScale - places);
    const urep mag = magnitude(raw_);
    urep q = round_half_even(mag / unit, mag % unit, unit);
    checked_mul(q, unit, q, "rounding");
    return from_raw(apply_sign(q, raw_ < 0, "rounding"));
}

inline std::string Decimal::to_fixed(int places) const {
    using namespace detail;
    if (places < 0 || places > kScale) throw DomainError("to_fixed places out of range");
    const Decimal r = round(places);
    const urep mag = magnitude(r.raw_);
    std::string out = r.raw_ < 0 ? "-" : "";
    out += urep_to_string(mag / kUOne);
    if (places > 0) {
        std::string frac = urep_to_string((mag % kUOne) / pow10(kScale - places));
        out += '.';
        out.append(static_cast<std::size_t>(places) - frac.size(), '0');
        out += frac;
    }
    return out;
}

inline std::string Decimal::to_string() const {
    std::string s = to_fixed(kScale);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

/// Rounds money to whole cents, half-to-even.
inline Money round_cents(Money m) { return m.round(2); }

inline Decimal clamp_unit(Decimal f) {
    if (f < Decimal(0)) return Decimal(0);
    if (f > Decimal(1)) return Decimal(1);
    return f;
}

}  // namespace calm
