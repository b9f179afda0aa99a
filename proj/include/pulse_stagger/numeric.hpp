#pragma once

// Exact arithmetic foundation: integer microsecond ticks for time and
// arbitrary-precision rationals for current, voltage, power and ratios.

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "pulse_stagger/error.hpp"

namespace pulse_stagger {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::int64_t kTicksPerSecond = 1'000'000;

/// A count of 1-microsecond units.
class Tick {
public:
    constexpr Tick() = default;
    constexpr explicit Tick(std::int64_t count) : count_(count) {}

    [[nodiscard]] constexpr std::int64_t count() const noexcept { return count_; }

    constexpr auto operator<=>(const Tick&) const = default;

    constexpr Tick& operator+=(Tick other) noexcept { count_ += other.count_; return *this; }
    constexpr Tick& operator-=(Tick other) noexcept { count_ -= other.count_; return *this; }

    friend constexpr Tick operator+(Tick a, Tick b) noexcept { return Tick{a.count_ + b.count_}; }
    friend constexpr Tick operator-(Tick a, Tick b) noexcept { return Tick{a.count_ - b.count_}; }
    friend constexpr Tick operator*(Tick a, std::int64_t k) noexcept { return Tick{a.count_ * k}; }
    friend constexpr Tick operator*(std::int64_t k, Tick a) noexcept { return Tick{a.count_ * k}; }

    /// Non-negative residue, so phases always land in [0, modulus).
    [[nodiscard]] constexpr Tick mod(Tick modulus) const noexcept {
        const std::int64_t r = count_ % modulus.count_;
        return Tick{r < 0 ? r + modulus.count_ : r};
    }

private:
    std::int64_t count_ = 0;
};

inline Rational to_rational(Tick t) { return Rational(t.count()); }

inline Rational to_seconds(Tick t) { return Rational(t.count(), kTicksPerSecond); }

/// Exact conversion; fails rather than rounds.
inline Tick ticks_from_seconds(const Rational& seconds) {
    const Rational scaled = seconds * kTicksPerSecond;
    if (denominator(scaled) != 1) {
        throw Error(Errc::NonRepresentableTime,
                    "time " + seconds.str() + " s is not a whole number of microseconds");
    }
    const BigInt n = numerator(scaled);
    if (n > std::numeric_limits<std::int64_t>::max() || n < std::numeric_limits<std::int64_t>::min()) {
        throw Error(Errc::Overflow, "time " + seconds.str() + " s exceeds the tick range");
    }
    return Tick{n.convert_to<std::int64_t>()};
}

inline std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
    const std::int64_t g = std::gcd(a, b);
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a / g, b, &out)) {
        throw Error(Errc::Overflow, "least common multiple of " + std::to_string(a) + " and " +
                                        std::to_string(b) + " exceeds the tick range");
    }
    return out;
}

/// Parses "12", "-0.65", "1.5e-3" exactly. Returns nullopt on malformed text.
inline std::optional<Rational> parse_decimal(std::string_view text) {
    std::size_t pos = 0;
    bool negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        negative = text[pos] == '-';
        ++pos;
    }
    BigInt digits = 0;
    std::int64_t scale = 0;
    bool any_digit = false;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        digits = digits * 10 + (text[pos] - '0');
        any_digit = true;
        ++pos;
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            digits = digits * 10 + (text[pos] - '0');
            ++scale;
            any_digit = true;
            ++pos;
        }
    }
    if (!any_digit) return std::nullopt;
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        bool exp_negative = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            exp_negative = text[pos] == '-';
            ++pos;
        }
        std::int64_t exponent = 0;
        bool exp_digit = false;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            exponent = exponent * 10 + (text[pos] - '0');
            if (exponent > 4000) return std::nullopt;
            exp_digit = true;
            ++pos;
        }
        if (!exp_digit) return std::nullopt;
        scale += exp_negative ? exponent : -exponent;
    }
    if (pos != text.size()) return std::nullopt;

    Rational value(digits);
    if (scale > 0) {
        value /= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(scale)));
    } else if (scale < 0) {
        value *= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-scale)));
    }
    return negative ? Rational(-value) : value;
}

/// Decimal text rounded half away from zero to at most `max_digits`
/// fractional digits, trailing zeros trimmed.
inline std::string format_decimal(const Rational& value, unsigned max_digits = 6) {
    const BigInt scale = boost::multiprecision::pow(BigInt(10), max_digits);
    const Rational scaled = abs(value) * scale;
    BigInt q = numerator(scaled) / denominator(scaled);
    const BigInt r = numerator(scaled) % denominator(scaled);
    if (2 * r >= denominator(scaled)) q += 1;
    const bool negative = value < 0 && q != 0;

    std::string whole = BigInt(q / scale).str();
    std::string frac = BigInt(q % scale).str();
    if (max_digits > 0) {
        frac.insert(0, max_digits - frac.size(), '0');
        while (!frac.empty() && frac.back() == '0') frac.pop_back();
    } else {
        frac.clear();
    }
    std::string out = negative ? "-" : "";
    out += whole;
    if (!frac.empty()) out += "." + frac;
    return out;
}

/// True when the value has a terminating decimal form within `max_digits`.
inline bool is_exact_decimal(const Rational& value, unsigned max_digits = 6) {
    const Rational scaled = value * Rational(boost::multiprecision::pow(BigInt(10), max_digits));
    return denominator(scaled) == 1;
}

inline BigInt ceil_integer(const Rational& value) {
    BigInt q = numerator(value) / denominator(value);
    if (q * denominator(value) < numerator(value)) q += 1;
    return q;
}

}  // namespace pulse_stagger
