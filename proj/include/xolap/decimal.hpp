#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace xolap {

/**
 * Exact decimal arithmetic for measure values.
 *
 * A `Decimal` is mantissa * 10^-scale with a 128-bit mantissa, kept in
 * minimal form (no trailing fractional zeros, zero has scale 0).  Addition
 * and comparison are exact; the only rounding operation is `divide`, which
 * produces a fixed number of significant digits with round-half-even.
 * Integer inputs therefore aggregate with no rounding at all.
 *
 * Accepted text form: [-]digits[.digits], at most 30 digits in total.
 * No exponent notation.
 */
struct Decimal {
    __int128 mant = 0;
    int scale = 0;

    static Decimal from_int(long long v) {
        Decimal d;
        d.mant = v;
        return d;
    }

    static std::optional<Decimal> parse(std::string_view s) {
        if (s.empty()) return std::nullopt;
        bool neg = false;
        size_t i = 0;
        if (s[0] == '-') {
            neg = true;
            i = 1;
        }
        if (i >= s.size()) return std::nullopt;
        __int128 m = 0;
        int sc = 0;
        bool seen_digit = false, seen_point = false;
        int digits = 0;
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (c == '.') {
                if (seen_point || !seen_digit) return std::nullopt;
                seen_point = true;
                continue;
            }
            if (c < '0' || c > '9') return std::nullopt;
            if (++digits > 30) return std::nullopt;
            m = m * 10 + (c - '0');
            if (seen_point) ++sc;
            seen_digit = true;
        }
        if (!seen_digit) return std::nullopt;
        if (seen_point && sc == 0) return std::nullopt;  // "1." is malformed
        Decimal d;
        d.mant = neg ? -m : m;
        d.scale = sc;
        d.normalize();
        return d;
    }

    void normalize() {
        if (mant == 0) {
            scale = 0;
            return;
        }
        while (scale > 0 && mant % 10 == 0) {
            mant /= 10;
            --scale;
        }
    }

    static __int128 pow10(int n) {
        __int128 p = 1;
        while (n-- > 0) p *= 10;
        return p;
    }

    Decimal plus(const Decimal& o) const {
        Decimal r;
        if (scale == o.scale) {
            r.mant = mant + o.mant;
            r.scale = scale;
        } else if (scale > o.scale) {
            r.mant = mant + o.mant * pow10(scale - o.scale);
            r.scale = scale;
        } else {
            r.mant = mant * pow10(o.scale - scale) + o.mant;
            r.scale = o.scale;
        }
        r.normalize();
        return r;
    }

    // Three-way exact comparison: -1, 0, or 1.
    int cmp(const Decimal& o) const {
        __int128 a = mant, b = o.mant;
        if (scale > o.scale)
            b *= pow10(scale - o.scale);
        else if (o.scale > scale)
            a *= pow10(o.scale - scale);
        return a < b ? -1 : (a > b ? 1 : 0);
    }

    bool operator==(const Decimal& o) const { return cmp(o) == 0; }

    bool is_integer() const { return scale == 0; }
    bool is_zero() const { return mant == 0; }

    std::string to_string() const {
        __int128 a = mant < 0 ? -mant : mant;
        std::string digits;
        if (a == 0) digits = "0";
        while (a > 0) {
            digits.push_back(char('0' + int(a % 10)));
            a /= 10;
        }
        std::string out;
        if (mant < 0) out.push_back('-');
        if (scale == 0) {
            for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(*it);
            return out;
        }
        // Ensure at least scale+1 digits so the integer part keeps a leading 0.
        while ((int)digits.size() < scale + 1) digits.push_back('0');
        for (int i = (int)digits.size() - 1; i >= 0; --i) {
            out.push_back(digits[i]);
            if (i == scale) out.push_back('.');
        }
        return out;
    }

    /**
     * num / den rounded half-even to `sig` significant decimal digits.
     * den must be nonzero.  Exact quotients shorter than `sig` digits come
     * out exact (normalization strips the padding zeros).
     */
    static Decimal divide(const Decimal& num, const Decimal& den, int sig = 12) {
        Decimal r;
        if (num.mant == 0) return r;
        bool neg = (num.mant < 0) != (den.mant < 0);
        unsigned __int128 rem = num.mant < 0 ? -(unsigned __int128)num.mant : (unsigned __int128)num.mant;
        unsigned __int128 d = den.mant < 0 ? -(unsigned __int128)den.mant : (unsigned __int128)den.mant;
        // value = (rem / d) * 10^exp10, kept invariant through scaling below.
        int exp10 = den.scale - num.scale;
        while (rem % 10 == 0 && d % 10 == 0) {
            rem /= 10;
            d /= 10;
        }
        while (rem < d) {
            rem *= 10;
            --exp10;
        }
        while (rem / d >= 10) {
            d *= 10;
            ++exp10;
        }
        // Now 1 <= rem/d < 10; emit `sig` digits, then one look-ahead digit.
        unsigned __int128 m = 0;
        for (int i = 0; i < sig; ++i) {
            unsigned __int128 q = rem / d;
            m = m * 10 + q;
            rem = (rem - q * d) * 10;
        }
        unsigned __int128 next = rem / d;
        rem -= next * d;
        if (next > 5 || (next == 5 && rem != 0) || (next == 5 && rem == 0 && (m & 1)))
            ++m;
        __int128 cap = pow10(sig);
        if ((__int128)m >= cap) {
            m /= 10;
            ++exp10;
        }
        r.mant = neg ? -(__int128)m : (__int128)m;
        r.scale = (sig - 1) - exp10;
        if (r.scale < 0) {
            r.mant *= pow10(-r.scale);
            r.scale = 0;
        }
        r.normalize();
        return r;
    }
};

}  // namespace xolap
