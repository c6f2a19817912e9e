#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace solitary {

static_assert(sizeof(unsigned long) == sizeof(std::uint64_t),
              "solitary assumes an LP64 platform (unsigned long is 64 bits)");

using BigInt = mpz_class;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline BigInt big(u64 v) { return BigInt(static_cast<unsigned long>(v)); }

inline bool fits_u64(const BigInt& v) { return sgn(v) >= 0 && mpz_fits_ulong_p(v.get_mpz_t()); }

inline std::optional<u64> as_u64(const BigInt& v) {
    if (!fits_u64(v)) return std::nullopt;
    return static_cast<u64>(mpz_get_ui(v.get_mpz_t()));
}

inline u64 to_u64(const BigInt& v) {
    auto r = as_u64(v);
    if (!r) throw std::out_of_range("integer " + v.get_str() + " does not fit in 64 bits");
    return *r;
}

inline std::size_t bit_length(const BigInt& v) {
    return sgn(v) == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2);
}

/// Parses a non-negative decimal integer. Rejects signs, spaces and empty input.
inline BigInt parse_bigint(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty integer");
    for (char c : text)
        if (c < '0' || c > '9') throw std::invalid_argument("not a decimal integer: '" + std::string(text) + "'");
    return BigInt(std::string(text), 10);
}

/// Reduced non-negative fraction. Every value is kept canonical, so equality is structural.
class ExactRatio {
public:
    ExactRatio() : value_(0) {}
    ExactRatio(const BigInt& numerator, const BigInt& denominator = 1) {
        if (sgn(denominator) == 0) throw std::domain_error("zero denominator");
        value_ = mpq_class(numerator, denominator);
        value_.canonicalize();
        if (sgn(value_) < 0) throw std::domain_error("ExactRatio is non-negative");
    }
    static ExactRatio from(u64 num, u64 den = 1) { return ExactRatio(big(num), big(den)); }

    BigInt numerator() const { return value_.get_num(); }
    BigInt denominator() const { return value_.get_den(); }

    ExactRatio& operator*=(const ExactRatio& o) {
        value_ *= o.value_;
        return *this;
    }
    ExactRatio& operator/=(const ExactRatio& o) {
        if (sgn(o.value_) == 0) throw std::domain_error("division by zero ratio");
        value_ /= o.value_;
        return *this;
    }
    friend ExactRatio operator*(ExactRatio a, const ExactRatio& b) { return a *= b; }
    friend ExactRatio operator/(ExactRatio a, const ExactRatio& b) { return a /= b; }

    friend bool operator==(const ExactRatio& a, const ExactRatio& b) { return cmp(a.value_, b.value_) == 0; }
    friend std::strong_ordering operator<=>(const ExactRatio& a, const ExactRatio& b) {
        int c = cmp(a.value_, b.value_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    std::string to_string() const { return numerator().get_str() + "/" + denominator().get_str(); }
    /// Approximate rendering only; never used for decisions.
    double approx() const { return value_.get_d(); }
    friend std::ostream& operator<<(std::ostream& os, const ExactRatio& r) { return os << r.to_string(); }

    /// Parses "num/den" or a bare integer.
    static ExactRatio parse(std::string_view text) {
        auto slash = text.find('/');
        if (slash == std::string_view::npos) return ExactRatio(parse_bigint(text));
        return ExactRatio(parse_bigint(text.substr(0, slash)), parse_bigint(text.substr(slash + 1)));
    }

private:
    mpq_class value_;
};

/// The abundancy index of 10, the value a friend of 10 must attain.
inline ExactRatio ten_abundancy() { return ExactRatio::from(9, 5); }

} // namespace solitary
