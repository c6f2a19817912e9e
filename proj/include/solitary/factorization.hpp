#pragma once

#include "primes.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace solitary {

struct FactorOptions {
    /// Total Pollard-rho iterations allowed for one factorize() call.
    u64 rho_budget = u64{1} << 24;
    int primality_rounds = default_primality_rounds;
};

class FactorBudgetExceeded : public std::runtime_error {
public:
    FactorBudgetExceeded(const BigInt& n, u64 budget)
        : std::runtime_error("factorization budget of " + std::to_string(budget) + " rho iterations exhausted on " +
                             n.get_str()),
          composite(n) {}
    BigInt composite;
};

struct PrimePower {
    BigInt prime;
    u64 exponent = 0;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

class Factorization {
public:
    Factorization() = default;

    /// Sorts and merges the pairs; rejects non-prime bases and zero exponents.
    static Factorization from_pairs(std::vector<PrimePower> pairs, int rounds = default_primality_rounds) {
        for (const auto& pp : pairs) {
            if (pp.exponent == 0) throw std::invalid_argument("zero exponent for " + pp.prime.get_str());
            if (!is_prime(pp.prime, rounds)) throw std::invalid_argument(pp.prime.get_str() + " is not prime");
        }
        Factorization f;
        f.factors_ = merge(std::move(pairs));
        return f;
    }
    static Factorization from_pairs(std::initializer_list<std::pair<u64, u64>> pairs) {
        std::vector<PrimePower> v;
        for (auto [p, e] : pairs) v.push_back({big(p), e});
        return from_pairs(std::move(v));
    }
    /// Trusted construction for already-validated data (internal use).
    static Factorization from_sorted_unchecked(std::vector<PrimePower> pairs) {
        Factorization f;
        f.factors_ = std::move(pairs);
        return f;
    }

    const std::vector<PrimePower>& factors() const { return factors_; }
    bool empty() const { return factors_.empty(); }
    std::size_t omega() const { return factors_.size(); }
    u64 big_omega() const {
        u64 s = 0;
        for (const auto& pp : factors_) s += pp.exponent;
        return s;
    }
    u64 exponent_of(const BigInt& p) const {
        for (const auto& pp : factors_)
            if (pp.prime == p) return pp.exponent;
        return 0;
    }
    bool contains(const BigInt& p) const { return exponent_of(p) != 0; }

    BigInt value() const {
        BigInt v = 1;
        for (const auto& pp : factors_) v *= pow(pp.prime, pp.exponent);
        return v;
    }

    Factorization operator*(const Factorization& o) const {
        std::vector<PrimePower> all = factors_;
        all.insert(all.end(), o.factors_.begin(), o.factors_.end());
        return from_sorted_unchecked(merge(std::move(all)));
    }
    Factorization raised(u64 k) const {
        Factorization r = *this;
        for (auto& pp : r.factors_) pp.exponent *= k;
        return r;
    }

    std::string to_string() const {
        if (factors_.empty()) return "1";
        std::string s;
        for (const auto& pp : factors_) {
            if (!s.empty()) s += '*';
            s += pp.prime.get_str();
            if (pp.exponent != 1) s += "^" + std::to_string(pp.exponent);
        }
        return s;
    }

    /// Accepts "360", "5^2*7^4*11^2" or "2^3*45"; composite bases are factorized.
    static Factorization parse(std::string_view text, const FactorOptions& opts = {});

    friend bool operator==(const Factorization&, const Factorization&) = default;

private:
    static std::vector<PrimePower> merge(std::vector<PrimePower> v) {
        std::sort(v.begin(), v.end(), [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
        std::vector<PrimePower> out;
        for (auto& pp : v) {
            if (!out.empty() && out.back().prime == pp.prime)
                out.back().exponent += pp.exponent;
            else
                out.push_back(std::move(pp));
        }
        return out;
    }

    std::vector<PrimePower> factors_;
};

namespace detail {

struct Budget {
    u64 remaining;
    bool take(u64 n) {
        if (remaining < n) {
            remaining = 0;
            return false;
        }
        remaining -= n;
        return true;
    }
};

/// Brent's cycle-finding rho on 64-bit n. Returns a non-trivial factor, or 0 on budget exhaustion.
inline u64 rho_u64(u64 n, Budget& budget) {
    if (n % 2 == 0) return 2;
    constexpr u64 batch = 128;
    for (u64 c = 1;; ++c) {
        auto f = [&](u64 x) {
            u64 y = mul_mod(x, x, n) + c;
            return (y < c || y >= n) ? y - n : y;
        };
        u64 y = 2, x = 2, ys = 2, q = 1, g = 1;
        for (u64 r = 1; g == 1; r <<= 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) y = f(y);
            for (u64 k = 0; k < r && g == 1; k += batch) {
                ys = y;
                u64 steps = std::min(batch, r - k);
                if (!budget.take(steps)) return 0;
                for (u64 i = 0; i < steps; ++i) {
                    y = f(y);
                    q = mul_mod(q, x > y ? x - y : y - x, n);
                }
                g = std::gcd(q, n);
            }
        }
        if (g == n) {
            do {
                ys = f(ys);
                g = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

/// Same algorithm on arbitrary-precision n. Returns a non-trivial factor, or 0 on budget exhaustion.
inline BigInt rho_big(const BigInt& n, Budget& budget) {
    constexpr u64 batch = 128;
    BigInt x, y, ys, q, g, diff;
    for (unsigned long c = 1;; ++c) {
        auto f = [&](BigInt& v) {
            mpz_mul(v.get_mpz_t(), v.get_mpz_t(), v.get_mpz_t());
            mpz_add_ui(v.get_mpz_t(), v.get_mpz_t(), c);
            mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
        };
        y = 2;
        x = 2;
        q = 1;
        g = 1;
        for (u64 r = 1; g == 1; r <<= 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) f(y);
            for (u64 k = 0; k < r && g == 1; k += batch) {
                ys = y;
                u64 steps = std::min(batch, r - k);
                if (!budget.take(steps)) return 0;
                for (u64 i = 0; i < steps; ++i) {
                    f(y);
                    mpz_sub(diff.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
                    mpz_mul(q.get_mpz_t(), q.get_mpz_t(), diff.get_mpz_t());
                    mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            }
        }
        if (g == n) {
            do {
                f(ys);
                diff = x - ys;
                mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

/// Returns (root, k) with n = root^k and k maximal, or (n, 1).
inline std::pair<BigInt, u64> perfect_power(const BigInt& n) {
    if (n < 4 || !mpz_perfect_power_p(n.get_mpz_t())) return {n, 1};
    std::size_t bits = bit_length(n);
    for (u64 k = bits; k >= 2; --k) {
        BigInt root;
        if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) return {root, k};
    }
    return {n, 1};
}

inline void add_factor(std::map<BigInt, u64>& acc, const BigInt& p, u64 e) { acc[p] += e; }

/// Splits a cofactor with no small prime factors. Composites that outlast the budget go to `stuck`.
inline void split(const BigInt& n, u64 mult, std::map<BigInt, u64>& acc, std::vector<std::pair<BigInt, u64>>& stuck,
                  Budget& budget, int rounds) {
    if (n == 1) return;
    if (is_prime(n, rounds)) {
        add_factor(acc, n, mult);
        return;
    }
    auto [root, k] = perfect_power(n);
    if (k > 1) {
        split(root, mult * k, acc, stuck, budget, rounds);
        return;
    }
    BigInt d;
    if (auto small = as_u64(n)) {
        u64 r = rho_u64(*small, budget);
        if (r == 0) {
            stuck.emplace_back(n, mult);
            return;
        }
        d = big(r);
    } else {
        d = rho_big(n, budget);
        if (d == 0) {
            stuck.emplace_back(n, mult);
            return;
        }
    }
    BigInt other = n / d;
    BigInt g = gcd(d, other);
    if (g == 1) {
        split(d, mult, acc, stuck, budget, rounds);
        split(other, mult, acc, stuck, budget, rounds);
        return;
    }
    // Shared factor: peel g out of n completely before continuing.
    BigInt rest = n;
    u64 times = 0;
    while (rest % g == 0) {
        rest /= g;
        ++times;
    }
    split(g, mult * times, acc, stuck, budget, rounds);
    split(rest, mult, acc, stuck, budget, rounds);
}

struct RawFactorization {
    std::map<BigInt, u64> primes;
    std::vector<std::pair<BigInt, u64>> stuck;
};

inline RawFactorization factor_raw(const BigInt& input, const FactorOptions& opts) {
    if (sgn(input) <= 0) throw std::domain_error("factorize: input must be positive, got " + input.get_str());
    RawFactorization raw;
    BigInt n = input;
    for (u64 p : small_primes()) {
        if (n == 1) break;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            u64 e = 0;
            while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
                mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
                ++e;
            }
            raw.primes[big(p)] += e;
        }
        BigInt pp = big(p) * big(p);
        if (pp > n) {
            if (n > 1) {
                raw.primes[n] += 1;
                n = 1;
            }
            break;
        }
    }
    Budget budget{opts.rho_budget};
    split(n, 1, raw.primes, raw.stuck, budget, opts.primality_rounds);
    return raw;
}

inline Factorization to_factorization(const std::map<BigInt, u64>& m) {
    std::vector<PrimePower> v;
    v.reserve(m.size());
    for (const auto& [p, e] : m) v.push_back({p, e});
    return Factorization::from_sorted_unchecked(std::move(v));
}

} // namespace detail

/// Complete factorization. Throws FactorBudgetExceeded rather than return a partial answer.
inline Factorization factorize(const BigInt& n, const FactorOptions& opts = {}) {
    auto raw = detail::factor_raw(n, opts);
    if (!raw.stuck.empty()) throw FactorBudgetExceeded(raw.stuck.front().first, opts.rho_budget);
    return detail::to_factorization(raw.primes);
}
inline Factorization factorize(u64 n, const FactorOptions& opts = {}) { return factorize(big(n), opts); }

/// Fast path for 64-bit inputs: sorted (prime, exponent) pairs.
inline std::vector<std::pair<u64, u64>> factorize_u64(u64 n) {
    if (n == 0) throw std::domain_error("factorize: input must be positive, got 0");
    std::vector<std::pair<u64, u64>> out;
    for (u64 p : small_primes()) {
        if (p * p > n) break;
        if (n % p == 0) {
            u64 e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.emplace_back(p, e);
        }
    }
    if (n > 1) {
        if (n < (u64{1} << 32) || is_prime(n)) {
            out.emplace_back(n, 1);
        } else {
            auto full = factorize(big(n));
            for (const auto& pp : full.factors()) out.emplace_back(to_u64(pp.prime), pp.exponent);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct PartialFactorization {
    Factorization found;
    /// Composite cofactors (with multiplicity) the budget could not split.
    std::vector<std::pair<BigInt, u64>> unfactored;
    bool complete() const { return unfactored.empty(); }
};

inline PartialFactorization factorize_partial(const BigInt& n, const FactorOptions& opts = {}) {
    auto raw = detail::factor_raw(n, opts);
    return {detail::to_factorization(raw.primes), std::move(raw.stuck)};
}

inline Factorization Factorization::parse(std::string_view text, const FactorOptions& opts) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty factor expression");
    Factorization result;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t star = s.find('*', pos);
        std::string term = s.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
        if (term.empty()) throw std::invalid_argument("malformed factor expression '" + std::string(text) + "'");
        std::size_t caret = term.find('^');
        BigInt base = parse_bigint(term.substr(0, caret));
        u64 exp = 1;
        if (caret != std::string::npos) {
            BigInt e = parse_bigint(term.substr(caret + 1));
            if (!fits_u64(e) || e == 0) throw std::invalid_argument("bad exponent in '" + term + "'");
            exp = to_u64(e);
        }
        if (base == 0) throw std::invalid_argument("zero factor in '" + std::string(text) + "'");
        if (base != 1) result = result * factorize(base, opts).raised(exp);
        if (star == std::string::npos) break;
        pos = star + 1;
    }
    return result;
}

/// (q^f − 1)/(q − 1) = 1 + q + … + q^{f−1}.
inline BigInt repunit(const BigInt& q, u64 f) {
    if (q < 2) throw std::domain_error("repunit: base must be at least 2");
    if (f == 0) throw std::domain_error("repunit: length must be positive");
    return (pow(q, f) - 1) / (q - 1);
}
inline BigInt repunit(u64 q, u64 f) { return repunit(big(q), f); }

/// repunit(q, f) mod m without forming the full value.
inline u64 repunit_mod(u64 q, u64 f, u64 m) {
    if (m == 1) return 0;
    u64 sum = 0, power = 1; // sum = S(len), power = q^len
    q %= m;
    for (int bit = 63; bit >= 0; --bit) {
        // len -> 2·len
        sum = mul_mod(sum, (1 + power) % m, m);
        power = mul_mod(power, power, m);
        if ((f >> bit) & 1) {
            // len -> len + 1: S(n+1) = 1 + q·S(n)
            sum = (mul_mod(sum, q, m) + 1) % m;
            power = mul_mod(power, q, m);
        }
    }
    return sum;
}

} // namespace solitary
