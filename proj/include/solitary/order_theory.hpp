#pragma once

#include "abundancy.hpp"
#include "factorization.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace solitary {

namespace detail {

/// p^k, or nullopt when it would overflow 64 bits.
inline std::optional<u64> checked_power(u64 p, u64 k) {
    u128 m = 1;
    for (u64 i = 0; i < k; ++i) {
        m *= p;
        if (m > static_cast<u128>(~u64{0})) return std::nullopt;
    }
    return static_cast<u64>(m);
}

} // namespace detail

/// Least e ≥ 1 with q^e ≡ 1 (mod p^k). Factors φ(p^k) and strips primes while the power stays 1.
inline u64 mult_order(u64 q, u64 p, u64 k = 1) {
    if (k == 0) throw std::invalid_argument("mult_order: k must be positive");
    if (!is_prime(p)) throw std::invalid_argument("mult_order: " + std::to_string(p) + " is not prime");
    auto m = detail::checked_power(p, k);
    if (!m) throw std::out_of_range("mult_order: modulus " + std::to_string(p) + "^" + std::to_string(k) + " too large");
    if (q % p == 0) throw std::invalid_argument("mult_order: " + std::to_string(q) + " is not coprime to " +
                                                std::to_string(p));
    u64 phi = *m / p * (p - 1);
    auto parts = factorize_u64(p - 1);
    if (k > 1) parts.emplace_back(p, k - 1);
    u64 e = phi;
    for (auto [r, mult] : parts) {
        for (u64 i = 0; i < mult && e % r == 0; ++i) {
            if (pow_mod(q, e / r, *m) != 1) break;
            e /= r;
        }
    }
    return e;
}

struct OrderProfile {
    u64 p = 0;
    /// Modulus is p^k.
    u64 k = 1;
    u64 q = 0;
    std::optional<u64> f;
    /// j for the prime-power condition p^j | σ(q^{2a}); 1 for the plain f_p^q.
    u64 power = 1;
    friend bool operator==(const OrderProfile&, const OrderProfile&) = default;
};

/// f for the condition p^j | σ(q^{2a}): the smallest odd f > 1 with q^f ≡ 1 (mod p^k), where
/// k = v_p(q−1) + j. With j = 1 this is f_p^q; larger j layers the same group by valuation,
/// since v_p(q^n − 1) = v_p(q − 1) + v_p(σ(q^{n−1})).
inline OrderProfile f_prime_power(u64 p, u64 j, u64 q) {
    if (j == 0) throw std::invalid_argument("f_prime_power: j must be positive");
    if (p == q) throw std::invalid_argument("f_pq: p and q must differ");
    if (!is_prime(p) || !is_prime(q)) throw std::invalid_argument("f_pq: p and q must be prime");
    OrderProfile prof{p, valuation(q - 1, p) + j, q, std::nullopt, j};
    u64 o = mult_order(q, p, prof.k);
    if (o % 2 == 1) prof.f = o > 1 ? o : 3;
    return prof;
}

inline OrderProfile f_pq(u64 p, u64 q) { return f_prime_power(p, 1, q); }

/// Whether p | σ(q^{2a}), decided from orders only.
inline bool divides_sigma(u64 p, u64 q, u64 a) {
    if (p == 2) throw std::invalid_argument("divides_sigma: σ of an even power of an odd prime is odd; p = 2 rejected");
    if (q == 2) throw std::invalid_argument("divides_sigma: q must be odd");
    if (p == q) throw std::invalid_argument("divides_sigma: p and q must differ");
    if (a == 0) throw std::invalid_argument("divides_sigma: a must be positive");
    u64 n = 2 * a + 1;
    if (q % p == 1) return n % p == 0;
    auto prof = f_pq(p, q);
    return prof.f && n % *prof.f == 0;
}

/// Whether p^j | σ(q^{2a}).
inline bool divides_sigma_power(u64 p, u64 j, u64 q, u64 a) {
    auto prof = f_prime_power(p, j, q);
    return prof.f && (2 * a + 1) % *prof.f == 0;
}

struct ValuationResult {
    u64 q = 0;
    u64 p = 0;
    u64 a = 0;
    u64 v = 0;
    friend bool operator==(const ValuationResult&, const ValuationResult&) = default;
};

/// Exact v_q(σ(p^a)) from the order o = o_q(p):
///   o = 1            → v_q(a+1)
///   o | a+1, o ≠ 1   → v_q(p^o − 1) + v_q(a+1)
///   otherwise        → 0
inline ValuationResult valuation_sigma(u64 q, u64 p, u64 a) {
    if (q < 3 || !is_prime(q)) throw std::invalid_argument("valuation_sigma: q must be an odd prime");
    if (!is_prime(p)) throw std::invalid_argument("valuation_sigma: p must be prime");
    if (p == q) throw std::invalid_argument("valuation_sigma: p and q must differ");
    ValuationResult r{q, p, a, 0};
    if (a == 0) return r;
    u64 o = mult_order(p, q);
    if (o == 1) {
        r.v = valuation(a + 1, q);
    } else if ((a + 1) % o == 0) {
        u64 t = 1; // p^o ≡ 1 mod q by definition of o
        for (;;) {
            auto m = detail::checked_power(q, t + 1);
            if (!m || pow_mod(p, o, *m) != 1) break;
            ++t;
        }
        r.v = t + valuation(a + 1, q);
    }
    return r;
}

/// Every prime of repunit(q, f) outside `exclude`. Each divides σ(q^{2a}) whenever f | 2a+1.
inline std::vector<BigInt> companion_primes(const BigInt& q, u64 f, const std::vector<BigInt>& exclude,
                                            const FactorOptions& opts = {}) {
    if (f < 3 || f % 2 == 0) throw std::invalid_argument("companion_primes: f must be odd and greater than 1");
    std::vector<BigInt> out;
    auto full = factorize(repunit(q, f), opts);
    for (const auto& pp : full.factors())
        if (std::find(exclude.begin(), exclude.end(), pp.prime) == exclude.end()) out.push_back(pp.prime);
    return out;
}
inline std::vector<BigInt> companion_primes(u64 q, u64 f, const std::vector<u64>& exclude,
                                            const FactorOptions& opts = {}) {
    std::vector<BigInt> ex;
    for (u64 e : exclude) ex.push_back(big(e));
    return companion_primes(big(q), f, ex, opts);
}

enum class ResidualKind { one, prime, prime_power, composite, unknown };

inline const char* residual_kind_name(ResidualKind k) {
    switch (k) {
    case ResidualKind::one: return "one";
    case ResidualKind::prime: return "prime";
    case ResidualKind::prime_power: return "prime_power";
    case ResidualKind::composite: return "composite";
    case ResidualKind::unknown: return "unknown";
    }
    return "unknown";
}

/// What is left of repunit(q, f) once the allowed primes are divided out. Every prime factor of
/// the residual is outside the allowed set, so residual > 1 is itself proof of an extraneous prime.
struct CompanionScan {
    BigInt q;
    u64 f = 0;
    /// Extraneous primes found explicitly, ascending.
    std::vector<BigInt> extraneous;
    /// Cofactor after removing allowed primes and `extraneous`.
    BigInt residual = 1;
    ResidualKind residual_kind = ResidualKind::one;

    bool clean() const { return extraneous.empty() && residual == 1; }
    /// Lower bound on the number of distinct extraneous primes.
    std::size_t min_distinct() const {
        std::size_t n = extraneous.size();
        switch (residual_kind) {
        case ResidualKind::one: break;
        case ResidualKind::composite: n += 2; break;
        default: n += 1; break;
        }
        return n;
    }
    /// The single extraneous prime, when the scan proves there is exactly one.
    std::optional<BigInt> sole_prime() const {
        if (extraneous.size() == 1 && residual_kind == ResidualKind::one) return extraneous.front();
        if (!extraneous.empty()) return std::nullopt;
        if (residual_kind == ResidualKind::prime) return residual;
        if (residual_kind == ResidualKind::prime_power) return detail::perfect_power(residual).first;
        return std::nullopt;
    }
    /// Whether the scan pins down the extraneous set exactly.
    bool exact() const { return residual_kind != ResidualKind::unknown && residual_kind != ResidualKind::composite; }
    /// Smallest explicit extraneous prime, else the residual itself.
    BigInt witness() const { return extraneous.empty() ? residual : extraneous.front(); }
};

struct ScanOptions {
    FactorOptions factor{u64{1} << 20, default_primality_rounds};
    /// Residuals up to this size are factored outright.
    std::size_t full_factor_bits = 110;
    /// Bound for the explicit small-prime witness search on larger residuals.
    u64 witness_bound = u64{1} << 20;
    /// Residuals beyond this size are not classified.
    std::size_t classify_bits = 4096;
    /// Stop the witness search after this many explicit primes (0: no limit).
    std::size_t max_witnesses = 0;
    /// Whether to decide prime / prime power / composite for the residual.
    bool classify = true;
};

/// Settings for callers that only need to know whether the scan is clean.
inline ScanOptions cleanliness_only(ScanOptions o) {
    o.max_witnesses = 1;
    o.classify = false;
    return o;
}

namespace detail {

inline ResidualKind classify(const BigInt& r, const ScanOptions& opts) {
    if (r == 1) return ResidualKind::one;
    if (!opts.classify || bit_length(r) > opts.classify_bits) return ResidualKind::unknown;
    if (is_prime(r, opts.factor.primality_rounds)) return ResidualKind::prime;
    auto [root, k] = perfect_power(r);
    if (k > 1 && is_prime(root, opts.factor.primality_rounds)) return ResidualKind::prime_power;
    return ResidualKind::composite;
}

/// Primality bitmap for the witness search.
inline const std::vector<bool>& witness_sieve() {
    static const std::vector<bool> bits = [] {
        std::vector<bool> b(u64{1} << 22, false);
        for (u64 p : primes_between(2, b.size() - 1)) b[p] = true;
        return b;
    }();
    return bits;
}

inline void strip(BigInt& n, const BigInt& p) {
    while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) mpz_divexact(n.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
}

} // namespace detail

inline CompanionScan scan_companions(u64 q, u64 f, const std::vector<u64>& allowed, const ScanOptions& opts = {}) {
    if (f == 0) throw std::invalid_argument("scan_companions: f must be positive");
    CompanionScan scan;
    scan.q = big(q);
    scan.f = f;
    BigInt r = repunit(q, f);
    for (u64 a : allowed) detail::strip(r, big(a));
    std::set<BigInt> found;
    if (r == 1) {
        // nothing extraneous
    } else if (bit_length(r) <= opts.full_factor_bits) {
        auto partial = factorize_partial(r, opts.factor);
        for (const auto& pp : partial.found.factors()) found.insert(pp.prime);
        r = 1;
        for (const auto& [c, e] : partial.unfactored) r *= pow(c, e);
    } else {
        // A prime s divides repunit(q, f) iff ord_s(q) | f with ord_s(q) > 1 (then s ≡ 1 mod 2·d for
        // a prime d | f), or s | q − 1 together with s | f.
        const auto& sieve = detail::witness_sieve();
        auto enough = [&] { return opts.max_witnesses != 0 && found.size() >= opts.max_witnesses; };
        auto test = [&](u64 s) {
            if (s < 3 || (s < sieve.size() ? !sieve[s] : !is_prime(s))) return;
            if (std::find(allowed.begin(), allowed.end(), s) != allowed.end()) return;
            if (repunit_mod(q, f, s) == 0) found.insert(big(s));
        };
        auto fprimes = factorize_u64(f);
        for (auto [d, e] : fprimes) {
            if (enough()) break;
            test(d);
            if (d == 2) continue;
            for (u64 s = 2 * d + 1; s <= opts.witness_bound && !enough(); s += 2 * d) test(s);
        }
    }
    for (const auto& s : found) detail::strip(r, s);
    scan.extraneous.assign(found.begin(), found.end());
    scan.residual = r;
    scan.residual_kind = detail::classify(r, opts);
    return scan;
}

} // namespace solitary
