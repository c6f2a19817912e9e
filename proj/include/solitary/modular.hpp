#pragma once

#include "bigint.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace solitary {

inline u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
    if (m == 0) throw std::domain_error("pow_mod: zero modulus");
    if (m == 1) return 0;
    u64 result = 1;
    base %= m;
    while (exp) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

inline BigInt pow_mod(const BigInt& base, const BigInt& exp, const BigInt& m) {
    if (sgn(m) <= 0) throw std::domain_error("pow_mod: modulus must be positive");
    if (sgn(exp) < 0) throw std::domain_error("pow_mod: negative exponent");
    BigInt r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline BigInt pow(const BigInt& base, u64 exp) {
    BigInt r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

/// Exponent of prime p in n (n > 0).
inline u64 valuation(u64 n, u64 p) {
    if (n == 0) throw std::domain_error("valuation of zero");
    u64 v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

inline u64 valuation(const BigInt& n, const BigInt& p) {
    if (sgn(n) == 0) throw std::domain_error("valuation of zero");
    if (n == 1) return 0;
    BigInt rest;
    return mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
}

struct Congruence {
    BigInt residue;
    BigInt modulus;
    friend bool operator==(const Congruence&, const Congruence&) = default;
};

/// Merges x ≡ rᵢ (mod mᵢ) for pairwise coprime moduli into the unique class modulo their product.
inline Congruence crt_solve(const std::vector<Congruence>& system) {
    Congruence acc{0, 1};
    for (const auto& c : system) {
        if (sgn(c.modulus) <= 0) throw std::invalid_argument("crt_solve: modulus must be positive");
        BigInt g = gcd(acc.modulus, c.modulus);
        if (g != 1)
            throw std::invalid_argument("crt_solve: moduli " + acc.modulus.get_str() + " and " + c.modulus.get_str() +
                                        " are not coprime");
        BigInt inv;
        mpz_invert(inv.get_mpz_t(), acc.modulus.get_mpz_t(), c.modulus.get_mpz_t());
        BigInt r = c.residue % c.modulus;
        if (r < 0) r += c.modulus;
        BigInt t = ((r - acc.residue) % c.modulus) * inv % c.modulus;
        if (t < 0) t += c.modulus;
        acc.residue += acc.modulus * t;
        acc.modulus *= c.modulus;
        acc.residue %= acc.modulus;
    }
    return acc;
}

} // namespace solitary
