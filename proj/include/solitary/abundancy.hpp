#pragma once

#include "factorization.hpp"

#include <set>
#include <stdexcept>
#include <vector>

namespace solitary {

/// σ(p^e) = repunit(p, e + 1).
inline BigInt sigma_prime_power(const BigInt& p, u64 e) { return repunit(p, e + 1); }

inline BigInt sigma(const Factorization& n) {
    BigInt s = 1;
    for (const auto& pp : n.factors()) s *= sigma_prime_power(pp.prime, pp.exponent);
    return s;
}

inline ExactRatio abundancy(const Factorization& n) { return ExactRatio(sigma(n), n.value()); }

inline ExactRatio abundancy_prime_power(const BigInt& p, u64 e) {
    return ExactRatio(sigma_prime_power(p, e), pow(p, e));
}

/// ∏ p/(p−1): the supremum of I over integers whose prime factors are exactly `primes`.
inline ExactRatio abundancy_sup(const std::vector<BigInt>& primes) {
    if (primes.empty()) throw std::invalid_argument("abundancy_sup: empty prime set");
    std::set<BigInt> seen;
    BigInt num = 1, den = 1;
    for (const auto& p : primes) {
        if (!is_prime(p)) throw std::invalid_argument("abundancy_sup: " + p.get_str() + " is not prime");
        if (!seen.insert(p).second) throw std::invalid_argument("abundancy_sup: repeated prime " + p.get_str());
        num *= p;
        den *= p - 1;
    }
    return ExactRatio(num, den);
}

inline ExactRatio abundancy_sup(const std::vector<u64>& primes) {
    std::vector<BigInt> v;
    for (u64 p : primes) v.push_back(big(p));
    return abundancy_sup(v);
}

/// True iff I(n) = 9/5. Only defined for n > 10, since 10 itself is excluded.
inline bool is_friend_of_10(const Factorization& n) {
    if (n.value() <= 10) throw std::domain_error("is_friend_of_10: N must exceed 10, got " + n.value().get_str());
    return abundancy(n) == ten_abundancy();
}

} // namespace solitary
