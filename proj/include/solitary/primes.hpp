#pragma once

#include "modular.hpp"

#include <algorithm>
#include <vector>

namespace solitary {

namespace detail {

inline bool miller_rabin_witness(u64 n, u64 d, unsigned s, u64 a) {
    u64 x = pow_mod(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) return false;
    for (unsigned r = 1; r < s; ++r) {
        x = mul_mod(x, x, n);
        if (x == n - 1) return false;
    }
    return true;
}

} // namespace detail

/// Deterministic for every 64-bit input (first twelve primes as bases).
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    static constexpr u64 small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : small) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : small)
        if (detail::miller_rabin_witness(n, d, s, a)) return false;
    return true;
}

inline constexpr int default_primality_rounds = 64;

/// Exact below 2^64; above, GMP's Baillie-PSW plus `rounds` Miller-Rabin rounds (error < 4^-rounds).
inline bool is_prime(const BigInt& n, int rounds = default_primality_rounds) {
    if (sgn(n) <= 0) return false;
    if (auto small = as_u64(n)) return is_prime(*small);
    return mpz_probab_prime_p(n.get_mpz_t(), std::max(rounds, 1)) != 0;
}

/// Primes in [lo, hi] by a segmented sieve of Eratosthenes.
inline std::vector<u64> primes_between(u64 lo, u64 hi) {
    std::vector<u64> out;
    if (hi < 2 || lo > hi) return out;
    lo = std::max<u64>(lo, 2);
    u64 root = 1;
    while ((root + 1) * (root + 1) <= hi) ++root;
    std::vector<bool> base_composite(root + 1, false);
    std::vector<u64> base;
    for (u64 i = 2; i <= root; ++i) {
        if (base_composite[i]) continue;
        base.push_back(i);
        for (u64 j = i * i; j <= root; j += i) base_composite[j] = true;
    }
    constexpr u64 segment = 1 << 18;
    for (u64 start = lo; start <= hi; start += segment) {
        u64 end = std::min(hi, start + segment - 1);
        std::vector<bool> composite(end - start + 1, false);
        for (u64 p : base) {
            if (p * p > end) break;
            u64 first = std::max(p * p, (start + p - 1) / p * p);
            for (u64 j = first; j <= end; j += p) composite[j - start] = true;
        }
        for (u64 i = start; i <= end; ++i)
            if (!composite[i - start]) out.push_back(i);
        if (end == hi) break;
    }
    return out;
}

/// Primes up to 2^16, computed once; used for trial division.
inline const std::vector<u64>& small_primes() {
    static const std::vector<u64> table = primes_between(2, 1 << 16);
    return table;
}

inline u64 next_prime(u64 n) {
    if (n < 2) return 2;
    u64 c = n + 1;
    while (!is_prime(c)) ++c;
    return c;
}

inline u64 prev_prime(u64 n) {
    if (n <= 2) return 0;
    u64 c = n - 1;
    while (c >= 2 && !is_prime(c)) --c;
    return c >= 2 ? c : 0;
}

} // namespace solitary
