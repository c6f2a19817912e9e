#include <solitary/solitary.hpp>

#include <gtest/gtest.h>

using namespace solitary;

TEST(Primes, MatchesSieveBelowOneMillion) {
    auto ps = primes_between(0, 1'000'000);
    std::vector<bool> mark(1'000'001, false);
    for (u64 p : ps) mark[p] = true;
    for (u64 n = 0; n <= 1'000'000; ++n) ASSERT_EQ(is_prime(n), mark[n]) << n;
    EXPECT_EQ(ps.size(), 78498u);
}

TEST(Primes, StrongPseudoprimesAreRejected) {
    for (u64 n : {2047ull, 1373653ull, 25326001ull, 3215031751ull, 2152302898747ull, 3474749660383ull,
                  341550071728321ull, 3825123056546413051ull})
        EXPECT_FALSE(is_prime(n)) << n;
    EXPECT_TRUE(is_prime(u64{18446744073709551557ull}));
    EXPECT_FALSE(is_prime(u64{18446744073709551615ull}));
}

TEST(Primes, BeyondSixtyFourBits) {
    BigInt m127 = pow(big(2), 127) - 1;
    EXPECT_TRUE(is_prime(m127));
    EXPECT_FALSE(is_prime(m127 * m127));
    EXPECT_FALSE(is_prime(BigInt(pow(big(2), 128) + 1)));
}

TEST(Primes, NextAndPrevious) {
    EXPECT_EQ(next_prime(20731), 20743u);
    EXPECT_EQ(prev_prime(20742), 20731u);
    EXPECT_EQ(next_prime(1), 2u);
}

TEST(Modular, PowAndValuation) {
    EXPECT_EQ(pow_mod(5, 3, 31), 1u);
    EXPECT_EQ(pow_mod(u64{0xFFFFFFFFFFFFFFC5ull} - 1, 2, 0xFFFFFFFFFFFFFFC5ull), 1u);
    EXPECT_EQ(valuation(u64{7 * 7 * 7 * 12}, u64{7}), 3u);
    EXPECT_EQ(valuation(BigInt(pow(big(3), 40) * 2), big(3)), 40u);
}

TEST(Modular, CrtCombinesAndRejects) {
    auto c = crt_solve({{1, 2}, {1, 3}, {1, 5}, {1, 13}});
    EXPECT_EQ(c.residue, 1);
    EXPECT_EQ(c.modulus, 390);
    auto d = crt_solve({{2, 3}, {3, 5}, {2, 7}});
    EXPECT_EQ(d.residue, 23);
    EXPECT_THROW(crt_solve({{1, 4}, {1, 6}}), std::invalid_argument);
}

TEST(Factorization, RoundTripsAndSorts) {
    auto f = Factorization::parse("7^4*5^2*11");
    EXPECT_EQ(f.to_string(), "5^2*7^4*11");
    EXPECT_EQ(f.value(), BigInt(25 * 2401 * 11));
    EXPECT_EQ(f.omega(), 3u);
    EXPECT_EQ(f.big_omega(), 7u);
    EXPECT_EQ(Factorization::parse("12^2").to_string(), "2^4*3^2");
    EXPECT_EQ(Factorization::parse("1").to_string(), "1");
    EXPECT_THROW(Factorization::parse("5^"), std::invalid_argument);
    EXPECT_THROW(Factorization::parse("5**7"), std::invalid_argument);
    EXPECT_THROW(Factorization::from_pairs({{4, 1}}), std::invalid_argument);
}

TEST(Factorization, FactorizeAgreesWithTrialDivision) {
    for (u64 n = 1; n <= 20000; ++n) {
        auto f = factorize(n);
        ASSERT_EQ(f.value(), big(n));
        for (const auto& pp : f.factors()) ASSERT_TRUE(is_prime(pp.prime));
    }
}

TEST(Factorization, EightyBitSemiprime) {
    BigInt p = big(next_prime(u64{1} << 40)), q = big(next_prime(u64{3} << 39));
    auto f = factorize(BigInt(p * q));
    ASSERT_EQ(f.omega(), 2u);
    EXPECT_EQ(f.factors()[0].prime, std::min(p, q));
    EXPECT_EQ(f.factors()[1].prime, std::max(p, q));
}

TEST(Factorization, BudgetExhaustionIsAnError) {
    BigInt p = big(next_prime(u64{1} << 40)), q = big(next_prime(u64{3} << 39));
    FactorOptions tiny;
    tiny.rho_budget = 10;
    EXPECT_THROW(factorize(BigInt(p * q), tiny), FactorBudgetExceeded);
    auto part = factorize_partial(BigInt(p * q * 6), tiny);
    EXPECT_FALSE(part.complete());
    EXPECT_EQ(part.found.to_string(), "2*3");
}

TEST(Repunit, ClosedFormAndModular) {
    EXPECT_EQ(repunit(u64{5}, 3), 31);
    EXPECT_EQ(repunit(u64{61}, 3), 3783);
    for (u64 q : {3ull, 5ull, 7ull, 1171ull})
        for (u64 f = 1; f <= 25; ++f) {
            BigInt direct = (pow(big(q), f) - 1) / (q - 1);
            ASSERT_EQ(repunit(q, f), direct);
            for (u64 m : {7ull, 97ull, 65353ull, 1000003ull}) ASSERT_EQ(big(repunit_mod(q, f, m)), direct % m);
        }
}

TEST(ExactRatio, Canonical) {
    auto r = ExactRatio::from(18, 10);
    EXPECT_EQ(r, ten_abundancy());
    EXPECT_EQ(r.to_string(), "9/5");
    EXPECT_EQ(ExactRatio::parse("27/15"), r);
    EXPECT_EQ(ExactRatio::parse("4").to_string(), "4/1");
    EXPECT_THROW(ExactRatio::parse("1/0"), std::domain_error);
    EXPECT_LT(ExactRatio::parse("179/100"), r);
}
