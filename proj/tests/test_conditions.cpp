#include <solitary/solitary.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace solitary;

namespace {

Factorization F(const char* s) { return Factorization::parse(s); }

std::vector<std::string> rejected_by(const FilterReport& r) {
    std::vector<std::string> v;
    for (const auto& x : r.rejections) v.push_back(x.condition);
    std::sort(v.begin(), v.end());
    return v;
}

CheckOptions only(std::vector<Condition> cs) {
    CheckOptions o;
    o.conditions = std::move(cs);
    return o;
}

} // namespace

TEST(Conditions, NamesRoundTrip) {
    for (const auto& [c, n] : condition_names()) EXPECT_EQ(parse_condition(n), c);
    EXPECT_THROW(parse_condition("mod12"), std::invalid_argument);
}

TEST(Conditions, TenIsRejectedStructurally) {
    auto r = check_candidate(factorize(10));
    EXPECT_EQ(r.verdict, Verdict::reject);
    ASSERT_EQ(r.rejections.size(), 1u);
    EXPECT_EQ(r.rejections[0].condition, "odd_square");
}

TEST(Conditions, OddSquareShape) {
    auto o = only({Condition::odd_square});
    EXPECT_EQ(check_candidate(F("5^2*7^2"), o).verdict, Verdict::pass);
    EXPECT_EQ(check_candidate(F("3^2*5^2"), o).verdict, Verdict::reject);
    EXPECT_EQ(check_candidate(F("5^3*7^2"), o).verdict, Verdict::reject);
    EXPECT_EQ(check_candidate(F("7^2*11^2"), o).verdict, Verdict::reject);
    EXPECT_EQ(check_candidate(F("2^2*5^2"), o).verdict, Verdict::reject);
}

TEST(Conditions, SevenPrimeExample) {
    auto r = check_candidate(F("5^2*7^4*11^2*13^2*17^2*19^2*31^2"));
    EXPECT_EQ(r.verdict, Verdict::reject);
    EXPECT_EQ(rejected_by(r), (std::vector<std::string>{"exact", "fermat", "sigma_closure"}));
    EXPECT_TRUE(r.skipped.empty());
}

TEST(Conditions, SelectorRunsOnlyTheChosenFilters) {
    auto r = check_candidate(F("5^2*7^4"), only({Condition::mod10, Condition::mod6}));
    EXPECT_EQ(r.checked, (std::vector<std::string>{"mod10", "mod6"}));
    EXPECT_EQ(rejected_by(r), std::vector<std::string>{"mod10"});
}

TEST(Conditions, ResultsDoNotDependOnOrder) {
    std::vector<Factorization> inputs = {F("5^2*7^4*11^2*13^2*17^2*19^2*31^2"), F("5^2*7^2*11^2*13^2*19^2*23^2*31^2"),
                                         F("5^4*7^2*11^4*13^2*17^2*19^2*23^2*31^2*61^2"), F("5^2*11^2*31^2")};
    std::vector<Condition> order(default_conditions());
    std::mt19937 rng(7);
    for (const auto& n : inputs) {
        auto ref = check_candidate(n, only(order));
        for (int t = 0; t < 10; ++t) {
            std::shuffle(order.begin(), order.end(), rng);
            auto r = check_candidate(n, only(order));
            EXPECT_EQ(r.verdict, ref.verdict);
            if (is_structured(n)) {
                EXPECT_EQ(rejected_by(r), rejected_by(ref));
            }
        }
    }
}

TEST(Fermat, NeedsAPrimeOneModTwiceF) {
    EXPECT_FALSE(fermat_condition(F("5^2*7^2*17^2"), 17));
    EXPECT_TRUE(fermat_condition(F("5^2*17^2*103^2"), 17));
    // 11 ≡ 1 (mod 10)
    EXPECT_TRUE(fermat_condition(F("5^2*11^2"), 5));
    EXPECT_FALSE(fermat_condition(F("5^2*7^2"), 5));
    EXPECT_THROW(fermat_condition(F("5^2*7^2"), 7), std::invalid_argument);
    EXPECT_THROW(fermat_condition(F("5^2*7^2"), 17), std::invalid_argument);
}

TEST(FiveOrder, SmallExponents) {
    // a = 1: 2a+1 = 3 and f_31^5 = 3
    auto r = five_order_condition(F("5^2*7^2*31^2"));
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.p, 31u);
    EXPECT_FALSE(five_order_condition(F("5^2*7^2*11^2")).holds);
    // a = 2: f_11^5 = 5
    EXPECT_TRUE(five_order_condition(F("5^4*11^2")).holds);
    EXPECT_THROW(five_order_condition(F("7^2")), std::invalid_argument);
}

TEST(SquarefreeM, ExponentTwoEverywhere) {
    EXPECT_TRUE(squarefree_m(F("5^6*7^2*11^2")));
    EXPECT_FALSE(squarefree_m(F("5^2*7^4*11^2")));
    EXPECT_THROW(squarefree_m(F("3^2*5^2")), std::invalid_argument);
}

TEST(Partitions, CountsAndMinimum) {
    std::size_t count = 0;
    for_each_partition(10, [&](const std::vector<u64>&) { ++count; });
    EXPECT_EQ(count, 42u);
    auto s = min_partition_value(1, 5);
    EXPECT_EQ(s.min_value, 4);
    EXPECT_EQ(s.witness, std::vector<u64>{1});
    auto t = min_partition_value(5, 5);
    EXPECT_EQ(t.min_value, 20);
    EXPECT_EQ(t.witness, std::vector<u64>(5, 1));
    for (u64 a = 1; a <= 15; ++a) EXPECT_EQ(min_partition_value(2 * a - 1, 5).min_value, big(8 * a - 4)) << a;
    EXPECT_EQ(min_partition_value(41, 5).min_value, 164);
    EXPECT_THROW(min_partition_value(0, 5), std::invalid_argument);
    EXPECT_THROW(min_partition_value(3, 2), std::invalid_argument);
}

TEST(Partitions, SumOfPowersDominatesLinearTerm) {
    for (u64 n = 1; n <= 16; ++n)
        for (u64 a = 3; a <= 7; ++a)
            for_each_partition(n, [&](const std::vector<u64>& parts) {
                BigInt s = 0;
                for (u64 c : parts) s += pow(big(a), c);
                bool all_ones = parts.front() == 1;
                // equality happens exactly on the all-ones partition
                if (all_ones)
                    ASSERT_EQ(s, big(a * n));
                else
                    ASSERT_GT(s, big(a * n));
            });
}

TEST(BigOmega, BoundFromPartitions) {
    // ω = 7, a = 1: lower = 2·7 + 6 − 4 = 16
    auto b = big_omega_bound(F("5^2*7^4*11^2*13^2*17^2*19^2*31^2"));
    EXPECT_EQ(b.lower, 16u);
    EXPECT_EQ(b.actual, 16u);
    EXPECT_TRUE(b.pass);
    auto c = big_omega_bound(F("5^2*7^2*11^2*13^2*17^2*19^2*31^2"));
    EXPECT_FALSE(c.pass);
    for (u64 a = 1; a <= 6; ++a) {
        std::string s = "5^" + std::to_string(2 * a) + "*7^2*11^2*13^2*17^2*19^2*31^2";
        EXPECT_EQ(big_omega_bound(F(s.c_str())).lower, 2 * 7 + 6 * a - 4) << a;
    }
}

TEST(UpperBound, SmallestCaseAndMonotone) {
    EXPECT_EQ(upper_bound_N(3, 1), 50388480);
    EXPECT_EQ(upper_bound_N(3, 1), 5 * pow(big(6), 9));
    for (u64 a = 1; a <= 3; ++a)
        for (u64 K = 2 * a; K < 2 * a + 3; ++K) EXPECT_LT(upper_bound_N(K, a), upper_bound_N(K + 1, a));
    EXPECT_LT(upper_bound_N(5, 2), upper_bound_N(5, 1));
    EXPECT_THROW(upper_bound_N(1, 1), std::invalid_argument);
    EXPECT_THROW(upper_bound_N(3, 0), std::invalid_argument);
    EXPECT_THROW(upper_bound_N(40, 1), std::overflow_error);
}

TEST(EqSet, PrimesWhoseSigmaCarriesQ) {
    // σ(7^2) = 57 = 3·19, σ(11^2) = 133 = 7·19, σ(13^2) = 183 = 3·61
    auto n = F("5^2*7^2*11^2*13^2");
    EXPECT_EQ(e_q_set(n, 3), (std::vector<BigInt>{7, 13}));
    EXPECT_EQ(e_q_set(n, 7), std::vector<BigInt>{11});
    EXPECT_EQ(e_q_set(n, 31), std::vector<BigInt>{5});
    EXPECT_THROW(e_q_set(n, 4), std::invalid_argument);
}

TEST(OmegaSixChains, SixPrimeCandidatesFallToTheChainProof) {
    auto o = only({Condition::omega6_chains});
    auto r = check_candidate(F("5^2*7^2*11^2*13^2*29^2*101^2"), o);
    ASSERT_EQ(r.verdict, Verdict::reject);
    EXPECT_NE(r.rejections[0].witness.find("chain 4"), std::string::npos);
    auto s = check_candidate(F("5^2*7^2*11^2*13^2*17^2*19^2*23^2"), o);
    EXPECT_EQ(s.verdict, Verdict::pass);
    auto t = check_candidate(F("5^2*7^2*23^2*29^2*31^2*37^2"), o);
    ASSERT_EQ(t.verdict, Verdict::reject);
    EXPECT_NE(t.rejections[0].witness.find("≤ 9/5"), std::string::npos);
}

TEST(Search, TwentyFiveIsTheOnlyCandidate) {
    NullSink sink;
    auto s = search_range(25, sink);
    EXPECT_EQ(s.examined, 1u);
    EXPECT_TRUE(s.friends.empty());
    EXPECT_THROW(search_range(24, sink), std::invalid_argument);
}

namespace {
struct Collect : ReportSink {
    std::vector<FilterReport> all;
    void on_report(const FilterReport& r) override { all.push_back(r); }
};
} // namespace

TEST(Search, OrderedAndIndependentOfJobs) {
    Collect one, four;
    SearchOptions o;
    o.batch = 97;
    auto s1 = search_range(BigInt(1'000'000'000), one, o);
    o.jobs = 4;
    auto s4 = search_range(BigInt(1'000'000'000), four, o);
    EXPECT_EQ(s1, s4);
    EXPECT_EQ(one.all, four.all);
    for (std::size_t i = 1; i < one.all.size(); ++i)
        ASSERT_LT(one.all[i - 1].candidate.value(), one.all[i].candidate.value());
    EXPECT_EQ(s1.examined, one.all.size());
    EXPECT_EQ(s1.audit_failures, 0u);
}

TEST(Search, EnumeratesEveryCandidate) {
    Collect c;
    SearchOptions o;
    search_range(BigInt(10'000'000), c, o);
    std::vector<BigInt> want;
    for (u64 a = 1; a < 6; ++a)
        for (u64 m = 1; m < 1000; m += 2) {
            if (m % 5 == 0) continue;
            BigInt n = pow(big(5), 2 * a) * big(m) * big(m);
            if (n <= 10'000'000) want.push_back(n);
        }
    std::sort(want.begin(), want.end());
    ASSERT_EQ(c.all.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(c.all[i].candidate.value(), want[i]);
}
