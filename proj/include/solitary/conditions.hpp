#pragma once

#include "abundancy.hpp"
#include "chains.hpp"
#include "order_theory.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace solitary {

enum class Condition {
    odd_square,
    omega7,
    omega6_chains,
    mod10,
    mod6,
    five_order,
    fermat,
    m_nonsquarefree,
    big_omega,
    sigma_closure,
    exact,
};

inline const std::vector<std::pair<Condition, const char*>>& condition_names() {
    static const std::vector<std::pair<Condition, const char*>> names = {
        {Condition::odd_square, "odd_square"},
        {Condition::omega7, "omega7"},
        {Condition::omega6_chains, "omega6_chains"},
        {Condition::mod10, "mod10"},
        {Condition::mod6, "mod6"},
        {Condition::five_order, "five_order"},
        {Condition::fermat, "fermat"},
        {Condition::m_nonsquarefree, "m_nonsquarefree"},
        {Condition::big_omega, "big_omega"},
        {Condition::sigma_closure, "sigma_closure"},
        {Condition::exact, "exact"},
    };
    return names;
}

inline std::string condition_name(Condition c) {
    for (const auto& [k, n] : condition_names())
        if (k == c) return n;
    throw std::logic_error("unnamed condition");
}

inline Condition parse_condition(const std::string& name) {
    for (const auto& [k, n] : condition_names())
        if (name == n) return k;
    throw std::invalid_argument("unknown condition '" + name + "'");
}

/// Cheapest-first default, σ-closure and the exact test last.
inline const std::vector<Condition>& default_conditions() {
    static const std::vector<Condition> order = {
        Condition::odd_square,      Condition::omega7,    Condition::mod10,         Condition::mod6,
        Condition::five_order,      Condition::fermat,    Condition::m_nonsquarefree, Condition::big_omega,
        Condition::sigma_closure,   Condition::exact,
    };
    return order;
}

enum class Verdict { pass, reject };

struct Rejection {
    std::string condition;
    std::string witness;
    friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct Skip {
    std::string condition;
    std::string reason;
    friend bool operator==(const Skip&, const Skip&) = default;
};

struct FilterReport {
    Factorization candidate;
    Verdict verdict = Verdict::pass;
    std::vector<Rejection> rejections;
    std::vector<std::string> checked;
    std::vector<Skip> skipped;
    friend bool operator==(const FilterReport&, const FilterReport&) = default;
};

struct CheckOptions {
    std::vector<Condition> conditions = default_conditions();
    /// Stop after the first rejection (the search uses this).
    bool stop_at_first = false;
    FactorOptions factor{};
    /// σ(p^e) values above this size are not examined by the σ-closure step.
    std::size_t closure_bits = 1 << 16;
};

// ---------------------------------------------------------------------------------------------
// Individual conditions

/// a with 5^{2a} ∥ N, or nullopt when the exponent of 5 is zero or odd.
inline std::optional<u64> five_half_exponent(const Factorization& n) {
    u64 e = n.exponent_of(5);
    if (e == 0 || e % 2) return std::nullopt;
    return e / 2;
}

/// N odd, a perfect square, divisible by 5, with no prime below 5.
inline bool is_structured(const Factorization& n) {
    if (n.empty() || n.factors().front().prime != 5) return false;
    for (const auto& pp : n.factors())
        if (pp.exponent % 2) return false;
    return true;
}

inline bool is_fermat_prime(u64 p) { return detail::is_fermat_prime(p); }

/// Some prime factor of N is ≡ 1 (mod 2F), where F is a Fermat prime dividing N.
inline bool fermat_condition(const Factorization& n, u64 F) {
    if (!is_fermat_prime(F)) throw std::invalid_argument(std::to_string(F) + " is not a Fermat prime");
    if (!n.contains(big(F))) throw std::invalid_argument("fermat_condition: " + std::to_string(F) + " does not divide N");
    for (const auto& pp : n.factors())
        if (pp.prime % (2 * F) == 1) return true;
    return false;
}

struct FiveOrderResult {
    bool holds = false;
    u64 a = 0;
    std::optional<u64> p;
    std::optional<u64> f;
};

/// With 5^{2a} ∥ N: some prime p | N has an odd f > 1, f ≤ min{2a+1, p−1}, 5^f ≡ 1 (mod p), f | 2a+1.
inline FiveOrderResult five_order_condition(const Factorization& n) {
    auto a = five_half_exponent(n);
    if (!a || *a == 0) throw std::invalid_argument("five_order_condition: need 5^{2a} ∥ N with a ≥ 1");
    FiveOrderResult r;
    r.a = *a;
    const u64 n2 = 2 * *a + 1;
    for (const auto& pp : n.factors()) {
        if (pp.prime == 5 || pp.prime == 2 || !fits_u64(pp.prime)) continue;
        u64 p = to_u64(pp.prime);
        auto prof = f_pq(p, 5);
        if (prof.f && n2 % *prof.f == 0 && *prof.f <= std::min(n2, p - 1)) {
            r.holds = true;
            r.p = p;
            r.f = prof.f;
            return r;
        }
    }
    return r;
}

/// True iff m is squarefree, where N = 5^{2a}m² (every exponent other than that of 5 equals 2).
inline bool squarefree_m(const Factorization& n) {
    if (!is_structured(n)) throw std::invalid_argument("squarefree_m: N must be an odd square divisible by 5");
    for (const auto& pp : n.factors())
        if (pp.prime != 5 && pp.exponent != 2) return false;
    return true;
}

struct PartitionStats {
    u64 n = 0;
    u64 base = 0;
    BigInt min_value;
    std::vector<u64> witness;
    friend bool operator==(const PartitionStats&, const PartitionStats&) = default;
};

namespace detail {

inline void partitions_rec(u64 remaining, u64 max_part, std::vector<u64>& cur,
                           const std::function<void(const std::vector<u64>&)>& visit) {
    if (remaining == 0) {
        visit(cur);
        return;
    }
    for (u64 c = std::min(remaining, max_part); c >= 1; --c) {
        cur.push_back(c);
        partitions_rec(remaining - c, c, cur, visit);
        cur.pop_back();
    }
}

} // namespace detail

/// Calls visit on every partition of n (parts non-increasing).
inline void for_each_partition(u64 n, const std::function<void(const std::vector<u64>&)>& visit) {
    std::vector<u64> cur;
    detail::partitions_rec(n, n, cur, visit);
}

inline BigInt partition_value(const std::vector<u64>& parts, u64 base) {
    BigInt s = 0;
    for (u64 c : parts) s += pow(big(base), c);
    return s - static_cast<unsigned long>(parts.size());
}

/// min over partitions (c₁..c_r) of n of Σ base^{cᵢ} − r. Brute force up to n = 30; above that the
/// all-ones partition, (base − 1)·n, which is minimal since base^c − 1 ≥ (base − 1)·c for every part.
inline PartitionStats min_partition_value(u64 n, u64 base) {
    if (n == 0) throw std::invalid_argument("min_partition_value: n must be positive");
    if (base < 3) throw std::invalid_argument("min_partition_value: base must be at least 3");
    PartitionStats st{n, base, 0, {}};
    if (n > 30) {
        st.min_value = big(base - 1) * big(n);
        st.witness.assign(n, 1);
        return st;
    }
    bool first = true;
    for_each_partition(n, [&](const std::vector<u64>& parts) {
        BigInt v = partition_value(parts, base);
        if (first || v < st.min_value) {
            st.min_value = v;
            st.witness = parts;
            first = false;
        }
    });
    return st;
}

struct BigOmegaBound {
    u64 lower = 0;
    u64 actual = 0;
    bool pass = false;
};

/// Ω(N) ≥ 2ω(N) + 6a − 4 for N = 5^{2a}m². The lower bound is assembled as
/// 2a (from 5^{2a}) + 2(ω − 1) (one square per other prime) + the extra exponent forced on the primes
/// carrying 5^{2a−1} in σ(N), which is min L_{2a−1,5} − 2(2a − 1).
inline BigOmegaBound big_omega_bound(const Factorization& n) {
    auto a = five_half_exponent(n);
    if (!a || !is_structured(n)) throw std::invalid_argument("big_omega_bound: N must be 5^{2a}m² with m odd");
    auto L = min_partition_value(2 * *a - 1, 5);
    u64 min_l = to_u64(L.min_value);
    u64 lower = 2 * *a + 2 * (n.omega() - 1) + min_l - 2 * (2 * *a - 1);
    return {lower, n.big_omega(), n.big_omega() >= lower};
}

/// 5·6^{(2^{K−2a+1} − 1)²}.
inline BigInt upper_bound_N(u64 K, u64 a) {
    if (a == 0) throw std::invalid_argument("upper_bound_N: a must be positive");
    if (K < 2 * a) throw std::invalid_argument("upper_bound_N: need K ≥ 2a");
    u64 t = K - 2 * a + 1;
    if (t > 24) throw std::overflow_error("upper_bound_N: exponent too large to evaluate");
    u64 base = (u64{1} << t) - 1;
    return 5 * pow(BigInt(6), base * base);
}

/// {p | N : η = v_p(N) even ≥ 2 and q | σ(p^η)}.
inline std::vector<BigInt> e_q_set(const Factorization& n, u64 q) {
    if (q < 3 || !is_prime(q)) throw std::invalid_argument("e_q_set: q must be an odd prime");
    std::vector<BigInt> out;
    for (const auto& pp : n.factors()) {
        if (pp.prime == 2 || pp.exponent < 2 || pp.exponent % 2) continue;
        if (pp.prime == q) continue; // σ(q^η) ≡ 1 (mod q)
        bool hit;
        if (auto p = as_u64(pp.prime))
            hit = valuation_sigma(q, *p, pp.exponent).v > 0;
        else
            hit = sigma_prime_power(pp.prime, pp.exponent) % q == 0;
        if (hit) out.push_back(pp.prime);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Chain-engine backed ω ≥ 6 mode

namespace detail {

struct ChainProof {
    std::vector<Chain> chains;
    std::vector<EliminationReport> reports;
};

inline const ChainProof& chain_proof() {
    static const ChainProof proof = [] {
        ChainProof p;
        p.chains = enumerate_chains(6);
        p.reports = eliminate_all(p.chains);
        return p;
    }();
    return proof;
}

inline std::string describe_covering_step(const EliminationReport& rep, u64 p6) {
    for (const auto& s : rep.steps) {
        if (s.covered.all || std::binary_search(s.covered.p6.begin(), s.covered.p6.end(), p6))
            return s.tactic + " (" + s.subcase + ")";
    }
    return "";
}

} // namespace detail

// ---------------------------------------------------------------------------------------------
// Pipeline

namespace detail {

inline std::string list_primes(const Factorization& n) {
    std::string s;
    for (const auto& pp : n.factors()) s += (s.empty() ? "" : ",") + pp.prime.get_str();
    return s;
}

struct Outcome {
    enum Kind { pass, reject, skip } kind;
    std::string text;
};

inline Outcome run_condition(Condition c, const Factorization& n, const CheckOptions& opts) {
    const bool structured = is_structured(n);
    auto need_structure = [&]() -> std::optional<Outcome> {
        if (structured) return std::nullopt;
        return Outcome{Outcome::skip, "precondition: N is not an odd square with least prime factor 5"};
    };
    switch (c) {
    case Condition::odd_square: {
        if (n.value() <= 10) return {Outcome::reject, "N = " + n.value().get_str() + " does not exceed 10"};
        if (n.contains(2)) return {Outcome::reject, "N is even"};
        for (const auto& pp : n.factors())
            if (pp.exponent % 2)
                return {Outcome::reject, "N is not a square: " + pp.prime.get_str() + "^" + std::to_string(pp.exponent)};
        if (!n.contains(5)) return {Outcome::reject, "5 does not divide N"};
        if (n.factors().front().prime != 5)
            return {Outcome::reject, "least prime factor is " + n.factors().front().prime.get_str() + ", not 5"};
        return {Outcome::pass, ""};
    }
    case Condition::omega7:
        if (n.omega() >= 7) return {Outcome::pass, ""};
        return {Outcome::reject, "ω(N) = " + std::to_string(n.omega()) + " < 7"};
    case Condition::omega6_chains: {
        if (n.omega() >= 7) return {Outcome::pass, ""};
        if (n.omega() < 6) return {Outcome::reject, "ω(N) = " + std::to_string(n.omega()) + " < 6"};
        if (auto o = need_structure()) return *o;
        std::vector<u64> ps;
        for (const auto& pp : n.factors()) {
            if (!fits_u64(pp.prime)) return {Outcome::skip, "prime factor beyond 64 bits"};
            ps.push_back(to_u64(pp.prime));
        }
        std::vector<u64> fixed(ps.begin(), ps.end() - 1);
        const auto& proof = chain_proof();
        for (std::size_t i = 0; i < proof.chains.size(); ++i) {
            const auto& ch = proof.chains[i];
            if (ch.fixed_primes != fixed || !ch.p6.contains(ps.back())) continue;
            const auto& rep = proof.reports[i];
            if (rep.status != ChainStatus::eliminated)
                return {Outcome::skip, "chain " + std::to_string(ch.id) + " is open"};
            return {Outcome::reject, "6 primes in chain " + std::to_string(ch.id) + " " + ch.label() +
                                         ", eliminated by " + describe_covering_step(rep, ps.back())};
        }
        ExactRatio sup = abundancy_sup(ps);
        return {Outcome::reject, "∏ p/(p−1) = " + sup.to_string() + " ≤ 9/5"};
    }
    case Condition::mod10: {
        if (!n.contains(5)) return {Outcome::skip, "precondition: 5 ∤ N"};
        for (const auto& pp : n.factors())
            if (pp.prime % 10 == 1) return {Outcome::pass, ""};
        return {Outcome::reject, "no prime factor ≡ 1 (mod 10)"};
    }
    case Condition::mod6: {
        if (auto o = need_structure()) return *o;
        for (const auto& pp : n.factors())
            if (pp.prime % 6 == 1) return {Outcome::pass, ""};
        return {Outcome::reject, "no prime factor ≡ 1 (mod 6)"};
    }
    case Condition::five_order: {
        if (auto o = need_structure()) return *o;
        auto r = five_order_condition(n);
        if (r.holds) return {Outcome::pass, ""};
        return {Outcome::reject, "no prime factor p has odd f_p^5 dividing 2a+1 = " + std::to_string(2 * r.a + 1)};
    }
    case Condition::fermat: {
        if (auto o = need_structure()) return *o;
        for (u64 F : {3, 5, 17, 257, 65537}) {
            if (!n.contains(big(F))) continue;
            if (!fermat_condition(n, F))
                return {Outcome::reject, std::to_string(F) + " | N but no prime factor ≡ 1 (mod " +
                                             std::to_string(2 * F) + ")"};
        }
        return {Outcome::pass, ""};
    }
    case Condition::m_nonsquarefree: {
        if (auto o = need_structure()) return *o;
        if (!squarefree_m(n)) return {Outcome::pass, ""};
        std::string m;
        for (const auto& pp : n.factors())
            if (pp.prime != 5) m += (m.empty() ? "" : "*") + pp.prime.get_str();
        return {Outcome::reject, "m = " + (m.empty() ? std::string("1") : m) + " is squarefree"};
    }
    case Condition::big_omega: {
        if (auto o = need_structure()) return *o;
        auto b = big_omega_bound(n);
        if (b.pass) return {Outcome::pass, ""};
        return {Outcome::reject, "Ω(N) = " + std::to_string(b.actual) + " < " + std::to_string(b.lower)};
    }
    case Condition::sigma_closure: {
        if (auto o = need_structure()) return *o;
        std::vector<BigInt> allowed{3};
        for (const auto& pp : n.factors()) allowed.push_back(pp.prime);
        for (const auto& pp : n.factors()) {
            if (bit_length(pp.prime) * (pp.exponent + 1) > opts.closure_bits)
                return {Outcome::skip, "σ(" + pp.prime.get_str() + "^" + std::to_string(pp.exponent) +
                                           ") exceeds the closure size limit"};
            BigInt s = sigma_prime_power(pp.prime, pp.exponent);
            for (const auto& a : allowed) detail::strip(s, a);
            if (s == 1) continue;
            std::string w = "σ(" + pp.prime.get_str() + "^" + std::to_string(pp.exponent) + ") has ";
            if (auto part = factorize_partial(s, opts.factor); !part.found.empty())
                w += "prime factor " + part.found.factors().front().prime.get_str();
            else
                w += "cofactor " + s.get_str();
            return {Outcome::reject, w + " outside {3," + list_primes(n) + "}"};
        }
        return {Outcome::pass, ""};
    }
    case Condition::exact: {
        if (n.value() <= 10) return {Outcome::skip, "precondition: N ≤ 10"};
        ExactRatio I = abundancy(n);
        if (I == ten_abundancy()) return {Outcome::pass, ""};
        return {Outcome::reject, "I(N) = " + I.to_string() + " ≠ 9/5"};
    }
    }
    throw std::logic_error("unhandled condition");
}

} // namespace detail

inline FilterReport check_candidate(const Factorization& n, const CheckOptions& opts = {}) {
    FilterReport rep;
    rep.candidate = n;
    for (Condition c : opts.conditions) {
        std::string name = condition_name(c);
        detail::Outcome o;
        try {
            o = detail::run_condition(c, n, opts);
        } catch (const FactorBudgetExceeded& e) {
            o = {detail::Outcome::skip, e.what()};
        }
        if (o.kind == detail::Outcome::skip) {
            rep.skipped.push_back({name, o.text});
            continue;
        }
        rep.checked.push_back(name);
        if (o.kind == detail::Outcome::reject) {
            rep.rejections.push_back({name, o.text});
            if (opts.stop_at_first || c == Condition::odd_square) break;
        }
    }
    rep.verdict = rep.rejections.empty() ? Verdict::pass : Verdict::reject;
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Bounded search

class ReportSink {
public:
    virtual ~ReportSink() = default;
    virtual void on_report(const FilterReport& report) = 0;
};

class NullSink : public ReportSink {
public:
    void on_report(const FilterReport&) override {}
};

struct SearchOptions {
    unsigned jobs = 1;
    CheckOptions check{default_conditions(), true};
    /// Re-check I(N) ≠ 9/5 exactly on every k-th rejected candidate (0: never, 1: all).
    u64 audit_every = 100;
    std::size_t batch = 4096;
};

struct SearchSummary {
    BigInt max_n;
    u64 examined = 0;
    u64 rejected = 0;
    std::map<std::string, u64> rejected_by; // keyed by the first rejecting condition
    std::vector<Factorization> survivors;  // passed every necessary condition before the exact test
    std::vector<Factorization> friends;
    u64 audited = 0;
    u64 audit_failures = 0;
    friend bool operator==(const SearchSummary&, const SearchSummary&) = default;
};

namespace detail {

/// Yields (a, m) pairs with N = 5^{2a}m² ≤ max_n, m odd and prime to 5, in increasing N.
class CandidateStream {
public:
    explicit CandidateStream(const BigInt& max_n) : max_n_(max_n) {
        BigInt p = 25;
        for (u64 a = 1; p <= max_n_; ++a, p *= 25) {
            powers_.push_back(p);
            heap_.push({p, a, 1});
        }
    }
    bool next(u64& a, u64& m, BigInt& n) {
        if (heap_.empty()) return false;
        Item it = heap_.top();
        heap_.pop();
        a = it.a;
        m = it.m;
        n = it.n;
        u64 nm = it.m + 2;
        if (nm % 5 == 0) nm += 2;
        BigInt nn = powers_[it.a - 1] * big(nm) * big(nm);
        if (nn <= max_n_) heap_.push({nn, it.a, nm});
        return true;
    }

private:
    struct Item {
        BigInt n;
        u64 a, m;
        bool operator>(const Item& o) const { return n > o.n; }
    };
    BigInt max_n_;
    std::vector<BigInt> powers_;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
};

inline Factorization candidate_factorization(u64 a, u64 m) {
    std::vector<PrimePower> v{{big(5), 2 * a}};
    for (auto [p, e] : factorize_u64(m)) v.push_back({big(p), 2 * e});
    std::sort(v.begin(), v.end(), [](const PrimePower& x, const PrimePower& y) { return x.prime < y.prime; });
    return Factorization::from_sorted_unchecked(std::move(v));
}

} // namespace detail

/// Enumerates N = 5^{2a}m² ≤ max_n (m odd, 5 ∤ m), checks each and streams the reports to the sink in
/// increasing N regardless of the number of workers.
inline SearchSummary search_range(const BigInt& max_n, ReportSink& sink, const SearchOptions& opts = {}) {
    if (max_n < 25) throw std::invalid_argument("search_range: max_N must be at least 25");
    SearchSummary sum;
    sum.max_n = max_n;
    detail::CandidateStream stream(max_n);
    const unsigned jobs = std::max(1u, opts.jobs);
    std::vector<Factorization> batch;
    std::vector<FilterReport> reports;
    u64 rejected_seen = 0;
    for (;;) {
        batch.clear();
        u64 a, m;
        BigInt n;
        while (batch.size() < opts.batch && stream.next(a, m, n)) batch.push_back(detail::candidate_factorization(a, m));
        if (batch.empty()) break;
        reports.assign(batch.size(), {});
        std::vector<u64> audit_bad(batch.size(), 0);
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) reports[i] = check_candidate(batch[i], opts.check);
        };
        if (jobs == 1) {
            work(0, batch.size());
        } else {
            std::vector<std::thread> pool;
            std::size_t chunk = (batch.size() + jobs - 1) / jobs;
            for (unsigned t = 0; t < jobs; ++t) {
                std::size_t b = t * chunk, e = std::min(batch.size(), b + chunk);
                if (b < e) pool.emplace_back(work, b, e);
            }
            for (auto& th : pool) th.join();
        }
        for (auto& rep : reports) {
            ++sum.examined;
            if (rep.verdict == Verdict::reject) {
                ++sum.rejected;
                ++sum.rejected_by[rep.rejections.front().condition];
                if (opts.audit_every && rejected_seen++ % opts.audit_every == 0) {
                    ++sum.audited;
                    if (rep.candidate.value() > 10 && abundancy(rep.candidate) == ten_abundancy()) ++sum.audit_failures;
                }
            } else {
                sum.survivors.push_back(rep.candidate);
                if (rep.candidate.value() > 10 && is_friend_of_10(rep.candidate)) sum.friends.push_back(rep.candidate);
            }
            sink.on_report(rep);
        }
    }
    return sum;
}

} // namespace solitary
