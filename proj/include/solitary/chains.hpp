#pragma once

#include "abundancy.hpp"
#include "order_theory.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

namespace solitary {

struct P6Range {
    u64 lo = 0;
    std::optional<u64> hi; // nullopt: unbounded above
    bool bounded() const { return hi.has_value(); }
    bool contains(u64 p) const { return p >= lo && (!hi || p <= *hi); }
    friend bool operator==(const P6Range&, const P6Range&) = default;
};

struct Chain {
    std::size_t id = 0;
    std::vector<u64> fixed_primes;
    P6Range p6;

    std::vector<u64> with(u64 last) const {
        auto v = fixed_primes;
        v.push_back(last);
        return v;
    }
    /// Every prime in a bounded p6 range.
    std::vector<u64> p6_values() const {
        if (!p6.bounded()) throw std::logic_error("p6_values: chain " + std::to_string(id) + " is unbounded");
        return primes_between(p6.lo, *p6.hi);
    }
    std::string label() const {
        std::string s = "{";
        for (std::size_t i = 0; i < fixed_primes.size(); ++i) s += (i ? "," : "") + std::to_string(fixed_primes[i]);
        s += "} p6 in [" + std::to_string(p6.lo) + ", " + (p6.hi ? std::to_string(*p6.hi) : std::string("inf")) + "]";
        return s;
    }
    friend bool operator==(const Chain&, const Chain&) = default;
};

namespace detail {

inline ExactRatio prime_ratio(u64 p) { return ExactRatio::from(p, p - 1); }

inline void chain_dfs(std::vector<u64>& prefix, const ExactRatio& sup, std::size_t num_primes, const ExactRatio& target,
                      std::vector<Chain>& out) {
    if (prefix.size() == num_primes - 1) {
        u64 lo = next_prime(prefix.back());
        if (sup >= target) {
            out.push_back({out.size() + 1, prefix, {lo, std::nullopt}});
            return;
        }
        // sup·p/(p−1) > T  ⇔  p·(T_n·B − T_d·A) < T_n·B with sup = A/B, T = T_n/T_d.
        BigInt tb = target.numerator() * sup.denominator();
        BigInt d = tb - target.denominator() * sup.numerator();
        BigInt pmax = (tb - 1) / d;
        if (pmax < lo) return;
        u64 hi = fits_u64(pmax) ? to_u64(pmax) : throw std::out_of_range("chain bound exceeds 64 bits");
        if (!is_prime(hi)) hi = prev_prime(hi);
        if (hi >= lo) out.push_back({out.size() + 1, prefix, {lo, hi}});
        return;
    }
    if (sup >= target)
        throw std::domain_error("enumerate_chains: prefix already reaches the target; infinitely many chains");
    const std::size_t slots = num_primes - prefix.size();
    for (u64 p = next_prime(prefix.back());; p = next_prime(p)) {
        // Best completion uses p and the next slots−1 primes after it.
        ExactRatio best = sup * prime_ratio(p);
        u64 q = p;
        for (std::size_t i = 1; i < slots; ++i) {
            q = next_prime(q);
            best *= prime_ratio(q);
        }
        if (best <= target) break;
        prefix.push_back(p);
        chain_dfs(prefix, sup * prime_ratio(p), num_primes, target, out);
        prefix.pop_back();
    }
}

} // namespace detail

/// All chains 5 < p2 < … < p_{n−1} with a p_n interval on which ∏ p/(p−1) exceeds the target, in
/// lexicographic order of the fixed primes.
inline std::vector<Chain> enumerate_chains(std::size_t num_primes = 6, const ExactRatio& target = ten_abundancy()) {
    if (num_primes < 2) throw std::invalid_argument("enumerate_chains: need at least two primes");
    std::vector<Chain> out;
    std::vector<u64> prefix{5};
    detail::chain_dfs(prefix, detail::prime_ratio(5), num_primes, target, out);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Witnesses

/// σ(host^{length−1}) = repunit(host, length) has prime factors outside `allowed`. When guest ≠ 0,
/// length is f for guest^{guest_power} at host, so guest^{guest_power} | σ(host^{2a}) forces the
/// whole repunit into σ(host^{2a}).
struct CompanionWitness {
    u64 host = 0;
    u64 length = 0;
    u64 guest = 0;
    u64 guest_power = 1;
    std::vector<u64> allowed;
    /// Explicit primes outside `allowed`.
    std::vector<BigInt> companions;
    /// Lower bound (0, 1 or 2) on further distinct outside primes in the leftover cofactor.
    u64 residual_distinct = 0;
    std::size_t min_distinct() const { return companions.size() + residual_distinct; }
    friend bool operator==(const CompanionWitness&, const CompanionWitness&) = default;
};

/// No odd f > 1 exists, so prime^power never divides σ(host^{even}).
struct NoOddOrderWitness {
    u64 prime = 0;
    u64 host = 0;
    u64 power = 1;
    friend bool operator==(const NoOddOrderWitness&, const NoOddOrderWitness&) = default;
};

/// I(lower) ≥ 9/5 (strict: > 9/5). N is a multiple of `lower`; when not strict, a proper one.
struct AbundancyWitness {
    Factorization lower;
    ExactRatio value;
    bool strict = true;
    friend bool operator==(const AbundancyWitness&, const AbundancyWitness&) = default;
};

/// None of `members` is ≡ 1 (mod modulus = 2F).
struct FermatWitness {
    u64 fermat = 0;
    u64 modulus = 0;
    std::vector<u64> members;
    friend bool operator==(const FermatWitness&, const FermatWitness&) = default;
};

/// Every prime in `forced` has to divide σ(p6^{2a6}); this confines p6 to `residues` mod `modulus`.
struct CongruenceWitness {
    std::vector<u64> forced;
    BigInt modulus;
    std::vector<BigInt> residues;
    friend bool operator==(const CongruenceWitness&, const CongruenceWitness&) = default;
};

/// Header for a family of blocks. role "host": prime^power must divide σ(N), so some listed prime
/// must host it. role "guest": σ(prime^{2a}) > 1 needs some allowed prime factor other than prime.
struct RequirementWitness {
    std::string role;
    u64 prime = 0;
    u64 power = 1;
    std::vector<u64> primes; // the chain primes S under consideration
    friend bool operator==(const RequirementWitness&, const RequirementWitness&) = default;
};

using Witness = std::variant<CompanionWitness, NoOddOrderWitness, AbundancyWitness, FermatWitness, CongruenceWitness,
                             RequirementWitness>;

inline const char* witness_kind(const Witness& w) {
    static constexpr const char* names[] = {"companion", "no_odd_order", "abundancy", "fermat", "congruence",
                                            "requirement"};
    return names[w.index()];
}

struct Coverage {
    bool all = false;
    std::vector<u64> p6; // ascending
    friend bool operator==(const Coverage&, const Coverage&) = default;
};

struct EliminationStep {
    std::string tactic;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::string subcase;
    std::vector<Witness> witnesses;
    Coverage covered;
    friend bool operator==(const EliminationStep&, const EliminationStep&) = default;
};

enum class ChainStatus { eliminated, open };

inline const char* status_name(ChainStatus s) { return s == ChainStatus::eliminated ? "eliminated" : "open"; }

struct EliminationReport {
    Chain chain;
    std::vector<EliminationStep> steps;
    ChainStatus status = ChainStatus::open;
    std::vector<u64> open_p6;
    bool open_unbounded = false;
    std::vector<std::string> diagnostics;
    friend bool operator==(const EliminationReport&, const EliminationReport&) = default;
};

struct ChainOptions {
    /// Largest number of +2 steps tried on the exponent of 5 by the abundancy squeeze.
    u64 escalation_cap = 10;
    /// Forced fixed primes (besides 3 and 5) whose residue classes the sieve intersects.
    std::size_t sieve_extra_primes = 1;
    ScanOptions scan{};
};

// ---------------------------------------------------------------------------------------------
// Host checks

enum class HostKind { no_order, viable, conditional, blocked, undecided };

struct HostCheck {
    HostKind kind = HostKind::blocked;
    u64 r = 0, power = 1, q = 0;
    std::optional<u64> f;
    std::optional<CompanionScan> scan;
    std::optional<u64> pin;
};

/// Can r^power divide σ(q^{2a}) with every prime of σ(q^{2a}) in `allowed`? A single outside prime
/// c makes the host conditional on that prime joining the allowed set.
inline HostCheck check_host(u64 r, u64 power, u64 q, const std::vector<u64>& allowed, const ScanOptions& sopts) {
    HostCheck h;
    h.r = r;
    h.power = power;
    h.q = q;
    auto prof = f_prime_power(r, power, q);
    if (!prof.f) {
        h.kind = HostKind::no_order;
        return h;
    }
    h.f = prof.f;
    h.scan = scan_companions(q, *prof.f, allowed, sopts);
    if (h.scan->clean()) {
        h.kind = HostKind::viable;
    } else if (auto c = h.scan->sole_prime(); c && fits_u64(*c)) {
        h.kind = HostKind::conditional;
        h.pin = to_u64(*c);
    } else if (h.scan->min_distinct() >= 2) {
        h.kind = HostKind::blocked;
    } else {
        h.kind = HostKind::undecided;
    }
    return h;
}

inline CompanionWitness companion_witness(const CompanionScan& scan, u64 guest, u64 guest_power,
                                          const std::vector<u64>& allowed) {
    CompanionWitness w;
    w.host = to_u64(scan.q);
    w.length = scan.f;
    w.guest = guest;
    w.guest_power = guest_power;
    w.allowed = allowed;
    w.companions = scan.extraneous;
    switch (scan.residual_kind) {
    case ResidualKind::one: w.residual_distinct = 0; break;
    case ResidualKind::composite: w.residual_distinct = 2; break;
    default: w.residual_distinct = 1; break;
    }
    return w;
}

/// Witness that r^power cannot be hosted by q (relative to `allowed`).
inline Witness block_witness(const HostCheck& h, const std::vector<u64>& allowed) {
    if (h.kind == HostKind::no_order) return NoOddOrderWitness{h.r, h.q, h.power};
    return companion_witness(*h.scan, h.r, h.power, allowed);
}

namespace detail {

inline std::vector<u64> sorted_union(std::vector<u64> a, const std::vector<u64>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

inline Factorization squares_of(const std::vector<u64>& primes, u64 five_exponent = 2) {
    std::vector<PrimePower> v;
    for (u64 p : primes) v.push_back({big(p), p == 5 ? five_exponent : 2});
    std::sort(v.begin(), v.end(), [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
    return Factorization::from_sorted_unchecked(std::move(v));
}

inline std::string join(const std::vector<u64>& v, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
    return s;
}

inline bool is_fermat_prime(u64 p) { return p == 3 || p == 5 || p == 17 || p == 257 || p == 65537; }

} // namespace detail

struct HostAnalysis {
    bool feasible = true;
    std::string reason;
    std::vector<Witness> witnesses;
};

/// Concrete closure test for a fully specified prime set S (5 ∈ S, 3 ∉ S). Every r in {3} ∪ S must
/// divide some σ(q^{2a}) with q ∈ S∖{r}, and 3 must appear squared; every σ(q^{2a}) needs an
/// allowed prime factor. A pair (r, q) is usable only when repunit(q, f_r^q) is {3} ∪ S-smooth.
inline HostAnalysis host_analysis(const std::vector<u64>& S, const ScanOptions& scan_opts = {}) {
    const ScanOptions sopts = cleanliness_only(scan_opts);
    std::vector<u64> allowed = detail::sorted_union({3}, S);
    std::map<std::pair<u64, u64>, HostCheck> cache;
    auto check = [&](u64 r, u64 q) -> const HostCheck& {
        auto key = std::make_pair(r, q);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, check_host(r, 1, q, allowed, sopts)).first;
        return it->second;
    };
    HostAnalysis out;
    auto fail = [&](std::string reason, RequirementWitness req, std::vector<Witness> blocks) {
        out.feasible = false;
        out.reason = std::move(reason);
        out.witnesses.push_back(std::move(req));
        for (auto& b : blocks) out.witnesses.push_back(std::move(b));
        return out;
    };
    std::vector<u64> required = allowed;
    for (u64 r : required) {
        std::vector<u64> viable;
        std::vector<Witness> blocks;
        for (u64 q : S) {
            if (q == r) continue;
            const auto& h = check(r, q);
            if (h.kind == HostKind::viable)
                viable.push_back(q);
            else
                blocks.push_back(block_witness(h, allowed));
        }
        if (r == 3) {
            if (viable.empty())
                return fail("3 has no usable host", {"host", 3, 1, S}, std::move(blocks));
            if (viable.size() == 1) {
                auto h9 = check_host(3, 2, viable.front(), allowed, sopts);
                if (h9.kind != HostKind::viable) {
                    blocks.push_back(block_witness(h9, allowed));
                    return fail("9 | σ(N) but 3 has the single host " + std::to_string(viable.front()) +
                                    ", which cannot carry 3^2",
                                {"host", 3, 2, S}, std::move(blocks));
                }
            }
        } else if (viable.empty()) {
            return fail(std::to_string(r) + " has no usable host", {"host", r, 1, S}, std::move(blocks));
        }
    }
    for (u64 q : S) {
        bool any = false;
        std::vector<Witness> blocks;
        for (u64 r : allowed) {
            if (r == q) continue;
            const auto& h = check(r, q);
            if (h.kind == HostKind::viable) {
                any = true;
                break;
            }
            blocks.push_back(block_witness(h, allowed));
        }
        if (!any)
            return fail("no allowed prime can divide σ(" + std::to_string(q) + "^{2a})", {"guest", q, 1, S},
                        std::move(blocks));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Tactics. Each examines the whole chain on its own; eliminate_all takes the union of coverage.

inline const std::vector<std::string>& default_tactic_order() {
    static const std::vector<std::string> order{"fermat", "abundancy_squeeze", "sigma5_closure", "congruence_sieve"};
    return order;
}

namespace detail {

inline Coverage finish_coverage(const Chain& chain, std::vector<u64> covered) {
    std::sort(covered.begin(), covered.end());
    covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
    Coverage c;
    if (chain.p6.bounded() && covered.size() == chain.p6_values().size()) {
        c.all = true;
    } else {
        c.p6 = std::move(covered);
    }
    return c;
}

} // namespace detail

/// A Fermat prime F | N needs a prime factor ≡ 1 (mod 2F).
inline std::vector<EliminationStep> tactic_fermat(const Chain& chain, const ChainOptions& = {}) {
    std::vector<EliminationStep> steps;
    for (u64 F : chain.fixed_primes) {
        if (!detail::is_fermat_prime(F)) continue;
        u64 m = 2 * F;
        bool fixed_has = std::any_of(chain.fixed_primes.begin(), chain.fixed_primes.end(),
                                     [&](u64 p) { return p % m == 1; });
        if (fixed_has) continue;
        EliminationStep step;
        step.tactic = "fermat";
        step.parameters = {{"fermat_prime", std::to_string(F)}, {"modulus", std::to_string(m)}};
        if (!chain.p6.bounded()) {
            step.subcase = "p6 must be ≡ 1 (mod " + std::to_string(m) + "); unbounded range not covered";
            steps.push_back(std::move(step));
            continue;
        }
        std::vector<u64> covered;
        for (u64 p : chain.p6_values())
            if (p % m != 1) covered.push_back(p);
        step.subcase = "p6 ≢ 1 (mod " + std::to_string(m) + ")";
        step.witnesses.push_back(FermatWitness{F, m, chain.fixed_primes});
        step.covered = detail::finish_coverage(chain, std::move(covered));
        steps.push_back(std::move(step));
    }
    return steps;
}

namespace detail {

/// Smallest even x in [4, 2 + 2·cap] with I(5^x·rest) ≥ bound (strictly greater when strict).
inline std::optional<u64> squeeze_threshold(const std::vector<u64>& primes, u64 cap, bool strict) {
    for (u64 x = 4; x <= 2 + 2 * cap; x += 2) {
        ExactRatio v = abundancy(squares_of(primes, x));
        if (strict ? v > ten_abundancy() : v >= ten_abundancy()) return x;
    }
    return std::nullopt;
}

} // namespace detail

/// Exact lower bounds on I(N) at minimal exponents, then a bounded escalation of the exponent of 5:
/// if I(5^x·…) already reaches 9/5, the exponent of 5 is below x and σ(5^{2a}) is one of finitely
/// many values whose outside primes must fit in the single p6 slot.
inline std::vector<EliminationStep> tactic_abundancy_squeeze(const Chain& chain, const ChainOptions& opts = {}) {
    std::vector<EliminationStep> steps;
    const auto& fixed = chain.fixed_primes;
    const std::vector<u64> a0 = detail::sorted_union({3}, fixed);
    const std::string cap = std::to_string(opts.escalation_cap);

    ExactRatio base = abundancy(detail::squares_of(fixed));
    if (base >= ten_abundancy()) {
        EliminationStep s;
        s.tactic = "abundancy_squeeze";
        s.parameters = {{"level", "base"}};
        s.subcase = "I(fixed primes squared) = " + base.to_string() + " ≥ 9/5 before p6 is added";
        s.witnesses.push_back(AbundancyWitness{detail::squares_of(fixed), base, false});
        s.covered.all = true;
        steps.push_back(std::move(s));
        return steps;
    }

    // Chain-level escalation on the exponent of 5 (p6 absent, so ≥ suffices).
    if (auto thr = detail::squeeze_threshold(fixed, opts.escalation_cap, false)) {
        EliminationStep s;
        s.tactic = "abundancy_squeeze";
        s.parameters = {{"level", "escalation"}, {"threshold", std::to_string(*thr)}, {"cap", cap}};
        auto lower = detail::squares_of(fixed, *thr);
        s.witnesses.push_back(AbundancyWitness{lower, abundancy(lower), false});
        bool all_dead = true;
        std::vector<u64> survivors;
        std::string sub = "I(5^" + std::to_string(*thr) + "·rest^2) ≥ 9/5 so 2a1 < " + std::to_string(*thr);
        for (u64 x = 2; x < *thr; x += 2) {
            auto scan = scan_companions(5, x + 1, a0, opts.scan);
            if (scan.clean()) {
                all_dead = false;
                sub += "; 2a1=" + std::to_string(x) + " unconstrained";
                continue;
            }
            auto w = companion_witness(scan, 0, 1, a0);
            if (scan.min_distinct() >= 2) {
                s.witnesses.push_back(std::move(w));
                sub += "; 2a1=" + std::to_string(x) + " needs two outside primes";
                continue;
            }
            auto c = scan.sole_prime();
            if (!c || !fits_u64(*c)) {
                all_dead = false;
                sub += "; 2a1=" + std::to_string(x) + " undecided";
                continue;
            }
            u64 pin = to_u64(*c);
            s.witnesses.push_back(std::move(w));
            if (!chain.p6.contains(pin)) {
                sub += "; 2a1=" + std::to_string(x) + " forces p6=" + std::to_string(pin) + " outside the range";
                continue;
            }
            auto pinned = detail::squares_of(chain.with(pin), x);
            ExactRatio v = abundancy(pinned);
            if (v > ten_abundancy()) {
                s.witnesses.push_back(AbundancyWitness{pinned, v, true});
                sub += "; 2a1=" + std::to_string(x) + " forces p6=" + std::to_string(pin) + ", then I > 9/5";
            } else {
                all_dead = false;
                survivors.push_back(pin);
                sub += "; 2a1=" + std::to_string(x) + " leaves p6=" + std::to_string(pin);
            }
        }
        s.subcase = sub;
        if (all_dead) {
            s.covered.all = true;
            steps.push_back(std::move(s));
            return steps;
        }
        steps.push_back(std::move(s));
    }

    if (!chain.p6.bounded()) return steps;

    // Per-p6: minimal exponents, then escalation with p6 present (strict).
    EliminationStep minimal;
    minimal.tactic = "abundancy_squeeze";
    minimal.parameters = {{"level", "per_p6"}};
    minimal.subcase = "I(all six primes squared) > 9/5";
    EliminationStep esc;
    esc.tactic = "abundancy_squeeze";
    esc.parameters = {{"level", "per_p6_escalation"}, {"cap", cap}};
    esc.subcase = "exponent of 5 bounded by I, every admissible σ(5^{2a1}) has an outside prime";
    std::vector<u64> cov_min, cov_esc;
    for (u64 p6 : chain.p6_values()) {
        auto six = chain.with(p6);
        auto lower = detail::squares_of(six);
        ExactRatio v = abundancy(lower);
        if (v > ten_abundancy()) {
            cov_min.push_back(p6);
            minimal.witnesses.push_back(AbundancyWitness{lower, v, true});
            continue;
        }
        auto thr = detail::squeeze_threshold(six, opts.escalation_cap, true);
        if (!thr) continue;
        std::vector<Witness> ws;
        bool dead = true;
        auto full = detail::sorted_union(a0, {p6});
        for (u64 x = 2; x < *thr; x += 2) {
            auto scan = scan_companions(5, x + 1, full, cleanliness_only(opts.scan));
            if (scan.clean()) {
                dead = false;
                break;
            }
            ws.push_back(companion_witness(scan, 0, 1, full));
        }
        if (!dead) continue;
        auto lo = detail::squares_of(six, *thr);
        ws.insert(ws.begin(), AbundancyWitness{lo, abundancy(lo), true});
        for (auto& w : ws) esc.witnesses.push_back(std::move(w));
        cov_esc.push_back(p6);
    }
    if (!cov_min.empty()) {
        minimal.covered = detail::finish_coverage(chain, cov_min);
        steps.push_back(std::move(minimal));
    }
    if (!cov_esc.empty()) {
        esc.covered = detail::finish_coverage(chain, cov_esc);
        steps.push_back(std::move(esc));
    }
    return steps;
}

/// σ(5^{2a1}) > 1 is prime to 3 and to 5, so it needs a guest among the other chain primes; a guest r
/// drags in all of repunit(5, f_r^5).
inline std::vector<EliminationStep> tactic_sigma5_closure(const Chain& chain, const ChainOptions& opts = {}) {
    std::vector<EliminationStep> steps;
    const auto& fixed = chain.fixed_primes;
    const std::vector<u64> a0 = detail::sorted_union({3}, fixed);
    EliminationStep s;
    s.tactic = "sigma5_closure";
    s.witnesses.push_back(RequirementWitness{"guest", 5, 1, fixed});
    std::vector<u64> pins;
    std::vector<u64> unconditional;
    for (u64 r : fixed) {
        if (r == 5) continue;
        auto h = check_host(r, 1, 5, a0, opts.scan);
        switch (h.kind) {
        case HostKind::viable:
        case HostKind::undecided: unconditional.push_back(r); break;
        case HostKind::conditional:
            s.witnesses.push_back(block_witness(h, a0));
            if (chain.p6.contains(*h.pin)) pins.push_back(*h.pin);
            break;
        default: s.witnesses.push_back(block_witness(h, a0)); break;
        }
    }
    s.parameters = {{"fixed_guests", detail::join(unconditional)}, {"pins", detail::join(pins)}};
    if (!chain.p6.bounded()) {
        s.subcase = unconditional.empty() ? "only p6 or a pinned value can divide σ(5^{2a1}); unbounded range not covered"
                                          : "fixed guest available";
        steps.push_back(std::move(s));
        return steps;
    }
    std::vector<u64> covered;
    for (u64 p6 : chain.p6_values()) {
        auto full = detail::sorted_union(a0, {p6});
        auto h = check_host(p6, 1, 5, full, cleanliness_only(opts.scan));
        bool p6_ok = h.kind == HostKind::viable;
        if (!p6_ok) s.witnesses.push_back(block_witness(h, full));
        bool pinned = std::find(pins.begin(), pins.end(), p6) != pins.end();
        if (unconditional.empty() && !pinned && !p6_ok) covered.push_back(p6);
    }
    s.subcase = unconditional.empty() ? "no fixed prime can divide σ(5^{2a1}) unconditionally"
                                      : "fixed guest " + detail::join(unconditional) + " available; nothing covered";
    s.covered = detail::finish_coverage(chain, std::move(covered));
    steps.push_back(std::move(s));
    return steps;
}

/// Residue classes mod 2·∏forced for p6 and the pins that escape them.
struct SieveDerivation {
    std::vector<u64> forced;            // selected forced primes, in selection order
    std::vector<u64> all_forced;        // every required prime without a fixed host
    Congruence base{1, 2};              // single-class part (primes with one admissible residue)
    BigInt modulus = 2;
    std::vector<BigInt> residues;       // ascending classes mod `modulus`
    std::vector<u64> pins;              // p6 values opened by conditional fixed hosts
    std::vector<Witness> host_witnesses;
    std::vector<std::string> notes;
};

/// Odd-order residues t mod r: exactly those p6 ≡ t for which f_r^{p6} exists.
inline std::vector<u64> odd_order_residues(u64 r) {
    std::vector<u64> out;
    for (u64 t = 1; t < r; ++t)
        if (mult_order(t, r) % 2 == 1) out.push_back(t);
    return out;
}

inline SieveDerivation derive_congruence_classes(const Chain& chain, const ChainOptions& opts = {}) {
    SieveDerivation d;
    const auto& fixed = chain.fixed_primes;
    const std::vector<u64> a0 = detail::sorted_union({3}, fixed);
    auto pin = [&](u64 c) {
        if (chain.p6.contains(c) && std::find(d.pins.begin(), d.pins.end(), c) == d.pins.end()) d.pins.push_back(c);
    };
    std::vector<u64> forced_fixed;
    for (u64 r : a0) {
        std::vector<u64> viable;
        for (u64 q : fixed) {
            if (q == r) continue;
            auto h = check_host(r, 1, q, a0, opts.scan);
            if (h.kind == HostKind::viable || h.kind == HostKind::undecided) {
                viable.push_back(q);
            } else {
                if (h.kind == HostKind::conditional) pin(*h.pin);
                d.host_witnesses.push_back(block_witness(h, a0));
            }
        }
        bool forced = viable.empty();
        if (r == 3 && viable.size() == 1) {
            auto h9 = check_host(3, 2, viable.front(), a0, opts.scan);
            if (h9.kind == HostKind::conditional) pin(*h9.pin);
            forced = !(h9.kind == HostKind::viable || h9.kind == HostKind::undecided);
            if (forced) d.host_witnesses.push_back(block_witness(h9, a0));
        }
        if (!forced) continue;
        d.all_forced.push_back(r);
        if (r == 3 || r == 5)
            d.forced.push_back(r);
        else
            forced_fixed.push_back(r);
    }
    // Most selective first: density 2^−v2(r−1), ties to the smaller prime.
    std::stable_sort(forced_fixed.begin(), forced_fixed.end(), [](u64 a, u64 b) {
        u64 va = valuation(a - 1, 2), vb = valuation(b - 1, 2);
        return va != vb ? va > vb : a < b;
    });
    for (std::size_t i = 0; i < forced_fixed.size() && i < opts.sieve_extra_primes; ++i)
        d.forced.push_back(forced_fixed[i]);
    if (forced_fixed.size() > opts.sieve_extra_primes)
        d.notes.push_back("forced but not intersected: " +
                          detail::join({forced_fixed.begin() + static_cast<long>(opts.sieve_extra_primes),
                                        forced_fixed.end()}));

    std::vector<std::pair<u64, std::vector<u64>>> sets;
    for (u64 r : d.forced) sets.emplace_back(r, odd_order_residues(r));
    std::vector<Congruence> singles{{1, 2}};
    std::vector<std::pair<u64, std::vector<u64>>> multi;
    for (auto& [r, res] : sets) {
        if (res.size() == 1)
            singles.push_back({big(res.front()), big(r)});
        else
            multi.push_back({r, res});
    }
    d.base = crt_solve(singles);
    std::vector<Congruence> classes{d.base};
    for (const auto& [r, res] : multi) {
        std::vector<Congruence> next;
        for (const auto& c : classes)
            for (u64 t : res) next.push_back(crt_solve({c, {big(t), big(r)}}));
        classes = std::move(next);
    }
    d.modulus = classes.front().modulus;
    for (const auto& c : classes) d.residues.push_back(c.residue);
    std::sort(d.residues.begin(), d.residues.end());
    std::sort(d.pins.begin(), d.pins.end());
    return d;
}

/// Values of the chain's p6 range lying in the sieve's classes.
inline std::vector<u64> sieve_candidates(const Chain& chain, const SieveDerivation& d) {
    std::vector<u64> out;
    if (!chain.p6.bounded()) return out;
    std::set<BigInt> res(d.residues.begin(), d.residues.end());
    for (u64 p : chain.p6_values())
        if (res.count(big(p) % d.modulus)) out.push_back(p);
    return out;
}

inline std::vector<EliminationStep> tactic_congruence_sieve(const Chain& chain, const ChainOptions& opts = {}) {
    std::vector<EliminationStep> steps;
    if (!chain.p6.bounded()) {
        EliminationStep s;
        s.tactic = "congruence_sieve";
        s.subcase = "unbounded range: sieve not applicable";
        steps.push_back(std::move(s));
        return steps;
    }
    auto d = derive_congruence_classes(chain, opts);
    auto candidates = sieve_candidates(chain, d);
    std::set<u64> examine(candidates.begin(), candidates.end());
    examine.insert(d.pins.begin(), d.pins.end());

    EliminationStep cls;
    cls.tactic = "congruence_sieve";
    cls.parameters = {{"forced", detail::join(d.forced)},
                      {"modulus", d.modulus.get_str()},
                      {"classes", std::to_string(d.residues.size())},
                      {"pins", detail::join(d.pins)}};
    cls.subcase = "p6 outside the residue classes and not pinned";
    for (const auto& w : d.host_witnesses) cls.witnesses.push_back(w);
    cls.witnesses.push_back(CongruenceWitness{d.forced, d.modulus, d.residues});
    std::vector<u64> cov;
    for (u64 p : chain.p6_values())
        if (!examine.count(p)) cov.push_back(p);
    cls.covered = detail::finish_coverage(chain, cov);
    steps.push_back(std::move(cls));

    for (u64 p6 : examine) {
        auto ha = host_analysis(chain.with(p6), opts.scan);
        EliminationStep s;
        s.tactic = "congruence_sieve";
        s.parameters = {{"p6", std::to_string(p6)}, {"source", candidates.end() != std::find(candidates.begin(),
                                                                                           candidates.end(), p6)
                                                                     ? "class"
                                                                     : "pin"}};
        if (ha.feasible) {
            s.subcase = "p6=" + std::to_string(p6) + " survives the closure test";
            steps.push_back(std::move(s));
            continue;
        }
        s.subcase = "p6=" + std::to_string(p6) + ": " + ha.reason;
        s.witnesses = std::move(ha.witnesses);
        s.covered.p6 = {p6};
        if (chain.p6.bounded() && chain.p6_values().size() == 1) s.covered = {true, {}};
        steps.push_back(std::move(s));
    }
    return steps;
}

using Tactic = std::function<std::vector<EliminationStep>(const Chain&, const ChainOptions&)>;

inline Tactic tactic_by_name(const std::string& name) {
    if (name == "fermat") return tactic_fermat;
    if (name == "abundancy_squeeze") return tactic_abundancy_squeeze;
    if (name == "sigma5_closure") return tactic_sigma5_closure;
    if (name == "congruence_sieve") return tactic_congruence_sieve;
    throw std::invalid_argument("unknown tactic '" + name + "'");
}

inline EliminationReport eliminate_chain(const Chain& chain, const std::vector<std::string>& order,
                                         const ChainOptions& opts = {}) {
    EliminationReport rep;
    rep.chain = chain;
    std::set<u64> covered;
    bool all = false;
    std::vector<u64> values;
    if (chain.p6.bounded()) values = chain.p6_values();
    for (const auto& name : order) {
        auto tactic = tactic_by_name(name);
        std::vector<EliminationStep> steps;
        try {
            steps = tactic(chain, opts);
        } catch (const FactorBudgetExceeded& e) {
            rep.diagnostics.push_back(name + ": " + e.what());
            continue;
        }
        for (auto& s : steps) {
            if (s.covered.all) all = true;
            covered.insert(s.covered.p6.begin(), s.covered.p6.end());
            rep.steps.push_back(std::move(s));
        }
        if (all || (chain.p6.bounded() && covered.size() == values.size())) {
            all = true;
            break;
        }
    }
    if (all) {
        rep.status = ChainStatus::eliminated;
    } else {
        for (u64 p : values)
            if (!covered.count(p)) rep.open_p6.push_back(p);
        rep.open_unbounded = !chain.p6.bounded();
        rep.status = ChainStatus::open;
    }
    return rep;
}

/// Runs the tactics on each chain (in parallel across chains); reports come back in chain order.
inline std::vector<EliminationReport> eliminate_all(const std::vector<Chain>& chains,
                                                    const std::vector<std::string>& order = default_tactic_order(),
                                                    const ChainOptions& opts = {}, unsigned jobs = 1) {
    for (const auto& name : order) (void)tactic_by_name(name);
    std::vector<EliminationReport> out(chains.size());
    std::vector<std::exception_ptr> errors(chains.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < chains.size();) {
            try {
                out[i] = eliminate_chain(chains[i], order, opts);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(chains.size(), 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Independent witness checks

inline bool verify_witness(const Witness& w) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, CompanionWitness>) {
                if (x.host < 2 || x.length == 0) return false;
                if (x.guest != 0) {
                    auto prof = f_prime_power(x.guest, x.guest_power, x.host);
                    if (!prof.f || *prof.f != x.length) return false;
                }
                BigInt r = repunit(x.host, x.length);
                for (const auto& c : x.companions) {
                    if (!is_prime(c) || r % c != 0) return false;
                    if (fits_u64(c) && std::find(x.allowed.begin(), x.allowed.end(), to_u64(c)) != x.allowed.end())
                        return false;
                }
                for (u64 a : x.allowed) detail::strip(r, big(a));
                for (const auto& c : x.companions) detail::strip(r, c);
                if (x.residual_distinct >= 1 && r == 1) return false;
                if (x.residual_distinct >= 2) {
                    if (is_prime(r)) return false;
                    auto [root, k] = detail::perfect_power(r);
                    if (k > 1 && is_prime(root)) return false;
                }
                return x.min_distinct() >= 1;
            } else if constexpr (std::is_same_v<T, NoOddOrderWitness>) {
                return !f_prime_power(x.prime, x.power, x.host).f.has_value();
            } else if constexpr (std::is_same_v<T, AbundancyWitness>) {
                ExactRatio v = abundancy(x.lower);
                if (!(v == x.value)) return false;
                return x.strict ? v > ten_abundancy() : v >= ten_abundancy();
            } else if constexpr (std::is_same_v<T, FermatWitness>) {
                if (!detail::is_fermat_prime(x.fermat) || x.modulus != 2 * x.fermat) return false;
                return std::none_of(x.members.begin(), x.members.end(), [&](u64 p) { return p % x.modulus == 1; });
            } else if constexpr (std::is_same_v<T, CongruenceWitness>) {
                // Recompute the classes from the forced primes.
                std::vector<Congruence> classes{{1, 2}};
                for (u64 r : x.forced) {
                    std::vector<Congruence> next;
                    for (const auto& c : classes)
                        for (u64 t : odd_order_residues(r)) next.push_back(crt_solve({c, {big(t), big(r)}}));
                    classes = std::move(next);
                }
                std::vector<BigInt> res;
                for (const auto& c : classes) res.push_back(c.residue);
                std::sort(res.begin(), res.end());
                return classes.front().modulus == x.modulus && res == x.residues;
            } else {
                return x.prime != 0 && (x.role == "host" || x.role == "guest");
            }
        },
        w);
}

/// Checks every witness of a step, plus the step-level claims that need the coverage list.
inline bool verify_step(const EliminationStep& step, const Chain& chain) {
    for (const auto& w : step.witnesses)
        if (!verify_witness(w)) return false;
    std::vector<u64> covered = step.covered.all && chain.p6.bounded() ? chain.p6_values() : step.covered.p6;
    for (const auto& w : step.witnesses) {
        if (const auto* c = std::get_if<CongruenceWitness>(&w)) {
            std::set<BigInt> res(c->residues.begin(), c->residues.end());
            for (u64 p : covered)
                if (res.count(big(p) % c->modulus)) return false;
        }
        if (const auto* f = std::get_if<FermatWitness>(&w)) {
            for (u64 p : covered)
                if (p % f->modulus == 1) return false;
        }
    }
    // Host-analysis steps: every host of the announced requirement is blocked.
    const RequirementWitness* req = nullptr;
    std::vector<const Witness*> blocks;
    for (const auto& w : step.witnesses) {
        if (const auto* r = std::get_if<RequirementWitness>(&w)) {
            req = r;
        } else {
            blocks.push_back(&w);
        }
    }
    if (req && step.tactic == "congruence_sieve" && covered.size() == 1) {
        auto blocked = [&](u64 r, u64 q, u64 power) {
            for (const auto* b : blocks) {
                if (const auto* c = std::get_if<CompanionWitness>(b))
                    if (c->guest == r && c->host == q && c->guest_power == power) return true;
                if (const auto* n = std::get_if<NoOddOrderWitness>(b))
                    if (n->prime == r && n->host == q && n->power == power) return true;
            }
            return false;
        };
        const auto& S = req->primes;
        if (req->role == "host") {
            std::vector<u64> open;
            for (u64 q : S)
                if (q != req->prime && !blocked(req->prime, q, 1)) open.push_back(q);
            if (req->power == 1) return open.empty();
            return open.empty() || (open.size() == 1 && blocked(req->prime, open.front(), 2));
        }
        std::vector<u64> allowed = detail::sorted_union({3}, S);
        for (u64 r : allowed)
            if (r != req->prime && !blocked(r, req->prime, 1)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------------------------
// Tables

struct CompanionColumn {
    u64 prime = 0;
    std::optional<u64> f;
    std::vector<BigInt> companions;
    friend bool operator==(const CompanionColumn&, const CompanionColumn&) = default;
};

struct CompanionRow {
    u64 p6 = 0;
    BigInt residue;
    BigInt modulus;
    std::vector<CompanionColumn> columns;
    u64 chosen_prime = 0;           // 0 when no column has a companion
    std::optional<BigInt> chosen_companion;
    friend bool operator==(const CompanionRow&, const CompanionRow&) = default;
};

/// For each sieve-class value of p6: the primes outside {3} ∪ fixed ∪ {p6} dividing
/// repunit(p6, f_r^{p6}) for each forced r. The chosen pair is the first forced prime with a
/// companion and its smallest companion.
inline std::vector<CompanionRow> companion_table(const Chain& chain, const ChainOptions& opts = {}) {
    auto d = derive_congruence_classes(chain, opts);
    std::vector<CompanionRow> rows;
    for (u64 p6 : sieve_candidates(chain, d)) {
        CompanionRow row;
        row.p6 = p6;
        row.modulus = d.modulus;
        row.residue = big(p6) % d.modulus;
        auto allowed = detail::sorted_union(detail::sorted_union({3}, chain.fixed_primes), {p6});
        for (u64 r : d.forced) {
            CompanionColumn col;
            col.prime = r;
            col.f = f_pq(r, p6).f;
            if (col.f) {
                ScanOptions full = opts.scan;
                full.full_factor_bits = 256;
                auto scan = scan_companions(p6, *col.f, allowed, full);
                col.companions = scan.extraneous;
                if (scan.residual > 1) col.companions.push_back(scan.residual);
                std::sort(col.companions.begin(), col.companions.end());
            }
            if (!row.chosen_companion && !col.companions.empty()) {
                row.chosen_prime = r;
                row.chosen_companion = col.companions.front();
            }
            row.columns.push_back(std::move(col));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct OrderPair {
    u64 p = 0;
    u64 power = 1;
    u64 q = 0;
    friend bool operator==(const OrderPair&, const OrderPair&) = default;
};

/// The (p, q) pairs whose f values drive the chain eliminations (prime-power rows carry power > 1).
inline std::vector<OrderPair> default_order_pairs() {
    static const std::vector<OrderPair> pairs = {
        {31, 1, 5},        {11, 1, 5},      {71, 1, 5},       {19, 1, 5},       {829, 1, 5},
        {305175781, 1, 5}, {191, 1, 5},     {6271, 1, 5},     {8971, 1, 5},     {59, 1, 5},
        {35671, 1, 5},     {211, 1, 5},     {79, 1, 5},       {131, 1, 5},      {269, 1, 5},
        {1609, 1, 5},      {139, 1, 5},     {419, 1, 5},      {3, 1, 7},        {19, 1, 7},
        {3, 2, 7},         {37, 1, 7},      {5, 1, 11},       {3221, 1, 11},    {3, 1, 13},
        {61, 1, 13},       {3, 1, 19},      {127, 1, 19},     {13, 1, 29},      {67, 1, 29},
        {3, 1, 61},        {97, 1, 61},     {3, 1, 211},      {37, 1, 211},     {3, 1, 601},
        {9277, 1, 601},    {3, 1, 991},     {277, 1, 991},    {5, 1, 1021},     {41, 1, 1021},
        {1451, 1, 1021},   {3, 1, 1171},    {65353, 1, 1171}, {3, 1, 1231},     {37, 1, 1231},
        {5, 1, 1381},      {811, 1, 1381},  {5, 1, 1531},     {691, 1, 1531},   {3, 1, 1621},
        {9631, 1, 1621},   {3, 1, 1951},    {79, 1, 1951},    {3, 1, 2011},     {14821, 1, 2011},
        {3, 1, 2161},      {119797, 1, 2161}, {3, 1, 2341},   {37, 1, 2341},    {3, 1, 2551},
        {79, 1, 2551},     {3, 1, 2731},    {61, 1, 2731},    {3, 1, 2791},     {199807, 1, 2791},
        {5, 1, 3121},      {521, 1, 3121},  {5, 1, 3181},     {61, 1, 3181},    {5, 1, 3331},
        {41, 1, 3331},     {5, 1, 3511},    {61, 1, 3511},    {5, 1, 3571},     {101, 1, 3571},
        {5, 1, 4111},      {491, 1, 4111},  {3, 1, 5281},     {715237, 1, 5281}, {5, 1, 5521},
        {71, 1, 5521},     {5, 1, 5851},    {181, 1, 5851},   {5, 1, 6301},     {31, 1, 6301},
        {3, 1, 6451},      {152461, 1, 6451}, {3, 1, 6691},   {79, 1, 6691},    {5, 1, 6841},
        {61, 1, 6841},     {5, 1, 7411},    {31, 1, 7411},    {3, 1, 7621},     {223, 1, 7621},
        {5, 1, 8011},      {41, 1, 8011},   {3, 1, 8191},     {22366891, 1, 8191}, {3, 1, 8581},
        {31, 1, 8581},     {5, 1, 8641},    {3044081, 1, 8641}, {3, 1, 8971},   {271, 1, 8971},
        {3, 1, 9181},      {31, 1, 9181},   {3, 1, 9421},     {631, 1, 9421},   {3, 1, 10141},
        {43, 1, 10141},    {3, 1, 10531},   {157, 1, 10531},  {5, 1, 11131},    {31, 1, 11131},
        {3, 1, 11311},     {37, 1, 11311},  {3, 1, 11701},    {97, 1, 11701},   {3, 1, 12301},
        {31, 1, 12301},    {5, 1, 12541},   {151, 1, 12541},  {3, 1, 13711},    {61, 1, 13711},
        {3, 1, 14251},     {5207827, 1, 14251}, {3, 1, 14431}, {157, 1, 14431}, {5, 1, 14821},
        {271, 1, 14821},   {3, 1, 15031},   {199, 1, 15031},  {3, 1, 15271},    {43, 1, 15271},
        {5, 1, 15601},     {127, 1, 15601}, {3, 1, 15661},    {37, 1, 15661},   {5, 1, 15991},
        {61, 1, 15991},    {3, 1, 16381},   {1237, 1, 16381}, {3, 1, 16831},    {109, 1, 16831},
        {3, 1, 16981},     {7394137, 1, 16981}, {3, 1, 17551}, {31, 1, 17551},  {3, 1, 17761},
        {379, 1, 17761},   {3, 1, 18541},   {79, 1, 18541},   {3, 1, 19501},    {163, 1, 19501},
        {3, 1, 19891},     {331, 1, 19891}, {3, 1, 20101},    {37, 1, 20101},   {3, 1, 20341},
        {31, 1, 20341},    {5, 1, 20731},   {251, 1, 20731},
    };
    return pairs;
}

inline std::vector<OrderProfile> order_table(const std::vector<OrderPair>& pairs = default_order_pairs()) {
    std::vector<OrderProfile> out;
    out.reserve(pairs.size());
    for (const auto& pr : pairs) out.push_back(f_prime_power(pr.p, pr.power, pr.q));
    return out;
}

} // namespace solitary
