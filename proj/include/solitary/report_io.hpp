#pragma once

#include "chains.hpp"
#include "conditions.hpp"

#include <json.hpp>

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace solitary::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------------------------
// Scalars

inline Json big_json(const BigInt& v) { return v.get_str(); }
inline BigInt big_from(const Json& j) { return j.is_string() ? parse_bigint(j.get<std::string>()) : big(j.get<u64>()); }

template <class T>
Json opt_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}
inline std::optional<u64> opt_u64(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<u64>();
}

inline Json to_json(const Factorization& f) { return f.to_string(); }
inline Factorization factorization_from_json(const Json& j) { return Factorization::parse(j.get<std::string>()); }

inline Json to_json(const ExactRatio& r) { return r.to_string(); }
inline ExactRatio ratio_from_json(const Json& j) { return ExactRatio::parse(j.get<std::string>()); }

inline Json big_list(const std::vector<BigInt>& v) {
    Json a = Json::array();
    for (const auto& x : v) a.push_back(big_json(x));
    return a;
}
inline std::vector<BigInt> big_list_from(const Json& j) {
    std::vector<BigInt> v;
    for (const auto& x : j) v.push_back(big_from(x));
    return v;
}

// ---------------------------------------------------------------------------------------------
// Filter reports and search summaries

inline Json to_json(const FilterReport& r) {
    Json j;
    j["candidate"] = to_json(r.candidate);
    j["value"] = big_json(r.candidate.value());
    j["verdict"] = r.verdict == Verdict::pass ? "pass" : "reject";
    Json rej = Json::array();
    for (const auto& x : r.rejections) rej.push_back({{"condition", x.condition}, {"witness", x.witness}});
    j["rejections"] = rej;
    j["checked"] = r.checked;
    Json sk = Json::array();
    for (const auto& x : r.skipped) sk.push_back({{"condition", x.condition}, {"reason", x.reason}});
    j["skipped"] = sk;
    return j;
}

inline FilterReport filter_report_from_json(const Json& j) {
    FilterReport r;
    r.candidate = factorization_from_json(j.at("candidate"));
    std::string v = j.at("verdict").get<std::string>();
    if (v != "pass" && v != "reject") throw std::invalid_argument("bad verdict '" + v + "'");
    r.verdict = v == "pass" ? Verdict::pass : Verdict::reject;
    for (const auto& x : j.at("rejections"))
        r.rejections.push_back({x.at("condition").get<std::string>(), x.at("witness").get<std::string>()});
    r.checked = j.at("checked").get<std::vector<std::string>>();
    for (const auto& x : j.at("skipped"))
        r.skipped.push_back({x.at("condition").get<std::string>(), x.at("reason").get<std::string>()});
    return r;
}

inline Json to_json(const SearchSummary& s) {
    Json j;
    j["max_n"] = big_json(s.max_n);
    j["examined"] = s.examined;
    j["rejected"] = s.rejected;
    Json by = Json::object();
    for (const auto& [k, v] : s.rejected_by) by[k] = v;
    j["rejected_by"] = by;
    Json sv = Json::array(), fr = Json::array();
    for (const auto& f : s.survivors) sv.push_back(to_json(f));
    for (const auto& f : s.friends) fr.push_back(to_json(f));
    j["survivors"] = sv;
    j["friends"] = fr;
    j["audited"] = s.audited;
    j["audit_failures"] = s.audit_failures;
    return j;
}

inline SearchSummary search_summary_from_json(const Json& j) {
    SearchSummary s;
    s.max_n = big_from(j.at("max_n"));
    s.examined = j.at("examined").get<u64>();
    s.rejected = j.at("rejected").get<u64>();
    for (const auto& [k, v] : j.at("rejected_by").items()) s.rejected_by[k] = v.get<u64>();
    for (const auto& f : j.at("survivors")) s.survivors.push_back(factorization_from_json(f));
    for (const auto& f : j.at("friends")) s.friends.push_back(factorization_from_json(f));
    s.audited = j.at("audited").get<u64>();
    s.audit_failures = j.at("audit_failures").get<u64>();
    return s;
}

// ---------------------------------------------------------------------------------------------
// Chains, witnesses, certificates

inline Json to_json(const Chain& c) {
    Json j;
    j["id"] = c.id;
    j["fixed_primes"] = c.fixed_primes;
    j["p6_lo"] = c.p6.lo;
    j["p6_hi"] = opt_json(c.p6.hi);
    return j;
}

inline Chain chain_from_json(const Json& j) {
    Chain c;
    c.id = j.at("id").get<std::size_t>();
    c.fixed_primes = j.at("fixed_primes").get<std::vector<u64>>();
    c.p6.lo = j.at("p6_lo").get<u64>();
    c.p6.hi = opt_u64(j.at("p6_hi"));
    return c;
}

inline Json to_json(const Witness& w) {
    Json j;
    j["kind"] = witness_kind(w);
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, CompanionWitness>) {
                j["host"] = x.host;
                j["length"] = x.length;
                j["guest"] = x.guest;
                j["guest_power"] = x.guest_power;
                j["allowed"] = x.allowed;
                j["companions"] = big_list(x.companions);
                j["residual_distinct"] = x.residual_distinct;
            } else if constexpr (std::is_same_v<T, NoOddOrderWitness>) {
                j["prime"] = x.prime;
                j["host"] = x.host;
                j["power"] = x.power;
            } else if constexpr (std::is_same_v<T, AbundancyWitness>) {
                j["lower"] = to_json(x.lower);
                j["value"] = to_json(x.value);
                j["strict"] = x.strict;
            } else if constexpr (std::is_same_v<T, FermatWitness>) {
                j["fermat"] = x.fermat;
                j["modulus"] = x.modulus;
                j["members"] = x.members;
            } else if constexpr (std::is_same_v<T, CongruenceWitness>) {
                j["forced"] = x.forced;
                j["modulus"] = big_json(x.modulus);
                j["residues"] = big_list(x.residues);
            } else {
                j["role"] = x.role;
                j["prime"] = x.prime;
                j["power"] = x.power;
                j["primes"] = x.primes;
            }
        },
        w);
    return j;
}

inline Witness witness_from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "companion") {
        CompanionWitness w;
        w.host = j.at("host").get<u64>();
        w.length = j.at("length").get<u64>();
        w.guest = j.at("guest").get<u64>();
        w.guest_power = j.at("guest_power").get<u64>();
        w.allowed = j.at("allowed").get<std::vector<u64>>();
        w.companions = big_list_from(j.at("companions"));
        w.residual_distinct = j.at("residual_distinct").get<u64>();
        return w;
    }
    if (kind == "no_odd_order")
        return NoOddOrderWitness{j.at("prime").get<u64>(), j.at("host").get<u64>(), j.at("power").get<u64>()};
    if (kind == "abundancy")
        return AbundancyWitness{factorization_from_json(j.at("lower")), ratio_from_json(j.at("value")),
                                j.at("strict").get<bool>()};
    if (kind == "fermat")
        return FermatWitness{j.at("fermat").get<u64>(), j.at("modulus").get<u64>(),
                             j.at("members").get<std::vector<u64>>()};
    if (kind == "congruence")
        return CongruenceWitness{j.at("forced").get<std::vector<u64>>(), big_from(j.at("modulus")),
                                 big_list_from(j.at("residues"))};
    if (kind == "requirement")
        return RequirementWitness{j.at("role").get<std::string>(), j.at("prime").get<u64>(), j.at("power").get<u64>(),
                                  j.at("primes").get<std::vector<u64>>()};
    throw std::invalid_argument("unknown witness kind '" + kind + "'");
}

inline Json to_json(const EliminationStep& s) {
    Json j;
    j["tactic"] = s.tactic;
    Json params = Json::object();
    for (const auto& [k, v] : s.parameters) params[k] = v;
    j["parameters"] = params;
    j["subcase"] = s.subcase;
    Json ws = Json::array();
    for (const auto& w : s.witnesses) ws.push_back(to_json(w));
    j["witnesses"] = ws;
    j["covered"] = {{"all", s.covered.all}, {"p6", s.covered.p6}};
    return j;
}

inline EliminationStep step_from_json(const Json& j) {
    EliminationStep s;
    s.tactic = j.at("tactic").get<std::string>();
    for (const auto& [k, v] : j.at("parameters").items()) s.parameters.emplace_back(k, v.get<std::string>());
    s.subcase = j.at("subcase").get<std::string>();
    for (const auto& w : j.at("witnesses")) s.witnesses.push_back(witness_from_json(w));
    s.covered.all = j.at("covered").at("all").get<bool>();
    s.covered.p6 = j.at("covered").at("p6").get<std::vector<u64>>();
    return s;
}

inline Json to_json(const EliminationReport& r) {
    Json j;
    j["chain"] = to_json(r.chain);
    j["status"] = status_name(r.status);
    Json steps = Json::array();
    for (const auto& s : r.steps) steps.push_back(to_json(s));
    j["steps"] = steps;
    j["open_p6"] = r.open_p6;
    j["open_unbounded"] = r.open_unbounded;
    j["diagnostics"] = r.diagnostics;
    return j;
}

inline EliminationReport elimination_report_from_json(const Json& j) {
    EliminationReport r;
    r.chain = chain_from_json(j.at("chain"));
    std::string st = j.at("status").get<std::string>();
    if (st != "eliminated" && st != "open") throw std::invalid_argument("bad status '" + st + "'");
    r.status = st == "eliminated" ? ChainStatus::eliminated : ChainStatus::open;
    for (const auto& s : j.at("steps")) r.steps.push_back(step_from_json(s));
    r.open_p6 = j.at("open_p6").get<std::vector<u64>>();
    r.open_unbounded = j.at("open_unbounded").get<bool>();
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    return r;
}

// ---------------------------------------------------------------------------------------------
// Tables

inline Json to_json(const OrderProfile& o) {
    Json j;
    j["p"] = o.p;
    j["power"] = o.power;
    j["q"] = o.q;
    j["k"] = o.k;
    j["f"] = opt_json(o.f);
    return j;
}

inline OrderProfile order_profile_from_json(const Json& j) {
    OrderProfile o;
    o.p = j.at("p").get<u64>();
    o.power = j.at("power").get<u64>();
    o.q = j.at("q").get<u64>();
    o.k = j.at("k").get<u64>();
    o.f = opt_u64(j.at("f"));
    return o;
}

inline Json to_json(const CompanionRow& r) {
    Json j;
    j["p6"] = r.p6;
    j["residue"] = big_json(r.residue);
    j["modulus"] = big_json(r.modulus);
    Json cols = Json::array();
    for (const auto& c : r.columns)
        cols.push_back({{"prime", c.prime}, {"f", opt_json(c.f)}, {"companions", big_list(c.companions)}});
    j["columns"] = cols;
    j["chosen_prime"] = r.chosen_prime;
    j["chosen_companion"] = r.chosen_companion ? big_json(*r.chosen_companion) : Json(nullptr);
    return j;
}

inline CompanionRow companion_row_from_json(const Json& j) {
    CompanionRow r;
    r.p6 = j.at("p6").get<u64>();
    r.residue = big_from(j.at("residue"));
    r.modulus = big_from(j.at("modulus"));
    for (const auto& c : j.at("columns"))
        r.columns.push_back({c.at("prime").get<u64>(), opt_u64(c.at("f")), big_list_from(c.at("companions"))});
    r.chosen_prime = j.at("chosen_prime").get<u64>();
    if (!j.at("chosen_companion").is_null()) r.chosen_companion = big_from(j.at("chosen_companion"));
    return r;
}

inline Json to_json(const ValuationResult& v) { return {{"q", v.q}, {"p", v.p}, {"a", v.a}, {"v", v.v}}; }

inline Json to_json(const PartitionStats& s) {
    return {{"n", s.n}, {"base", s.base}, {"min_value", big_json(s.min_value)}, {"witness", s.witness}};
}

// ---------------------------------------------------------------------------------------------
// CSV (RFC 4180)

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
    os << "\r\n";
}

/// Splits one CSV record (no embedded newlines inside the caller's string handling).
inline std::vector<std::string> csv_parse_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != '\n') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline const std::vector<std::string>& filter_csv_header() {
    static const std::vector<std::string> h{"value", "candidate", "verdict", "first_condition", "witness", "checked"};
    return h;
}

inline std::vector<std::string> filter_csv_fields(const FilterReport& r) {
    std::string checked;
    for (const auto& c : r.checked) checked += (checked.empty() ? "" : ";") + c;
    return {r.candidate.value().get_str(),
            r.candidate.to_string(),
            r.verdict == Verdict::pass ? "pass" : "reject",
            r.rejections.empty() ? "" : r.rejections.front().condition,
            r.rejections.empty() ? "" : r.rejections.front().witness,
            checked};
}

inline std::string join_big(const std::vector<BigInt>& v, const char* sep = ";") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i].get_str();
    return s;
}

inline void write_orders_csv(std::ostream& os, const std::vector<OrderProfile>& rows) {
    csv_row(os, {"p", "power", "q", "k", "f"});
    for (const auto& r : rows)
        csv_row(os, {std::to_string(r.p), std::to_string(r.power), std::to_string(r.q), std::to_string(r.k),
                     r.f ? std::to_string(*r.f) : "none"});
}

inline void write_companion_csv(std::ostream& os, std::size_t chain_id, const std::vector<CompanionRow>& rows) {
    std::vector<std::string> header{"chain", "p6", "residue", "modulus"};
    if (!rows.empty())
        for (const auto& c : rows.front().columns) header.push_back("companions_" + std::to_string(c.prime));
    header.push_back("p");
    header.push_back("p_star");
    csv_row(os, header);
    for (const auto& r : rows) {
        std::vector<std::string> f{std::to_string(chain_id), std::to_string(r.p6), r.residue.get_str(),
                                   r.modulus.get_str()};
        for (const auto& c : r.columns) f.push_back(join_big(c.companions));
        f.push_back(r.chosen_prime ? std::to_string(r.chosen_prime) : "");
        f.push_back(r.chosen_companion ? r.chosen_companion->get_str() : "");
        csv_row(os, f);
    }
}

inline void write_chains_csv(std::ostream& os, const std::vector<Chain>& chains) {
    csv_row(os, {"id", "fixed_primes", "p6_lo", "p6_hi"});
    for (const auto& c : chains)
        csv_row(os, {std::to_string(c.id), detail::join(c.fixed_primes, ";"), std::to_string(c.p6.lo),
                     c.p6.hi ? std::to_string(*c.p6.hi) : "inf"});
}

inline void write_certificates_csv(std::ostream& os, const std::vector<EliminationReport>& reports) {
    csv_row(os, {"chain", "fixed_primes", "p6_lo", "p6_hi", "status", "tactic", "subcase", "covered", "witnesses"});
    for (const auto& r : reports) {
        for (const auto& s : r.steps) {
            std::string cov = s.covered.all ? "all" : std::to_string(s.covered.p6.size());
            csv_row(os, {std::to_string(r.chain.id), detail::join(r.chain.fixed_primes, ";"),
                         std::to_string(r.chain.p6.lo), r.chain.p6.hi ? std::to_string(*r.chain.p6.hi) : "inf",
                         status_name(r.status), s.tactic, s.subcase, cov, std::to_string(s.witnesses.size())});
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Text

inline std::string render_text(const FilterReport& r) {
    std::ostringstream os;
    os << "N = " << r.candidate.to_string() << "\n";
    os << "verdict: " << (r.verdict == Verdict::pass ? "not excluded" : "rejected") << "\n";
    for (const auto& c : r.checked) {
        auto it = std::find_if(r.rejections.begin(), r.rejections.end(),
                               [&](const Rejection& x) { return x.condition == c; });
        if (it == r.rejections.end())
            os << "  pass    " << c << "\n";
        else
            os << "  reject  " << c << ": " << it->witness << "\n";
    }
    for (const auto& s : r.skipped) os << "  skipped " << s.condition << ": " << s.reason << "\n";
    return os.str();
}

inline std::string render_text(const SearchSummary& s) {
    std::ostringstream os;
    os << "searched N <= " << s.max_n.get_str() << "\n";
    os << "examined " << s.examined << ", rejected " << s.rejected << "\n";
    for (const auto& [k, v] : s.rejected_by) os << "  " << k << ": " << v << "\n";
    os << "audited " << s.audited << " rejections exactly, " << s.audit_failures << " false rejections\n";
    os << s.friends.size() << " friends found\n";
    return os.str();
}

inline std::string render_text(const EliminationReport& r) {
    std::ostringstream os;
    os << "chain " << r.chain.id << " " << r.chain.label() << ": " << status_name(r.status) << "\n";
    for (const auto& s : r.steps) {
        if (s.covered.all || !s.covered.p6.empty())
            os << "  " << s.tactic << ": " << s.subcase << " ["
               << (s.covered.all ? std::string("all") : std::to_string(s.covered.p6.size()) + " values") << ", "
               << s.witnesses.size() << " witnesses]\n";
    }
    if (!r.open_p6.empty()) os << "  open p6: " << detail::join(r.open_p6) << "\n";
    if (r.open_unbounded) os << "  open: unbounded range\n";
    for (const auto& d : r.diagnostics) os << "  note: " << d << "\n";
    return os.str();
}

} // namespace solitary::io
