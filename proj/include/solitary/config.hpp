#pragma once

#include "chains.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace solitary {

/// Run settings read from a key=value file. Unset keys keep the library defaults.
struct KitConfig {
    std::optional<u64> rho_budget;
    std::optional<int> primality_rounds;
    std::optional<std::vector<std::string>> tactic_order;
    std::optional<u64> escalation_cap;
    std::optional<std::size_t> sieve_extra_primes;
    std::optional<unsigned> jobs;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline u64 parse_u64_value(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("config: " + key + " expects a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("config: " + key + " value '" + v + "' is out of range");
    }
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace detail

/// Lines are `key = value`; `#` starts a comment. Unknown keys are errors.
inline KitConfig parse_config(std::istream& in) {
    KitConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = detail::trim(line.substr(0, eq)), val = detail::trim(line.substr(eq + 1));
        if (key == "rho_budget") {
            c.rho_budget = detail::parse_u64_value(key, val);
        } else if (key == "primality_rounds") {
            c.primality_rounds = static_cast<int>(detail::parse_u64_value(key, val));
        } else if (key == "tactic_order") {
            auto names = detail::split_list(val);
            for (const auto& n : names) (void)tactic_by_name(n);
            c.tactic_order = names;
        } else if (key == "escalation_cap") {
            c.escalation_cap = detail::parse_u64_value(key, val);
        } else if (key == "sieve_extra_primes") {
            c.sieve_extra_primes = detail::parse_u64_value(key, val);
        } else if (key == "jobs") {
            c.jobs = static_cast<unsigned>(detail::parse_u64_value(key, val));
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return c;
}

inline KitConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    return parse_config(in);
}

/// The file named by SOLITARY_KIT_CONFIG, or an empty config when the variable is unset.
inline KitConfig config_from_env() {
    const char* p = std::getenv("SOLITARY_KIT_CONFIG");
    if (!p || !*p) return {};
    return load_config(p);
}

inline void apply(const KitConfig& c, FactorOptions& f) {
    if (c.rho_budget) f.rho_budget = *c.rho_budget;
    if (c.primality_rounds) f.primality_rounds = *c.primality_rounds;
}

inline void apply(const KitConfig& c, ChainOptions& o) {
    apply(c, o.scan.factor);
    if (c.escalation_cap) o.escalation_cap = *c.escalation_cap;
    if (c.sieve_extra_primes) o.sieve_extra_primes = *c.sieve_extra_primes;
}

} // namespace solitary
