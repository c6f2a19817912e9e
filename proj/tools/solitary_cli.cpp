#include <solitary/solitary.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>

using namespace solitary;
namespace io = solitary::io;

namespace {

enum Exit { ok = 0, rejected = 1, usage = 2, incomplete = 3, budget = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Integer or factor expression. Plain integers get factored; expressions are taken as written.
Factorization parse_input(const std::string& text, const FactorOptions& fo) {
    if (text.find_first_of("^*") != std::string::npos) return Factorization::parse(text, fo);
    BigInt n = parse_bigint(text);
    if (n < 1) throw std::invalid_argument("expected a positive integer");
    return factorize(n, fo);
}

/// "25", "1e12", "10^12".
BigInt parse_bound(const std::string& text) {
    if (auto e = text.find_first_of("eE"); e != std::string::npos) {
        BigInt mant = parse_bigint(text.substr(0, e));
        return mant * pow(big(10), detail::parse_u64_value("--max", text.substr(e + 1)));
    }
    if (auto c = text.find('^'); c != std::string::npos)
        return pow(parse_bigint(text.substr(0, c)), detail::parse_u64_value("--max", text.substr(c + 1)));
    return parse_bigint(text);
}

std::vector<std::string> split(const std::string& s) { return detail::split_list(s); }

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;
    void open(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path, std::ios::binary);
        if (!file) throw UsageError("cannot write to '" + path + "'");
        os = &file;
    }
};

std::string ratio_text(const ExactRatio& r, bool decimal) {
    std::string s = r.to_string();
    if (decimal) {
        std::ostringstream os;
        os.precision(17);
        os << s << " (approx. " << r.approx() << ")";
        return os.str();
    }
    return s;
}

// ---------------------------------------------------------------------------------------------

class RecordSink : public ReportSink {
public:
    RecordSink(std::ostream& os, std::string format) : os_(os), format_(std::move(format)) {
        if (format_ == "csv") io::csv_row(os_, io::filter_csv_header());
    }
    void on_report(const FilterReport& r) override {
        if (format_ == "json")
            os_ << io::to_json(r).dump() << "\n";
        else if (format_ == "csv")
            io::csv_row(os_, io::filter_csv_fields(r));
        else
            os_ << r.candidate.value().get_str() << " = " << r.candidate.to_string() << "  "
                << (r.verdict == Verdict::pass ? "pass" : "reject " + r.rejections.front().condition) << "\n";
    }

private:
    std::ostream& os_;
    std::string format_;
};

int run_check(const std::string& input, const std::string& conds, const std::string& format, const FactorOptions& fo,
              Output& out) {
    Factorization n = parse_input(input, fo);
    CheckOptions opts;
    opts.factor = fo;
    if (!conds.empty()) {
        opts.conditions.clear();
        for (const auto& c : split(conds)) opts.conditions.push_back(parse_condition(c));
    }
    auto rep = check_candidate(n, opts);
    if (format == "json")
        *out.os << io::to_json(rep).dump(2) << "\n";
    else if (format == "csv") {
        io::csv_row(*out.os, io::filter_csv_header());
        io::csv_row(*out.os, io::filter_csv_fields(rep));
    } else
        *out.os << io::render_text(rep);
    return rep.verdict == Verdict::reject ? rejected : ok;
}

int run_search(const std::string& max_text, unsigned jobs, const std::string& format, bool summary_only,
               u64 audit_every, const FactorOptions& fo, Output& out) {
    BigInt max_n = parse_bound(max_text);
    if (max_n < 25) throw UsageError("--max must be at least 25");
    SearchOptions opts;
    opts.jobs = jobs;
    opts.audit_every = audit_every;
    opts.check.factor = fo;
    std::unique_ptr<ReportSink> sink;
    bool records_to_stdout = out.os == &std::cout;
    if (summary_only)
        sink = std::make_unique<NullSink>();
    else
        sink = std::make_unique<RecordSink>(*out.os, format);
    auto sum = search_range(max_n, *sink, opts);
    // the summary goes to stdout, or to the end of the record stream when that is stdout
    if (format == "json") {
        io::Json j;
        j["summary"] = io::to_json(sum);
        std::cout << j.dump() << "\n";
    } else if (format == "csv" && records_to_stdout && !summary_only) {
        std::cerr << io::render_text(sum);
    } else if (format == "csv") {
        io::csv_row(std::cout, {"max_n", "examined", "rejected", "friends", "audited", "audit_failures"});
        io::csv_row(std::cout, {sum.max_n.get_str(), std::to_string(sum.examined), std::to_string(sum.rejected),
                                std::to_string(sum.friends.size()), std::to_string(sum.audited),
                                std::to_string(sum.audit_failures)});
    } else {
        std::cout << io::render_text(sum);
    }
    return ok;
}

struct TableSet {
    std::vector<OrderProfile> orders;
    Chain chain;
    std::vector<CompanionRow> companions;
};

TableSet build_tables(const ChainOptions& copts) {
    TableSet t;
    t.orders = order_table();
    // the sieve tables belong to the widest bounded chain
    auto chains = enumerate_chains();
    const Chain* widest = nullptr;
    for (const auto& c : chains)
        if (c.p6.bounded() && (!widest || *c.p6.hi - c.p6.lo > *widest->p6.hi - widest->p6.lo)) widest = &c;
    if (widest) {
        t.chain = *widest;
        t.companions = companion_table(*widest, copts);
    }
    return t;
}

void emit_tables(const TableSet& t, const std::string& format, const std::string& which, std::ostream& os) {
    bool all = which == "all";
    if (format == "json") {
        io::Json j;
        if (all || which == "orders") {
            io::Json rows = io::Json::array();
            for (const auto& r : t.orders) rows.push_back(io::to_json(r));
            j["orders"] = rows;
        }
        if (all || which == "companions") {
            io::Json rows = io::Json::array();
            for (const auto& r : t.companions) rows.push_back(io::to_json(r));
            j["companions"] = {{"chain", io::to_json(t.chain)}, {"rows", rows}};
        }
        os << j.dump(2) << "\n";
        return;
    }
    if (format == "csv") {
        if (all || which == "orders") io::write_orders_csv(os, t.orders);
        if (all) os << "\r\n";
        if (all || which == "companions") io::write_companion_csv(os, t.chain.id, t.companions);
        return;
    }
    if (all || which == "orders") {
        os << "f_p^q (p^j | sigma(q^{2a}) iff f | 2a+1)\n";
        for (const auto& r : t.orders) {
            os << "  p=" << r.p;
            if (r.power > 1) os << "^" << r.power;
            os << " q=" << r.q << " f=" << (r.f ? std::to_string(*r.f) : "none") << "\n";
        }
    }
    if (all || which == "companions") {
        os << "companions for chain " << t.chain.id << " " << t.chain.label() << "\n";
        for (const auto& r : t.companions) {
            os << "  p6=" << r.p6 << " (" << r.residue.get_str() << " mod " << r.modulus.get_str() << ")";
            if (r.chosen_companion)
                os << "  p=" << r.chosen_prime << " p*=" << r.chosen_companion->get_str();
            else
                os << "  no companion";
            os << "\n";
        }
    }
}

int run_chains(bool prove, bool tables, const std::string& tactics, unsigned jobs, const std::string& format,
               const ChainOptions& copts, const std::vector<std::string>& order_default, Output& out) {
    auto chains = enumerate_chains();
    std::ostream& os = *out.os;
    if (!prove && !tables) {
        if (format == "json") {
            io::Json a = io::Json::array();
            for (const auto& c : chains) a.push_back(io::to_json(c));
            os << a.dump(2) << "\n";
        } else if (format == "csv") {
            io::write_chains_csv(os, chains);
        } else {
            for (const auto& c : chains) os << "chain " << c.id << " " << c.label() << "\n";
        }
        return ok;
    }
    int code = ok;
    if (prove) {
        auto order = tactics.empty() ? order_default : split(tactics);
        for (const auto& n : order) (void)tactic_by_name(n);
        auto reports = eliminate_all(chains, order, copts, jobs);
        std::size_t eliminated = 0, bad_steps = 0;
        bool budget_hit = false;
        for (const auto& r : reports) {
            if (r.status == ChainStatus::eliminated) ++eliminated;
            else if (!r.diagnostics.empty()) budget_hit = true;
            for (const auto& s : r.steps) {
                bool good = verify_step(s, r.chain);
                for (const auto& w : s.witnesses) good = good && verify_witness(w);
                if (!good) ++bad_steps;
            }
        }
        bool complete = eliminated == reports.size() && bad_steps == 0;
        std::string verdict = complete ? "omega(N) >= 7 verified" : "proof incomplete";
        if (format == "json") {
            io::Json j;
            io::Json a = io::Json::array();
            for (const auto& r : reports) a.push_back(io::to_json(r));
            j["certificates"] = a;
            j["eliminated"] = eliminated;
            j["chains"] = reports.size();
            j["failed_checks"] = bad_steps;
            j["verdict"] = verdict;
            os << j.dump(2) << "\n";
        } else if (format == "csv") {
            io::write_certificates_csv(os, reports);
        } else {
            for (const auto& r : reports) os << io::render_text(r);
            os << eliminated << "/" << reports.size() << " chains eliminated";
            if (bad_steps) os << ", " << bad_steps << " steps failed independent checking";
            os << "\n" << verdict << "\n";
        }
        if (format != "text") std::cerr << eliminated << "/" << reports.size() << " chains eliminated\n" << verdict << "\n";
        if (!complete) code = budget_hit ? budget : incomplete;
    }
    if (tables) emit_tables(build_tables(copts), format, "all", os);
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Necessary conditions and searches for a friend of 10"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "text", out_path, config_path;
    bool decimal = false;
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--out", out_path, "Write output to this file");
    app.add_option("--config", config_path, "key=value config file (overrides SOLITARY_KIT_CONFIG)");
    app.add_flag("--decimal", decimal, "Add an approximate decimal rendering to rational outputs");

    unsigned jobs = 0;
    auto* check = app.add_subcommand("check", "Run the necessary conditions on N");
    std::string check_n, conditions;
    check->add_option("N", check_n, "Integer or factor expression such as 5^2*7^4")->required();
    check->add_option("--conditions", conditions, "Comma-separated subset of conditions");

    auto* search = app.add_subcommand("search", "Filter every N = 5^{2a}m^2 up to a bound");
    std::string max_text;
    bool summary_only = false;
    u64 audit_every = 100;
    search->add_option("--max", max_text, "Upper bound, e.g. 1e12")->required();
    search->add_option("--jobs", jobs, "Worker threads");
    search->add_flag("--summary-only", summary_only, "Skip per-candidate records");
    search->add_option("--audit-every", audit_every, "Exactly re-check every k-th rejection (0 disables)");

    auto* chains = app.add_subcommand("chains", "Six-prime chains and their elimination");
    bool prove = false, emit = false;
    std::string tactics;
    chains->add_flag("--prove", prove, "Eliminate every chain and verify the certificates");
    chains->add_flag("--emit-tables", emit, "Regenerate the order and companion tables");
    chains->add_option("--tactics", tactics, "Comma-separated tactic order");
    chains->add_option("--jobs", jobs, "Worker threads");

    auto* fpq = app.add_subcommand("fpq", "Smallest odd f with p^j | sigma(q^{f-1})");
    std::string fp, fq;
    u64 fj = 1;
    fpq->add_option("p", fp)->required();
    fpq->add_option("q", fq)->required();
    fpq->add_option("--power", fj, "j for the condition p^j | sigma(q^{2a})");

    auto* sigma_cmd = app.add_subcommand("sigma", "Sum of divisors");
    std::string sigma_n;
    sigma_cmd->add_option("N", sigma_n)->required();

    auto* ab = app.add_subcommand("abundancy", "sigma(N)/N");
    std::string ab_n;
    ab->add_option("N", ab_n)->required();

    auto* tables = app.add_subcommand("tables", "Order and companion tables");
    std::string which = "all";
    tables->add_option("--table", which, "orders, companions or all")->check(CLI::IsMember({"orders", "companions", "all"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        KitConfig cfg = config_path.empty() ? config_from_env() : load_config(config_path);
        FactorOptions fo;
        apply(cfg, fo);
        ChainOptions copts;
        apply(cfg, copts);
        std::vector<std::string> order = cfg.tactic_order ? *cfg.tactic_order : default_tactic_order();
        if (jobs == 0) jobs = cfg.jobs ? *cfg.jobs : 1;

        Output out;
        out.open(out_path);
        if (*check) return run_check(check_n, conditions, format, fo, out);
        if (*search) return run_search(max_text, jobs, format, summary_only, audit_every, fo, out);
        if (*chains) return run_chains(prove, emit, tactics, jobs, format, copts, order, out);
        if (*tables) {
            emit_tables(build_tables(copts), format, which, *out.os);
            return ok;
        }
        if (*fpq) {
            u64 p = to_u64(parse_bigint(fp)), q = to_u64(parse_bigint(fq));
            auto prof = f_prime_power(p, fj, q);
            if (format == "json")
                *out.os << io::to_json(prof).dump() << "\n";
            else
                *out.os << (prof.f ? std::to_string(*prof.f) : "none") << "\n";
            return ok;
        }
        if (*sigma_cmd) {
            auto n = parse_input(sigma_n, fo);
            BigInt s = sigma(n);
            if (format == "json")
                *out.os << io::Json{{"n", n.to_string()}, {"sigma", s.get_str()}}.dump() << "\n";
            else
                *out.os << s.get_str() << "\n";
            return ok;
        }
        if (*ab) {
            auto n = parse_input(ab_n, fo);
            auto r = abundancy(n);
            if (format == "json") {
                io::Json j{{"n", n.to_string()}, {"abundancy", r.to_string()}};
                if (decimal) j["approximate"] = r.approx();
                *out.os << j.dump() << "\n";
            } else {
                *out.os << ratio_text(r, decimal) << "\n";
            }
            return ok;
        }
    } catch (const FactorBudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return budget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
