#include "egp/cli.hpp"

#include <csignal>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "egp/analysis.hpp"
#include "egp/corpus.hpp"
#include "egp/dsl.hpp"
#include "egp/error.hpp"
#include "egp/service.hpp"

namespace egp {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::unknown_node:
        case ErrorCode::invalid_argument:
        case ErrorCode::condition_on_latent:
        case ErrorCode::latent_in_set:
        case ErrorCode::unknown_edge_in_spec: return exit_usage;
        default: return exit_input;
    }
}

std::string read_text(const std::string& path, const std::string& what) {
    if (path == "-") {
        std::ostringstream out;
        out << std::cin.rdbuf();
        return out.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + what + " '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

double parse_number(const std::string& text, const std::string& flag) {
    double v = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin < end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw UsageError(flag + ": '" + text + "' is not a finite number");
    return v;
}

std::pair<std::string, std::string> split_assignment(const std::string& item, const std::string& flag) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
        throw UsageError(flag + ": expected NODE=VALUE, got '" + item + "'");
    return {item.substr(0, eq), item.substr(eq + 1)};
}

json coefficient_list(const std::vector<std::string>& items) {
    json out = json::array();
    for (const auto& item : items) {
        auto [edge, value] = split_assignment(item, "--coef");
        const auto arrow = edge.find("->");
        if (arrow == std::string::npos || arrow == 0 || arrow + 2 == edge.size())
            throw UsageError("--coef: expected FROM->TO=VALUE, got '" + item + "'");
        out.push_back({{"from", edge.substr(0, arrow)},
                       {"to", edge.substr(arrow + 2)},
                       {"value", parse_number(value, "--coef")}});
    }
    return out;
}

std::string braces(const Report& set) {
    std::string out = "{";
    for (std::size_t i = 0; i < set.size(); ++i) out += (i ? ", " : "") + set[i].get<std::string>();
    return out + "}";
}

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

struct Options {
    std::string file;
    bool json = false;
    std::string exposure;
    std::string outcome;
    std::vector<std::string> x, y, given, set, do_items, coef;
    std::string single_x, single_y;
    std::string mutilate = "none";
    std::string instrument;
    std::string data, out_file, method = "adjust", correction = "holm", assignment = "threshold";
    std::size_t max_size = kDefaultMaxAdjustmentSize, max_count = kDefaultMaxAdjustmentCount;
    std::size_t max_cond = 3, limit = kDefaultPathLimit, n = 0;
    std::uint64_t seed = 0;
    double alpha = 0.01;
    std::vector<double> strengths;
    bool canonical = false, potential_outcomes = false, replay = false;
    std::string show, dir, host = "127.0.0.1";
    int port = 8080;
};

void render_human(QueryKind kind, const Report& r, const Options& o, std::ostream& out) {
    switch (kind) {
        case QueryKind::parse: {
            if (o.canonical) {
                out << r["canonical"].get<std::string>();
                break;
            }
            const auto& g = r["graph"];
            out << "ok: dag " << (g["name"].get<std::string>().empty() ? "(unnamed)" : g["name"].get<std::string>())
                << ", " << g["nodes"].size() << " nodes, " << g["edges"].size() << " edges\n";
            for (const auto& w : r["warnings"])
                out << "warning: " << w["span"]["line"].get<std::size_t>() << ":"
                    << w["span"]["column"].get<std::size_t>() << ": " << w["message"].get<std::string>() << "\n";
            break;
        }
        case QueryKind::dsep:
            out << r["statement"].get<std::string>() << ": "
                << (r["separated"].get<bool>() ? "separated" : "not separated") << "\n";
            if (!r["witness"].is_null()) out << "open path: " << r["witness"]["rendered"].get<std::string>() << "\n";
            break;
        case QueryKind::paths:
            for (const auto& p : r["paths"]) {
                const bool open = p["status"] == "open";
                out << (open ? "open    " : "blocked ") << p["rendered"].get<std::string>();
                if (!p["blockers"].empty()) out << "  blocked at " << braces(p["blockers"]);
                if (!p["openers"].empty()) out << "  opened at " << braces(p["openers"]);
                out << "\n";
            }
            if (r["paths"].empty()) out << "no paths\n";
            if (r["truncated"].get<bool>()) out << "(truncated at " << o.limit << " paths)\n";
            break;
        case QueryKind::adjustment_sets:
            if (r.contains("verdict")) {
                const auto& v = r["verdict"];
                if (v["admissible"].get<bool>()) {
                    out << braces(r["query"]["set"]) << " is admissible\n";
                } else {
                    out << braces(r["query"]["set"]) << " is not admissible: " << v["violated"].get<std::string>()
                        << "\n";
                    if (!v["witness"].is_null()) out << "witness: " << v["witness"]["rendered"].get<std::string>() << "\n";
                }
                break;
            }
            for (const auto& s : r["sets"]) out << braces(s) << "\n";
            if (r["sets"].empty()) {
                out << "no admissible adjustment set\n";
                if (!r["exhausted"].get<bool>()) out << "(search limited by --max-size)\n";
            } else if (r["truncated"].get<bool>()) {
                out << "(stopped after --max-count sets)\n";
            }
            break;
        case QueryKind::iv:
            if (r["valid"].get<bool>()) {
                out << "valid instrument\n";
            } else {
                out << "invalid instrument:";
                if (!r["relevant"].get<bool>()) out << " not associated with the exposure;";
                if (!r["excluded_and_exogenous"].get<bool>()) out << " open path to the outcome once edges into the exposure are cut;";
                out << "\n";
                if (!r["witness"].is_null()) out << "witness: " << r["witness"]["rendered"].get<std::string>() << "\n";
            }
            break;
        case QueryKind::implications:
            for (const auto& s : r["implied"]) out << s["text"].get<std::string>() << "\n";
            if (r["implied"].empty()) out << "no testable implications\n";
            break;
        case QueryKind::factorize: out << r["rendered"].get<std::string>() << "\n"; break;
        case QueryKind::simulate:
            if (o.out_file.empty()) out << r["csv"].get<std::string>();
            else out << "wrote " << r["rows"].get<std::size_t>() << " rows to " << o.out_file << "\n";
            break;
        case QueryKind::estimate:
            out << "estimate " << num(r["estimate"].get<double>()) << " (se " << num(r["standard_error"].get<double>())
                << ", n " << r["n"].get<std::size_t>() << ")\n";
            if (!r["first_stage_f"].is_null()) out << "first-stage F " << num(r["first_stage_f"].get<double>()) << "\n";
            for (const auto& w : r["warnings"]) out << "warning: " << w.get<std::string>() << "\n";
            break;
        case QueryKind::testfit: {
            std::size_t rejected = 0;
            for (const auto& t : r["tests"]) {
                const bool reject = t["reject"].get<bool>();
                rejected += reject;
                out << (reject ? "reject  " : "ok      ") << t["statement"]["text"].get<std::string>()
                    << "  p=" << num(t["p_value"].get<double>()) << " adjusted=" << num(t["adjusted_p"].get<double>())
                    << "\n";
            }
            if (!r["testable"].get<bool>()) out << "untestable: the graph implies no independencies\n";
            else
                out << (r["compatible"].get<bool>() ? "compatible" : "incompatible") << " (" << rejected << " of "
                    << r["tests"].size() << " rejected)\n";
            break;
        }
        case QueryKind::sensitivity:
            out << "strength\testimate\tse\ttrue_effect\tbias\n";
            for (const auto& p : r["points"])
                out << num(p["strength"].get<double>()) << "\t" << num(p["estimate"].get<double>()) << "\t"
                    << num(p["standard_error"].get<double>()) << "\t" << num(p["true_effect"].get<double>()) << "\t"
                    << num(p["bias"].get<double>()) << "\n";
            break;
    }
}

json build_request(QueryKind kind, const Options& o, CLI::App& sub) {
    json q;
    auto given = [&](const char* flag, const char* key) {
        if (sub.count(flag)) q[key] = o.given;
    };
    auto roles = [&] {
        if (!o.exposure.empty()) q["exposure"] = o.exposure;
        if (!o.outcome.empty()) q["outcome"] = o.outcome;
    };
    auto data = [&] { q["data"] = read_text(o.data, "data file"); };
    switch (kind) {
        case QueryKind::parse: break;
        case QueryKind::dsep:
            q["x"] = o.x;
            q["y"] = o.y;
            given("--given", "given");
            break;
        case QueryKind::paths:
            q["x"] = o.single_x;
            q["y"] = o.single_y;
            given("--given", "given");
            if (sub.count("--mutilate")) q["mutilate"] = o.mutilate;
            if (sub.count("--limit")) q["limit"] = o.limit;
            break;
        case QueryKind::adjustment_sets:
            roles();
            if (sub.count("--max-size")) q["max_size"] = o.max_size;
            if (sub.count("--max-count")) q["max_count"] = o.max_count;
            if (sub.count("--set")) q["set"] = o.set;
            break;
        case QueryKind::iv:
            roles();
            q["instrument"] = o.instrument;
            given("--given", "given");
            break;
        case QueryKind::implications:
            if (sub.count("--max-cond")) q["max_cond"] = o.max_cond;
            break;
        case QueryKind::factorize:
            if (sub.count("--do")) {
                json d = json::object();
                for (const auto& item : o.do_items) {
                    if (item.find('=') == std::string::npos) {
                        std::string lower = item;
                        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                        d[item] = lower;
                    } else {
                        auto [node, symbol] = split_assignment(item, "--do");
                        d[node] = symbol;
                    }
                }
                q["do"] = d;
            }
            break;
        case QueryKind::simulate:
            q["n"] = o.n;
            q["seed"] = o.seed;
            if (sub.count("--do")) {
                if (o.do_items.size() != 1) throw UsageError("--do: simulate takes a single NODE=VALUE");
                auto [node, value] = split_assignment(o.do_items.front(), "--do");
                q["do"] = {{node, parse_number(value, "--do")}};
            }
            if (sub.count("--coef")) q["coefficients"] = coefficient_list(o.coef);
            if (o.potential_outcomes) {
                q["potential_outcomes"] = true;
                if (sub.count("--assignment")) q["assignment"] = o.assignment;
                roles();
            }
            break;
        case QueryKind::estimate:
            roles();
            data();
            q["method"] = o.method;
            if (sub.count("--set")) q["set"] = o.set;
            if (sub.count("--instrument")) q["instrument"] = o.instrument;
            break;
        case QueryKind::testfit:
            data();
            if (sub.count("--alpha")) q["alpha"] = o.alpha;
            if (sub.count("--correction")) q["correction"] = o.correction;
            if (sub.count("--max-cond")) q["max_cond"] = o.max_cond;
            break;
        case QueryKind::sensitivity:
            roles();
            q["set"] = o.set;
            q["strengths"] = o.strengths;
            if (sub.count("--n")) q["n"] = o.n;
            if (sub.count("--seed")) q["seed"] = o.seed;
            if (sub.count("--coef")) q["coefficients"] = coefficient_list(o.coef);
            break;
    }
    return q;
}

void emit_error(std::ostream& out, std::ostream& err, bool as_json, const std::string& code,
                const std::string& message) {
    if (as_json) out << render(Report{{"error", {{"code", code}, {"message", message}}}});
    else err << "egp: " << message << "\n";
}

Service* g_running = nullptr;

extern "C" void stop_service(int) {
    if (g_running) g_running->stop();
}

int run_corpus(const Options& o, std::ostream& out, std::ostream& err) {
    const auto dir = o.dir.empty() ? default_corpus_dir() : std::filesystem::path(o.dir);
    const auto entries = load_corpus(dir);
    if (!o.show.empty()) {
        for (const auto& e : entries) {
            if (e.id != o.show) continue;
            if (o.json) out << render(entry_json(e));
            else out << e.dag_source;
            return exit_ok;
        }
        emit_error(out, err, o.json, "unknown_corpus_entry", "--show: no corpus entry '" + o.show + "'");
        return exit_usage;
    }
    if (!o.replay) {
        if (o.json) {
            out << render(catalog_json(entries));
        } else {
            for (const auto& e : entries) out << e.id << "\t" << e.provenance << "\n";
        }
        return exit_ok;
    }
    std::vector<ReplayReport> reports;
    for (const auto& e : entries) reports.push_back(replay(e));
    const auto summary = replay_json(reports);
    if (o.json) {
        out << render(summary);
    } else {
        for (const auto& rep : reports) {
            out << (rep.passed() ? "PASS " : "FAIL ") << rep.id << " (" << rep.results.size() << " expectations)\n";
            for (const auto& r : rep.results) {
                if (r.passed) continue;
                out << "  #" << r.index << " " << r.kind << ": mismatch at " << r.mismatch << "\n";
                if (!r.witness.is_null()) out << "  witness: " << r.witness["rendered"].get<std::string>() << "\n";
            }
        }
        out << summary["entries_passed"].get<std::size_t>() << "/" << summary["entries_total"].get<std::size_t>()
            << " entries passed\n";
    }
    return summary["passed"].get<bool>() ? exit_ok : exit_negative;
}

int run_serve(const Options& o, std::ostream& out) {
    ServiceOptions so;
    so.host = o.host;
    so.port = o.port;
    if (!o.dir.empty()) so.corpus_dir = o.dir;
    Service service(so);
    const int port = service.bind();
    out << "listening on http://" << o.host << ":" << port << "\n" << std::flush;
    g_running = &service;
    std::signal(SIGINT, stop_service);
    std::signal(SIGTERM, stop_service);
    service.run();
    g_running = nullptr;
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal DAG identification workbench"};
    app.name("egp");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));
    Options o;

    struct Sub {
        CLI::App* app;
        std::optional<QueryKind> kind;
    };
    std::vector<Sub> subs;
    auto query = [&](const char* name, const char* help, QueryKind kind) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("file", o.file, "DAG file ('-' reads stdin)")->required();
        s->add_flag("--json", o.json, "Print one JSON report");
        subs.push_back({s, kind});
        return s;
    };
    auto roles = [&](CLI::App* s) {
        s->add_option("--exposure", o.exposure, "Exposure node (defaults to the declared one)");
        s->add_option("--outcome", o.outcome, "Outcome node (defaults to the declared one)");
    };

    auto* check = query("check", "Validate a DAG file", QueryKind::parse);
    check->add_flag("--canonical", o.canonical, "Print the canonical serialization");

    auto* dsep = query("dsep", "Decide d-separation", QueryKind::dsep);
    dsep->add_option("--x", o.x, "First node set")->required()->delimiter(',');
    dsep->add_option("--y", o.y, "Second node set")->required()->delimiter(',');
    dsep->add_option("--given", o.given, "Conditioning set (defaults to adjusted nodes)")->delimiter(',');

    auto* paths = query("paths", "Enumerate paths with blocking status", QueryKind::paths);
    paths->add_option("--x", o.single_x, "Start node")->required();
    paths->add_option("--y", o.single_y, "End node")->required();
    paths->add_option("--given", o.given, "Conditioning set")->delimiter(',');
    paths->add_option("--mutilate", o.mutilate, "Cut edges into (in) or out of (out) --x first")
        ->check(CLI::IsMember({"none", "in", "out"}));
    paths->add_option("--limit", o.limit, "Maximum number of paths")->check(CLI::PositiveNumber);

    auto* adjust = query("adjust", "Find minimal adjustment sets", QueryKind::adjustment_sets);
    roles(adjust);
    adjust->add_option("--max-size", o.max_size, "Largest set size searched");
    adjust->add_option("--max-count", o.max_count, "Stop after this many sets")->check(CLI::PositiveNumber);
    adjust->add_option("--set", o.set, "Check this set against the backdoor criterion")->delimiter(',');

    auto* iv = query("iv", "Check a conditional instrument", QueryKind::iv);
    roles(iv);
    iv->add_option("--instrument", o.instrument, "Instrument node")->required();
    iv->add_option("--given", o.given, "Covariates")->delimiter(',');

    auto* implications = query("implications", "List testable implications", QueryKind::implications);
    implications->add_option("--max-cond", o.max_cond, "Largest conditioning set");

    auto* factorize = query("factorize", "Render the (truncated) factorization", QueryKind::factorize);
    factorize->add_option("--do", o.do_items, "Intervened nodes, V or V=symbol")->delimiter(',');

    auto* simulate = query("simulate", "Sample from a linear-Gaussian SEM", QueryKind::simulate);
    simulate->add_option("--n", o.n, "Rows")->required();
    simulate->add_option("--seed", o.seed, "Random seed")->required();
    simulate->add_option("--do", o.do_items, "Intervention V=x");
    simulate->add_option("--out", o.out_file, "CSV output file");
    simulate->add_option("--coef", o.coef, "Coefficients FROM->TO=VALUE")->delimiter(',');
    simulate->add_flag("--potential-outcomes", o.potential_outcomes, "Binary exposure with potential outcomes");
    simulate->add_option("--assignment", o.assignment, "threshold or randomized")
        ->check(CLI::IsMember({"threshold", "randomized"}));
    roles(simulate);

    auto* estimate = query("estimate", "Estimate the effect from data", QueryKind::estimate);
    roles(estimate);
    estimate->add_option("--data", o.data, "CSV data file")->required();
    estimate->add_option("--method", o.method, "naive, adjust or iv")->check(CLI::IsMember({"naive", "adjust", "iv"}));
    estimate->add_option("--set", o.set, "Adjustment set, or covariates for iv")->delimiter(',');
    estimate->add_option("--instrument", o.instrument, "Instrument for iv");

    auto* testfit = query("testfit", "Test implications against data", QueryKind::testfit);
    testfit->add_option("--data", o.data, "CSV data file")->required();
    testfit->add_option("--alpha", o.alpha, "Significance level");
    testfit->add_option("--correction", o.correction, "holm or none")->check(CLI::IsMember({"holm", "none"}));
    testfit->add_option("--max-cond", o.max_cond, "Largest conditioning set");

    auto* sensitivity = query("sensitivity", "Sweep an added hidden confounder", QueryKind::sensitivity);
    roles(sensitivity);
    sensitivity->add_option("--set", o.set, "Adjustment set")->required()->delimiter(',');
    sensitivity->add_option("--strengths", o.strengths, "Confounder strengths")->required()->delimiter(',');
    sensitivity->add_option("--n", o.n, "Rows per strength");
    sensitivity->add_option("--seed", o.seed, "Random seed");
    sensitivity->add_option("--coef", o.coef, "Coefficients FROM->TO=VALUE")->delimiter(',');

    auto* corpus = app.add_subcommand("corpus", "List or replay the bundled corpus");
    corpus->add_flag("--replay", o.replay, "Replay every expectation");
    corpus->add_option("--show", o.show, "Print one entry");
    corpus->add_option("--dir", o.dir, "Corpus directory (default: EGP_CORPUS_DIR or the bundled one)");
    corpus->add_flag("--json", o.json, "Print one JSON report");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--port", o.port, "Port (0 picks a free one)");
    serve->add_option("--host", o.host, "Bind address");
    serve->add_option("--corpus", o.dir, "Corpus directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version() << "\n";
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        const bool wants_json = std::find(args.begin(), args.end(), "--json") != args.end();
        emit_error(out, err, wants_json, "usage", e.what());
        return exit_usage;
    }

    // `--given ""` spells the empty set.
    for (auto* list : {&o.x, &o.y, &o.given, &o.set, &o.do_items, &o.coef})
        std::erase(*list, std::string());

    try {
        if (corpus->parsed()) return run_corpus(o, out, err);
        if (serve->parsed()) return run_serve(o, out);
        for (const auto& s : subs) {
            if (!s.app->parsed()) continue;
            const auto kind = *s.kind;
            json body = build_request(kind, o, *s.app);
            body["dag"] = read_text(o.file, "DAG file");
            Report report;
            try {
                report = analyze(kind, body);
            } catch (const ParseError& e) {
                if (o.json) out << render(error_report(e));
                else err << o.file << ":" << e.what() << "\n";
                return exit_input;
            }
            if (kind == QueryKind::simulate && !o.out_file.empty()) {
                std::ofstream file(o.out_file, std::ios::binary);
                if (!file) throw InputError("--out: cannot write '" + o.out_file + "'");
                file << report["csv"].get<std::string>();
            }
            if (o.json) out << render(report);
            else render_human(kind, report, o, out);
            return analysis_negative(kind, report) ? exit_negative : exit_ok;
        }
    } catch (const UsageError& e) {
        emit_error(out, err, o.json, "usage", e.what());
        return exit_usage;
    } catch (const InputError& e) {
        emit_error(out, err, o.json, "io_error", e.what());
        return exit_input;
    } catch (const Error& e) {
        if (o.json) {
            out << render(error_report(e));
        } else {
            const bool data_fault = e.code() == ErrorCode::io_error || e.code() == ErrorCode::missing_column;
            err << "egp: " << (data_fault && !o.data.empty() ? o.data + ": " : "") << e.what() << "\n";
        }
        return exit_code_for(e.code());
    }
    return exit_usage;
}

} // namespace egp
