#include "egp/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "egp/dataset.hpp"
#include "egp/dsl.hpp"
#include "egp/error.hpp"
#include "egp/implications.hpp"
#include "egp/sem.hpp"

namespace egp {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<QueryKind, std::string_view>, 11> kKinds{{
    {QueryKind::parse, "parse"},
    {QueryKind::dsep, "dsep"},
    {QueryKind::paths, "paths"},
    {QueryKind::adjustment_sets, "adjustment_sets"},
    {QueryKind::iv, "iv"},
    {QueryKind::implications, "implications"},
    {QueryKind::factorize, "factorize"},
    {QueryKind::simulate, "simulate"},
    {QueryKind::estimate, "estimate"},
    {QueryKind::testfit, "testfit"},
    {QueryKind::sensitivity, "sensitivity"},
}};

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::invalid_argument, "field '" + key + "' " + why);
}

// Typed access to the query fields, rejecting unknown keys.
class Fields {
public:
    Fields(const json& body, std::initializer_list<std::string_view> allowed) : body_(body) {
        if (!body.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
        for (const auto& [key, value] : body.items()) {
            if (key == "dag" || key == "kind") continue;
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw Error(ErrorCode::invalid_argument, "unknown field '" + key + "'");
        }
    }

    bool has(const std::string& key) const { return body_.contains(key) && !body_.at(key).is_null(); }
    const json& raw(const std::string& key) const { return body_.at(key); }

    std::optional<std::string> string(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        const auto& v = body_.at(key);
        if (!v.is_string()) bad_field(key, "must be a string");
        return v.get<std::string>();
    }

    std::string required_string(const std::string& key) const {
        auto v = string(key);
        if (!v) bad_field(key, "is required");
        return *v;
    }

    std::optional<NodeSet> set(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        const auto& v = body_.at(key);
        NodeSet out;
        if (v.is_string()) {
            out.insert(v.get<std::string>());
        } else if (v.is_array()) {
            for (const auto& item : v) {
                if (!item.is_string()) bad_field(key, "must list node names");
                out.insert(item.get<std::string>());
            }
        } else {
            bad_field(key, "must be a node name or a list of node names");
        }
        return out;
    }

    NodeSet required_set(const std::string& key) const {
        auto v = set(key);
        if (!v || v->empty()) bad_field(key, "is required");
        return *v;
    }

    std::optional<std::uint64_t> unsigned_int(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        const auto& v = body_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
        bad_field(key, "must be a non-negative integer");
    }

    std::optional<double> number(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        const auto& v = body_.at(key);
        if (!v.is_number()) bad_field(key, "must be a number");
        return v.get<double>();
    }

    std::optional<bool> boolean(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        const auto& v = body_.at(key);
        if (!v.is_boolean()) bad_field(key, "must be true or false");
        return v.get<bool>();
    }

private:
    const json& body_;
};

Report names(const NodeSet& s) {
    Report out = Report::array();
    for (const auto& v : s) out.push_back(v);
    return out;
}

std::string_view arrow_name(Arrow a) {
    switch (a) {
        case Arrow::forward: return "forward";
        case Arrow::backward: return "backward";
        case Arrow::bidirected: return "bidirected";
    }
    return "forward";
}


void require_node(const CausalGraph& g, const std::string& name) {
    if (!g.contains(name)) throw Error(ErrorCode::unknown_node, "unknown node '" + name + "'");
}

void require_nodes(const CausalGraph& g, const NodeSet& s) {
    for (const auto& v : s) require_node(g, v);
}

std::string role_node(const CausalGraph& g, const Fields& f, const std::string& key) {
    if (auto v = f.string(key)) {
        require_node(g, *v);
        return *v;
    }
    const auto declared = key == "exposure" ? g.exposures() : g.outcomes();
    if (declared.size() == 1) return declared.front();
    if (declared.empty())
        throw Error(ErrorCode::invalid_argument, "graph declares no " + key + " node; name one with '" + key + "'");
    throw Error(ErrorCode::invalid_argument,
                "graph declares several " + key + " nodes; pick one with '" + key + "'");
}

// Explicit conditioning set, or the graph's adjusted nodes minus `exclude`.
NodeSet conditioning(const CausalGraph& g, const Fields& f, const std::string& key, const NodeSet& exclude) {
    if (auto s = f.set(key)) {
        require_nodes(g, *s);
        return *s;
    }
    NodeSet out;
    for (const auto& v : g.adjusted())
        if (!exclude.contains(v)) out.insert(v);
    return out;
}

Report graph_json(const CausalGraph& g) {
    Report nodes = Report::array();
    for (const auto& n : g.nodes()) {
        Report roles = Report::array();
        if (n.role.latent) roles.push_back("latent");
        if (n.role.exposure) roles.push_back("exposure");
        if (n.role.outcome) roles.push_back("outcome");
        if (n.role.adjusted) roles.push_back("adjusted");
        nodes.push_back({{"name", n.name}, {"roles", roles}});
    }
    Report edges = Report::array();
    for (const auto& e : g.edges())
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"kind", e.kind == EdgeKind::directed ? "directed" : "bidirected"}});
    Report out;
    out["name"] = g.name();
    out["nodes"] = nodes;
    out["edges"] = edges;
    return out;
}

Report span_json(const SourceSpan& s) {
    return {{"line", s.line}, {"column", s.column}, {"length", s.length}, {"offset", s.offset}};
}

Report coefficients_json(const SemModel& m) {
    Report out = Report::array();
    for (auto [from, to] : m.graph.canonical_edges()) {
        out.push_back({{"from", m.graph.display_name(from)},
                       {"to", m.graph.display_name(to)},
                       {"value", m.coefficient(m.graph.name_of(from), m.graph.name_of(to))}});
    }
    return out;
}

SemModel model_from(const CausalGraph& g, const Fields& f, std::uint64_t seed) {
    std::map<EdgeKey, double> spec;
    if (f.has("coefficients")) {
        const auto& list = f.raw("coefficients");
        if (!list.is_array()) bad_field("coefficients", "must be a list of {from, to, value}");
        for (const auto& c : list) {
            if (!c.is_object() || !c.contains("from") || !c.contains("to") || !c.contains("value") ||
                !c["from"].is_string() || !c["to"].is_string() || !c["value"].is_number())
                bad_field("coefficients", "must be a list of {from, to, value}");
            const double value = c["value"].get<double>();
            if (!std::isfinite(value)) bad_field("coefficients", "must hold finite values");
            spec[{c["from"].get<std::string>(), c["to"].get<std::string>()}] = value;
        }
    }
    std::map<std::string, double> noise;
    if (f.has("noise")) {
        const auto& obj = f.raw("noise");
        if (!obj.is_object()) bad_field("noise", "must map node names to scales");
        for (const auto& [node, scale] : obj.items()) {
            if (!scale.is_number()) bad_field("noise", "must map node names to scales");
            noise[node] = scale.get<double>();
        }
    }
    return instantiate_sem(g, spec, seed, noise);
}

Dataset data_from(const Fields& f) {
    return read_csv_string(f.required_string("data"));
}

std::size_t row_count(const Fields& f, const std::string& key, std::optional<std::size_t> fallback) {
    auto n = f.unsigned_int(key);
    if (!n && !fallback) bad_field(key, "is required");
    const std::size_t rows = n ? static_cast<std::size_t>(*n) : *fallback;
    if (rows == 0) bad_field(key, "must be at least 1");
    if (rows > kMaxSimulatedRows) bad_field(key, "must not exceed " + std::to_string(kMaxSimulatedRows));
    return rows;
}

Report query_echo(QueryKind kind, const CausalGraph& g) {
    Report q;
    q["kind"] = query_kind_name(kind);
    q["graph"] = g.name();
    return q;
}

Report finish(QueryKind kind, Report result, Report query) {
    Report out;
    for (auto& [k, v] : result.items()) out[k] = v;
    out["kind"] = query_kind_name(kind);
    out["query"] = std::move(query);
    return out;
}

Report run_parse(const ParseResult& parsed, const json& body) {
    Fields f(body, {});
    const auto& g = parsed.graph;
    Report warnings = Report::array();
    for (const auto& w : parsed.warnings) warnings.push_back({{"message", w.message}, {"span", span_json(w.span)}});
    Report order = Report::array();
    for (int v : g.topological_order())
        if (!g.is_synthetic(v)) order.push_back(g.name_of(v));
    Report r;
    r["graph"] = graph_json(g);
    r["canonical"] = serialize(g);
    r["topological_order"] = order;
    r["exposures"] = g.exposures();
    r["outcomes"] = g.outcomes();
    r["warnings"] = warnings;
    return finish(QueryKind::parse, r, query_echo(QueryKind::parse, g));
}

Report run_dsep(const CausalGraph& g, const json& body) {
    Fields f(body, {"x", "y", "given"});
    const auto x = f.required_set("x");
    const auto y = f.required_set("y");
    require_nodes(g, x);
    require_nodes(g, y);
    NodeSet both = x;
    both.insert(y.begin(), y.end());
    const auto given = conditioning(g, f, "given", both);
    const bool separated = d_separated(g, x, y, given);

    Report witness = nullptr;
    if (!separated) {
        for (const auto& a : x) {
            for (const auto& b : y) {
                if (auto p = first_open_path(g, a, b, given)) {
                    witness = path_json(*p);
                    break;
                }
            }
            if (!witness.is_null()) break;
        }
    }
    Report r;
    r["separated"] = separated;
    r["statement"] = CIStatement{x, y, given, Provenance::query}.to_string();
    r["witness"] = witness;
    auto q = query_echo(QueryKind::dsep, g);
    q["x"] = names(x);
    q["y"] = names(y);
    q["given"] = names(given);
    return finish(QueryKind::dsep, r, q);
}

Report run_paths(const CausalGraph& g, const json& body) {
    Fields f(body, {"x", "y", "given", "mutilate", "limit"});
    const auto x = f.required_string("x");
    const auto y = f.required_string("y");
    require_node(g, x);
    require_node(g, y);
    if (x == y) throw Error(ErrorCode::invalid_argument, "'x' and 'y' must differ");
    const auto given = conditioning(g, f, "given", {x, y});
    const auto mutilate = f.string("mutilate").value_or("none");
    const auto limit = f.unsigned_int("limit").value_or(kDefaultPathLimit);
    if (limit == 0) bad_field("limit", "must be at least 1");

    CausalGraph target = g;
    if (mutilate == "in") target = g.mutilate_incoming(x);
    else if (mutilate == "out") target = g.mutilate_outgoing(x);
    else if (mutilate != "none") bad_field("mutilate", "must be one of none, in, out");

    const auto paths = enumerate_paths(target, x, y, given, static_cast<std::size_t>(limit));
    Report list = Report::array();
    std::size_t open = 0;
    for (const auto& p : paths.paths) {
        list.push_back(path_json(p));
        if (p.open()) ++open;
    }
    Report r;
    r["paths"] = list;
    r["open_count"] = open;
    r["truncated"] = paths.truncated;
    auto q = query_echo(QueryKind::paths, g);
    q["x"] = x;
    q["y"] = y;
    q["given"] = names(given);
    q["mutilate"] = mutilate;
    q["limit"] = limit;
    return finish(QueryKind::paths, r, q);
}

Report run_adjustment(const CausalGraph& g, const json& body) {
    Fields f(body, {"exposure", "outcome", "max_size", "max_count", "set"});
    const auto d = role_node(g, f, "exposure");
    const auto y = role_node(g, f, "outcome");
    if (d == y) throw Error(ErrorCode::invalid_argument, "exposure and outcome must differ");
    const auto max_size = f.unsigned_int("max_size").value_or(kDefaultMaxAdjustmentSize);
    const auto max_count = f.unsigned_int("max_count").value_or(kDefaultMaxAdjustmentCount);
    if (max_count == 0) bad_field("max_count", "must be at least 1");

    const auto search = minimal_adjustment_sets(g, d, y, static_cast<std::size_t>(max_size),
                                                static_cast<std::size_t>(max_count));
    Report sets = Report::array();
    for (const auto& s : search.sets) sets.push_back(names(s));
    Report causal = Report::array();
    for (const auto& p : causal_paths(g, d, y)) causal.push_back(path_json(p));

    Report r;
    r["identified"] = !search.sets.empty();
    r["sets"] = sets;
    r["exhausted"] = search.exhausted;
    r["truncated"] = search.truncated;
    r["candidates"] = names(search.candidates);
    r["causal_paths"] = causal;
    auto q = query_echo(QueryKind::adjustment_sets, g);
    q["exposure"] = d;
    q["outcome"] = y;
    q["max_size"] = max_size;
    q["max_count"] = max_count;
    if (auto z = f.set("set")) {
        require_nodes(g, *z);
        if (z->contains(d) || z->contains(y))
            bad_field("set", "may not contain the exposure or the outcome");
        r["verdict"] = verdict_json(backdoor_admissible(g, d, y, *z));
        q["set"] = names(*z);
    }
    return finish(QueryKind::adjustment_sets, r, q);
}

Report run_iv(const CausalGraph& g, const json& body) {
    Fields f(body, {"instrument", "exposure", "outcome", "given"});
    const auto z = f.required_string("instrument");
    require_node(g, z);
    const auto d = role_node(g, f, "exposure");
    const auto y = role_node(g, f, "outcome");
    if (z == d || z == y || d == y)
        throw Error(ErrorCode::invalid_argument, "instrument, exposure and outcome must be distinct");
    const auto given = conditioning(g, f, "given", {z, d, y});
    if (given.contains(z) || given.contains(d) || given.contains(y))
        bad_field("given", "may not contain the instrument, exposure or outcome");
    const auto v = iv_check(g, z, d, y, given);

    Report r;
    r["valid"] = v.valid;
    r["relevant"] = v.relevant;
    r["excluded_and_exogenous"] = v.excluded_and_exogenous;
    r["witness"] = v.witness ? path_json(*v.witness) : Report(nullptr);
    auto q = query_echo(QueryKind::iv, g);
    q["instrument"] = z;
    q["exposure"] = d;
    q["outcome"] = y;
    q["given"] = names(given);
    return finish(QueryKind::iv, r, q);
}

Report run_implications(const CausalGraph& g, const json& body) {
    Fields f(body, {"max_cond"});
    const auto max_cond = f.unsigned_int("max_cond").value_or(kDefaultMaxConditioning);
    Report local = Report::array();
    for (const auto& s : local_markov(g)) local.push_back(statement_json(s));
    Report basis = Report::array();
    for (const auto& s : implied_independencies(g, static_cast<std::size_t>(max_cond)))
        basis.push_back(statement_json(s));
    Report r;
    r["count"] = basis.size();
    r["implied"] = basis;
    r["local_markov"] = local;
    auto q = query_echo(QueryKind::implications, g);
    q["max_cond"] = max_cond;
    return finish(QueryKind::implications, r, q);
}

Report run_factorize(const CausalGraph& g, const json& body) {
    Fields f(body, {"do"});
    std::map<std::string, std::string> values;
    if (f.has("do")) {
        const auto& d = f.raw("do");
        if (d.is_object()) {
            for (const auto& [node, value] : d.items()) {
                if (!value.is_string()) bad_field("do", "must map node names to symbols");
                values[node] = value.get<std::string>();
            }
        } else {
            const auto nodes = *f.set("do");
            for (const auto& node : nodes) {
                std::string lower = node;
                std::transform(lower.begin(), lower.end(), lower.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                values[node] = lower;
            }
        }
    }
    for (const auto& [node, symbol] : values) {
        require_node(g, node);
        if (symbol.empty()) bad_field("do", "symbols must be non-empty");
    }
    const auto fact = truncated_factorization(g, values);
    Report factors = Report::array();
    for (const auto& factor : fact.factors) factors.push_back({{"child", factor.child}, {"parents", factor.parents}});
    Report r;
    r["rendered"] = fact.rendered;
    r["factors"] = factors;
    r["intervened"] = names(fact.intervened);
    auto q = query_echo(QueryKind::factorize, g);
    Report echo_do = Report::object();
    for (const auto& [node, symbol] : values) echo_do[node] = symbol;
    q["do"] = echo_do;
    return finish(QueryKind::factorize, r, q);
}

Report estimands_json(const EstimandReport& e) {
    return {{"ate", e.ate},
            {"att", e.att},
            {"atc", e.atc},
            {"naive_diff", e.naive_diff},
            {"p_treated", e.p_treated},
            {"control_po_bias", e.control_po_bias},
            {"treated_po_bias", e.treated_po_bias},
            {"baseline_bias", e.baseline_bias},
            {"differential_response", e.differential_response},
            {"weighted_form_residual", e.weighted_form_residual},
            {"baseline_form_residual", e.baseline_form_residual}};
}

Report run_simulate(const CausalGraph& g, const json& body) {
    Fields f(body, {"n", "seed", "do", "coefficients", "noise", "potential_outcomes", "assignment", "exposure",
                    "outcome"});
    const auto n = row_count(f, "n", std::nullopt);
    const auto seed = f.unsigned_int("seed").value_or(0);
    const auto model = model_from(g, f, seed);
    auto q = query_echo(QueryKind::simulate, g);
    q["n"] = n;
    q["seed"] = seed;

    Report r;
    Dataset data;
    if (f.boolean("potential_outcomes").value_or(false)) {
        if (f.has("do")) bad_field("do", "cannot be combined with potential_outcomes");
        const auto d = role_node(g, f, "exposure");
        const auto y = role_node(g, f, "outcome");
        const auto assignment = f.string("assignment").value_or("threshold");
        if (assignment != "threshold" && assignment != "randomized")
            bad_field("assignment", "must be threshold or randomized");
        auto po = sample_potential_outcomes(model, d, y, n,
                                            assignment == "threshold" ? Assignment::threshold
                                                                      : Assignment::randomized);
        data = std::move(po.data);
        Report summary;
        summary["switching_holds"] = po.po.switching_holds();
        try {
            summary["estimands"] = estimands_json(bias_decomposition(po.po));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::empty_arm) throw;
            summary["estimands"] = nullptr;
        }
        r["potential_outcomes"] = summary;
        q["potential_outcomes"] = true;
        q["assignment"] = assignment;
        q["exposure"] = d;
        q["outcome"] = y;
    } else {
        if (f.has("assignment") || f.has("exposure") || f.has("outcome"))
            throw Error(ErrorCode::invalid_argument,
                        "'assignment', 'exposure' and 'outcome' only apply with potential_outcomes");
        Regime regime = Regime::observational();
        if (f.has("do")) {
            const auto& d = f.raw("do");
            if (!d.is_object() || d.size() != 1 || !d.begin().value().is_number())
                bad_field("do", "must map one node name to a number");
            require_node(g, d.begin().key());
            regime = Regime::intervention(d.begin().key(), d.begin().value().get<double>());
            q["do"] = Report{{d.begin().key(), regime.value}};
        }
        data = sample(model, n, regime);
    }
    r["rows"] = data.rows();
    r["columns"] = data.columns;
    r["regime"] = data.meta.regime.label();
    r["seed"] = seed;
    r["coefficients"] = coefficients_json(model);
    r["csv"] = write_csv_string(data);
    return finish(QueryKind::simulate, r, q);
}

Report run_estimate(const CausalGraph& g, const json& body) {
    Fields f(body, {"data", "method", "set", "instrument", "exposure", "outcome"});
    const auto d = role_node(g, f, "exposure");
    const auto y = role_node(g, f, "outcome");
    if (d == y) throw Error(ErrorCode::invalid_argument, "exposure and outcome must differ");
    const auto method = f.string("method").value_or("adjust");
    const auto data = data_from(f);
    auto q = query_echo(QueryKind::estimate, g);
    q["exposure"] = d;
    q["outcome"] = y;
    q["method"] = method;

    EstimatorSpec spec;
    Report warnings = Report::array();
    if (method == "naive") {
        if (f.has("set") || f.has("instrument")) bad_field("method", "naive takes no 'set' or 'instrument'");
        spec = EstimatorSpec::naive();
    } else if (method == "adjust") {
        if (f.has("instrument")) bad_field("instrument", "only applies to method iv");
        NodeSet z;
        if (auto s = f.set("set")) {
            require_nodes(g, *s);
            z = *s;
        } else {
            const auto search = minimal_adjustment_sets(g, d, y);
            if (search.sets.empty())
                throw Error(ErrorCode::invalid_argument, "no admissible adjustment set; name one with 'set'");
            z = search.sets.front();
        }
        if (!backdoor_admissible(g, d, y, z).admissible)
            warnings.push_back("adjustment set is not admissible in the graph");
        spec = EstimatorSpec::adjust(z);
        q["set"] = names(z);
    } else if (method == "iv") {
        const auto z = f.required_string("instrument");
        require_node(g, z);
        const auto given = conditioning(g, f, "set", {z, d, y});
        if (!iv_check(g, z, d, y, given).valid) warnings.push_back("instrument is not valid in the graph");
        spec = EstimatorSpec::iv(z, given);
        q["instrument"] = z;
        q["set"] = names(given);
    } else {
        bad_field("method", "must be one of naive, adjust, iv");
    }
    const auto est = estimate(data, d, y, spec);
    for (const auto& w : est.warnings) warnings.push_back(w);
    Report r;
    r["estimate"] = est.value;
    r["standard_error"] = est.standard_error;
    r["n"] = est.n;
    r["first_stage_f"] = est.first_stage_f ? Report(*est.first_stage_f) : Report(nullptr);
    r["warnings"] = warnings;
    return finish(QueryKind::estimate, r, q);
}

Report run_testfit(const CausalGraph& g, const json& body) {
    Fields f(body, {"data", "alpha", "correction", "max_cond"});
    const auto data = data_from(f);
    const auto alpha = f.number("alpha").value_or(kDefaultAlpha);
    if (!(alpha > 0.0 && alpha < 1.0)) bad_field("alpha", "must lie strictly between 0 and 1");
    const auto correction = f.string("correction").value_or("holm");
    if (correction != "holm" && correction != "none") bad_field("correction", "must be holm or none");
    const auto max_cond = f.unsigned_int("max_cond").value_or(kDefaultMaxConditioning);
    const auto fit = model_fit_report(g, data, static_cast<std::size_t>(max_cond), alpha,
                                      correction == "holm" ? Correction::holm : Correction::none);
    Report tests = Report::array();
    for (const auto& t : fit.tests) {
        tests.push_back({{"statement", statement_json(t.statement)},
                         {"partial_correlation", t.result.partial_correlation},
                         {"statistic", t.result.statistic},
                         {"p_value", t.result.p_value},
                         {"adjusted_p", t.adjusted_p},
                         {"reject", t.reject}});
    }
    Report r;
    r["compatible"] = fit.compatible;
    r["testable"] = fit.testable;
    r["rejected_fraction"] = fit.rejected_fraction;
    r["n"] = data.rows();
    r["tests"] = tests;
    auto q = query_echo(QueryKind::testfit, g);
    q["alpha"] = alpha;
    q["correction"] = correction;
    q["max_cond"] = max_cond;
    return finish(QueryKind::testfit, r, q);
}

Report run_sensitivity(const CausalGraph& g, const json& body) {
    Fields f(body, {"exposure", "outcome", "set", "strengths", "n", "seed", "coefficients", "noise"});
    const auto d = role_node(g, f, "exposure");
    const auto y = role_node(g, f, "outcome");
    if (d == y) throw Error(ErrorCode::invalid_argument, "exposure and outcome must differ");
    const auto z = f.set("set").value_or(NodeSet{});
    require_nodes(g, z);
    if (!f.has("strengths") || !f.raw("strengths").is_array() || f.raw("strengths").empty())
        bad_field("strengths", "must be a non-empty list of numbers");
    std::vector<double> strengths;
    for (const auto& s : f.raw("strengths")) {
        if (!s.is_number() || !std::isfinite(s.get<double>())) bad_field("strengths", "must hold finite numbers");
        strengths.push_back(s.get<double>());
    }
    const auto n = row_count(f, "n", kDefaultSensitivityRows);
    const auto seed = f.unsigned_int("seed").value_or(0);
    const auto points = sensitivity_sweep(model_from(g, f, seed), d, y, z, strengths, n);
    Report list = Report::array();
    for (const auto& p : points)
        list.push_back({{"strength", p.strength},
                        {"estimate", p.estimate},
                        {"standard_error", p.standard_error},
                        {"true_effect", p.true_effect},
                        {"bias", p.bias}});
    Report r;
    r["points"] = list;
    auto q = query_echo(QueryKind::sensitivity, g);
    q["exposure"] = d;
    q["outcome"] = y;
    q["set"] = names(z);
    q["strengths"] = strengths;
    q["n"] = n;
    q["seed"] = seed;
    return finish(QueryKind::sensitivity, r, q);
}

} // namespace

std::string_view query_kind_name(QueryKind kind) {
    for (const auto& [k, name] : kKinds)
        if (k == kind) return name;
    return "parse";
}

std::optional<QueryKind> query_kind_from_name(std::string_view name) {
    for (const auto& [k, n] : kKinds)
        if (n == name) return k;
    return std::nullopt;
}

Report path_json(const PathReport& p) {
    Report arrows = Report::array();
    for (auto a : p.arrows) arrows.push_back(arrow_name(a));
    Report out;
    out["nodes"] = p.nodes;
    out["arrows"] = arrows;
    out["status"] = p.open() ? "open" : "blocked";
    out["blockers"] = names(p.blockers);
    out["openers"] = names(p.openers);
    out["colliders"] = names(p.colliders);
    out["rendered"] = p.render();
    return out;
}

Report statement_json(const CIStatement& s) {
    Report out;
    out["a"] = names(s.a);
    out["b"] = names(s.b);
    out["given"] = names(s.given);
    out["provenance"] = provenance_name(s.provenance);
    out["text"] = s.to_string();
    return out;
}

Report verdict_json(const AdjustmentVerdict& v) {
    Report out;
    out["admissible"] = v.admissible;
    out["violated"] = v.violated ? Report(violation_name(*v.violated)) : Report(nullptr);
    out["witness"] = v.witness ? path_json(*v.witness) : Report(nullptr);
    out["offending"] = names(v.offending);
    return out;
}

Report analyze(QueryKind kind, const json& body) {
    if (!body.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
    if (!body.contains("dag") || !body["dag"].is_string())
        throw Error(ErrorCode::invalid_argument, "field 'dag' (DSL source) is required");
    const auto parsed = parse_with_warnings(body["dag"].get<std::string>());
    const auto& g = parsed.graph;
    switch (kind) {
        case QueryKind::parse: return run_parse(parsed, body);
        case QueryKind::dsep: return run_dsep(g, body);
        case QueryKind::paths: return run_paths(g, body);
        case QueryKind::adjustment_sets: return run_adjustment(g, body);
        case QueryKind::iv: return run_iv(g, body);
        case QueryKind::implications: return run_implications(g, body);
        case QueryKind::factorize: return run_factorize(g, body);
        case QueryKind::simulate: return run_simulate(g, body);
        case QueryKind::estimate: return run_estimate(g, body);
        case QueryKind::testfit: return run_testfit(g, body);
        case QueryKind::sensitivity: return run_sensitivity(g, body);
    }
    throw Error(ErrorCode::invalid_argument, "unknown query kind");
}

bool analysis_negative(QueryKind kind, const Report& report) {
    switch (kind) {
        case QueryKind::adjustment_sets:
            if (report.contains("verdict")) return !report["verdict"]["admissible"].get<bool>();
            return !report["identified"].get<bool>();
        case QueryKind::iv: return !report["valid"].get<bool>();
        case QueryKind::testfit: return !report["compatible"].get<bool>();
        default: return false;
    }
}

Report error_report(const std::exception& e) {
    Report err;
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        err["code"] = error_code_name(pe->code());
        err["kind"] = parse_error_kind_name(pe->kind());
        err["message"] = pe->what();
        err["span"] = span_json(pe->span());
        if (!pe->cycle().empty()) err["cycle"] = pe->cycle();
    } else if (const auto* ce = dynamic_cast<const CycleError*>(&e)) {
        err["code"] = error_code_name(ce->code());
        err["message"] = ce->what();
        err["cycle"] = ce->cycle();
    } else if (const auto* ee = dynamic_cast<const Error*>(&e)) {
        err["code"] = error_code_name(ee->code());
        err["message"] = ee->what();
    } else {
        err["code"] = "internal";
        err["message"] = e.what();
    }
    return Report{{"error", err}};
}

} // namespace egp
