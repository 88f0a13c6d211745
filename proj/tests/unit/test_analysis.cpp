#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "egp/analysis.hpp"
#include "egp/error.hpp"

using namespace egp;
using nlohmann::json;

namespace {

const char* kTab3A = "dag tab3A { node D [exposure]; node Y [outcome]; X -> D; X -> Y; D -> Y; }";

json body(std::initializer_list<std::pair<const std::string, json>> fields, const char* dag = kTab3A) {
    json b = json::object();
    b["dag"] = dag;
    for (const auto& [k, v] : fields) b[k] = v;
    return b;
}

std::string code_of(QueryKind kind, const json& b) {
    try {
        analyze(kind, b);
    } catch (const std::exception& e) {
        return error_report(e)["error"]["code"].get<std::string>();
    }
    return "";
}

} // namespace

TEST_CASE("query kind names round trip") {
    for (auto k : {QueryKind::parse, QueryKind::dsep, QueryKind::paths, QueryKind::adjustment_sets, QueryKind::iv,
                   QueryKind::implications, QueryKind::factorize, QueryKind::simulate, QueryKind::estimate,
                   QueryKind::testfit, QueryKind::sensitivity})
        CHECK(query_kind_from_name(query_kind_name(k)) == k);
    CHECK_FALSE(query_kind_from_name("nope"));
}

TEST_CASE("report layout puts results before kind and query") {
    const auto r = analyze(QueryKind::dsep, body({{"x", {"D"}}, {"y", {"Y"}}, {"given", {"X"}}}));
    std::vector<std::string> keys;
    for (const auto& [k, v] : r.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"separated", "statement", "witness", "kind", "query"});
    CHECK(r["kind"] == "dsep");
    CHECK(r["separated"] == false);
    CHECK(r["witness"]["rendered"] == "D -> Y");
    CHECK(r["query"]["graph"] == "tab3A");
}

TEST_CASE("parse reports the normalized graph") {
    const auto r = analyze(QueryKind::parse, body({}, "dag g { A -> B; A -> B; X <-> B; }"));
    CHECK(r["graph"]["edges"].size() == 2);
    CHECK(r["graph"]["edges"][1]["kind"] == "bidirected");
    CHECK(r["warnings"].size() == 1);
    CHECK(r["topological_order"].size() == 3);
}

TEST_CASE("adjustment sets, verdicts and defaults") {
    const auto r = analyze(QueryKind::adjustment_sets, body({}));
    CHECK(r["identified"] == true);
    CHECK(r["sets"] == json::parse(R"([["X"]])"));
    CHECK(r["query"]["exposure"] == "D");
    CHECK(r["causal_paths"][0]["rendered"] == "D -> Y");
    CHECK_FALSE(analysis_negative(QueryKind::adjustment_sets, r));

    const auto bad = analyze(QueryKind::adjustment_sets, body({{"set", json::array()}}));
    CHECK(bad["verdict"]["admissible"] == false);
    CHECK(bad["verdict"]["violated"] == "open-backdoor");
    CHECK(bad["verdict"]["witness"]["rendered"] == "D <- X -> Y");
    CHECK(analysis_negative(QueryKind::adjustment_sets, bad));

    CHECK(code_of(QueryKind::adjustment_sets, body({{"set", {"D"}}})) == "invalid_argument");
    CHECK(code_of(QueryKind::adjustment_sets, body({}, "dag g { A -> B; }")) == "invalid_argument");
}

TEST_CASE("given defaults to the adjusted nodes") {
    const char* dag = "dag g { node B [adjusted]; A -> B; B -> C; }";
    const auto r = analyze(QueryKind::dsep, body({{"x", {"A"}}, {"y", {"C"}}}, dag));
    CHECK(r["separated"] == true);
    CHECK(r["query"]["given"] == json::parse(R"(["B"])"));
    const auto open = analyze(QueryKind::dsep, body({{"x", {"A"}}, {"y", {"C"}}, {"given", json::array()}}, dag));
    CHECK(open["separated"] == false);
}

TEST_CASE("paths with mutilation") {
    const auto all = analyze(QueryKind::paths, body({{"x", "D"}, {"y", "Y"}}));
    CHECK(all["paths"].size() == 2);
    CHECK(all["open_count"] == 2);
    const auto cut = analyze(QueryKind::paths, body({{"x", "D"}, {"y", "Y"}, {"mutilate", "in"}}));
    CHECK(cut["paths"].size() == 1);
    CHECK(code_of(QueryKind::paths, body({{"x", "D"}, {"y", "Y"}, {"mutilate", "sideways"}})) == "invalid_argument");
    CHECK(code_of(QueryKind::paths, body({{"x", "D"}, {"y", "D"}})) == "invalid_argument");
}

TEST_CASE("iv, implications and factorization reports") {
    const char* dag = "dag g { node D [exposure]; node Y [outcome]; node U [latent]; Z -> D; U -> D; U -> Y; D -> Y; }";
    const auto iv = analyze(QueryKind::iv, body({{"instrument", "Z"}}, dag));
    CHECK(iv["valid"] == true);
    CHECK(iv["witness"].is_null());
    CHECK(code_of(QueryKind::iv, body({{"instrument", "Z"}, {"given", {"U"}}}, dag)) == "latent_in_set");

    const auto imp = analyze(QueryKind::implications, body({}, "dag c { A -> B; B -> C; }"));
    CHECK(imp["count"] == 1);
    CHECK(imp["implied"][0]["text"] == "A _||_ C | B");

    const auto fac = analyze(QueryKind::factorize, body({{"do", {{"B", "1"}}}}, "dag c { A -> B; B -> C; }"));
    CHECK(fac["rendered"] == "P(A,C | do(B=1)) = P(A) P(C|1)");
}

TEST_CASE("simulate, estimate and testfit chain together") {
    const char* dag = "dag tab3A { node D [exposure]; node Y [outcome]; X -> D; X -> Y; D -> Y; }";
    const auto sim = analyze(QueryKind::simulate, body({{"n", 2000}, {"seed", 5}}, dag));
    CHECK(sim["rows"] == 2000);
    CHECK(sim["csv"].get<std::string>().starts_with("D,Y,X\n"));
    CHECK(analyze(QueryKind::simulate, body({{"n", 2000}, {"seed", 5}}, dag)) == sim);

    const auto data = sim["csv"].get<std::string>();
    const auto est = analyze(QueryKind::estimate, body({{"data", data}, {"method", "adjust"}}, dag));
    CHECK(est["query"]["set"] == json::parse(R"(["X"])"));
    CHECK(std::isfinite(est["estimate"].get<double>()));

    const auto fit = analyze(QueryKind::testfit, body({{"data", data}}, "dag c { D -> X; X -> Y; }"));
    CHECK(fit["testable"] == true);
    CHECK(fit["tests"].size() == 1);

    CHECK(code_of(QueryKind::simulate, body({{"n", 0}, {"seed", 1}}, dag)) == "invalid_argument");
    CHECK(code_of(QueryKind::simulate, body({{"n", kMaxSimulatedRows + 1}, {"seed", 1}}, dag)) == "invalid_argument");
    CHECK(code_of(QueryKind::estimate, body({{"data", "A\n1\n"}, {"method", "naive"}}, dag)) == "missing_column");
}

TEST_CASE("request validation") {
    CHECK(code_of(QueryKind::dsep, json::array()) == "invalid_argument");
    CHECK(code_of(QueryKind::dsep, json{{"x", {"A"}}}) == "invalid_argument");
    CHECK(code_of(QueryKind::dsep, body({{"x", {"D"}}, {"y", {"Y"}}, {"bogus", 1}})) == "invalid_argument");
    CHECK(code_of(QueryKind::dsep, body({{"x", {"D"}}, {"y", {"Q"}}})) == "unknown_node");
    CHECK(code_of(QueryKind::dsep, body({{"x", 3}, {"y", {"Y"}}})) == "invalid_argument");
    CHECK(code_of(QueryKind::parse, body({}, "dag g { A -> ; }")) == "parse_error");
}

TEST_CASE("error reports carry spans and cycles") {
    try {
        analyze(QueryKind::parse, body({}, "dag g { A -> B; B -> A; }"));
        FAIL("cycle accepted");
    } catch (const std::exception& e) {
        const auto r = error_report(e)["error"];
        CHECK(r["code"] == "parse_error");
        CHECK(r["kind"] == "semantic");
        CHECK(r["cycle"] == json::parse(R"(["A","B","A"])"));
        CHECK(r["span"]["line"] == 1);
    }
    const auto plain = error_report(std::runtime_error("boom"))["error"];
    CHECK(plain["code"] == "internal");
}
