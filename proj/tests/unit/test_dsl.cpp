#include <doctest.h>

#include <random>

#include "egp/dsl.hpp"
#include "oracles.hpp"

using namespace egp;

namespace {

ParseError parse_failure(std::string_view text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a parse error for: " << text);
    throw;
}

} // namespace

TEST_CASE("parse: implicit nodes") {
    const auto g = parse("dag chain3 { A -> B; B -> C; }");
    CHECK(g.name() == "chain3");
    REQUIRE(g.nodes().size() == 3);
    CHECK(g.nodes()[0].name == "A");
    CHECK(g.nodes()[2].name == "C");
    CHECK(g.nodes()[1].role == NodeRole{});
}

TEST_CASE("parse: roles and latent nodes") {
    const auto g = parse("dag g { node L [latent]; L -> D; L -> Y; D -> Y; }");
    CHECK(g.role("L").latent);
    CHECK_FALSE(g.role("D").latent);
    CHECK(g.edges().size() == 3);

    const auto r = parse("dag { node D [exposure, outcome]; node Z [adjusted]; Z -> D; }");
    CHECK(r.name().empty());
    CHECK(r.role("D").exposure);
    CHECK(r.role("D").outcome);
    CHECK(r.role("Z").adjusted);
}

TEST_CASE("parse: comments, quoting, whitespace") {
    const auto g = parse("// header\ndag q { # comment\n  \"D*\" -> \"two words\"; // trailing\n}\n");
    CHECK(g.contains("D*"));
    CHECK(g.contains("two words"));
    CHECK(serialize(g) == "dag q {\n  node \"D*\";\n  node \"two words\";\n  \"D*\" -> \"two words\";\n}\n");
}

TEST_CASE("parse: syntax error spans") {
    const auto e = parse_failure("dag g { A -> ; }");
    CHECK(e.kind() == ParseErrorKind::syntax);
    CHECK(e.span().line == 1);
    CHECK(e.span().column == 14);
    CHECK(std::string(e.what()).find("';'") != std::string::npos);

    const auto multi = parse_failure("dag g {\n  A -> B;\n  B -> ;\n}");
    CHECK(multi.span().line == 3);
    CHECK(multi.span().column == 8);

    CHECK(parse_failure("dag g { A -> B }").kind() == ParseErrorKind::syntax);
    CHECK(parse_failure("dag g { A -> B;").kind() == ParseErrorKind::syntax);
    CHECK(parse_failure("graph g { }").kind() == ParseErrorKind::syntax);
    CHECK(parse_failure("dag g { A => B; }").kind() == ParseErrorKind::lex);
    CHECK(parse_failure("dag g { \"A -> B; }").kind() == ParseErrorKind::lex);
    CHECK(parse_failure("dag g { } trailing").kind() == ParseErrorKind::syntax);
}

TEST_CASE("parse: semantic errors") {
    CHECK(parse_failure("dag g { node A [bogus]; }").kind() == ParseErrorKind::semantic);
    CHECK(parse_failure("dag g { A -> B [latent]; }").kind() == ParseErrorKind::semantic);
    CHECK(parse_failure("dag g { node A; node A; }").kind() == ParseErrorKind::semantic);
    CHECK(parse_failure("dag g { A -> A; }").kind() == ParseErrorKind::semantic);
    CHECK(parse_failure("dag g { node A [latent, adjusted]; }").kind() == ParseErrorKind::semantic);

    const auto cyc = parse_failure("dag g {\n  A -> B;\n  B -> C;\n  C -> A;\n}");
    CHECK(cyc.kind() == ParseErrorKind::semantic);
    CHECK(cyc.cycle().size() == 4);
    CHECK(cyc.cycle().front() == cyc.cycle().back());
    CHECK(cyc.span().line >= 2);
}

TEST_CASE("parse: duplicate edges are idempotent with a warning") {
    const auto r = parse_with_warnings("dag g { A -> B; A -> B; A <-> C; C <-> A; }");
    CHECK(r.graph.edges().size() == 2);
    REQUIRE(r.warnings.size() == 2);
    CHECK(r.warnings[0].span.column == 17);
}

TEST_CASE("serialize: canonical chain") {
    const auto g = parse("dag chain3 { B -> C; A -> B; }");
    CHECK(serialize(g) == "dag chain3 {\n  node A;\n  node B;\n  node C;\n  A -> B;\n  B -> C;\n}\n");
}

TEST_CASE("serialize: bidirected edges are written back as <->") {
    const auto g = parse("dag g { Y <-> X; X -> Y; }");
    const auto text = serialize(g);
    CHECK(text.find("X <-> Y;") != std::string::npos);
    CHECK(text.find("u:") == std::string::npos);
    CHECK(parse(text).structurally_equal(g));
}

TEST_CASE("serialize: roles and quoting") {
    const auto g = parse("dag g { node \"D*\" [outcome]; node L [latent]; node E [exposure, adjusted]; }");
    CHECK(serialize(g) == "dag g {\n  node \"D*\" [outcome];\n  node E [exposure, adjusted];\n  node L [latent];\n}\n");
    CHECK(quote_identifier("abc_1") == "abc_1");
    CHECK(quote_identifier("1abc") == "\"1abc\"");
    CHECK(quote_identifier("dag") == "\"dag\"");
}

TEST_CASE("round trip on random graphs") {
    std::mt19937_64 rng(3);
    oracle::RandomDagOptions opt{.min_nodes = 1, .max_nodes = 12, .edge_probability = 0.3,
                                 .latent_probability = 0.2, .bidirected_probability = 0.1};
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = oracle::random_dag(rng, opt, "r" + std::to_string(trial));
        const auto text = serialize(g);
        const auto back = parse(text);
        CHECK(back.structurally_equal(g));
        CHECK(serialize(back) == text);
    }
}

TEST_CASE("fuzz: random bytes and mutations never crash") {
    std::mt19937_64 rng(99);
    const std::string seed_text = "dag g {\n  node L [latent];\n  \"Q x\" <-> B; L -> D; D -> Y; # c\n}\n";
    std::uniform_int_distribution<int> byte(0, 255), len(0, 64);
    for (int trial = 0; trial < 5000; ++trial) {
        std::string s;
        if (trial % 2) {
            const int n = len(rng);
            for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(byte(rng)));
        } else {
            s = seed_text;
            std::uniform_int_distribution<std::size_t> at(0, s.size() - 1);
            for (int k = 0; k < 3; ++k) s[at(rng)] = static_cast<char>(byte(rng));
        }
        try {
            parse(s);
        } catch (const ParseError& e) {
            CHECK(e.span().line >= 1);
            CHECK(e.span().column >= 1);
            CHECK(e.span().length >= 1);
            CHECK(e.span().offset + e.span().length <= s.size() + 1);
        }
    }
}
