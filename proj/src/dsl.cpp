#include "egp/dsl.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>

namespace egp {

std::string_view parse_error_kind_name(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::lex: return "lex";
        case ParseErrorKind::syntax: return "syntax";
        case ParseErrorKind::semantic: return "semantic";
    }
    return "unknown";
}

ParseError::ParseError(SourceSpan span, ParseErrorKind kind, const std::string& message,
                       std::vector<std::string> cycle)
    : Error(ErrorCode::parse_error,
            std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
      span_(span), kind_(kind), cycle_(std::move(cycle)) {}

namespace {

enum class Tok { ident, string, arrow, biarrow, lbrace, rbrace, lbracket, rbracket, comma, semi, end };

struct Token {
    Tok kind;
    std::string text;  // identifier value (unescaped for strings) or lexeme
    SourceSpan span;
};

bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

bool is_keyword(std::string_view s) { return s == "dag" || s == "node"; }

// Length of the UTF-8 sequence starting at text[i], or 0 when malformed.
std::size_t utf8_length(std::string_view text, std::size_t i) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (c < 0x80) return 1;
    if ((c & 0xE0) == 0xC0 && c >= 0xC2) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) len = 4;
    else return 0;
    if (i + len > text.size()) return 0;
    for (std::size_t k = 1; k < len; ++k)
        if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return 0;
    const auto c1 = static_cast<unsigned char>(text[i + 1]);
    if (c == 0xE0 && c1 < 0xA0) return 0;
    if (c == 0xED && c1 >= 0xA0) return 0;
    if (c == 0xF0 && c1 < 0x90) return 0;
    if (c == 0xF4 && c1 >= 0x90) return 0;
    return len;
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_trivia();
        SourceSpan start = here(1);
        if (pos_ >= text_.size()) return {Tok::end, "end of input", start};
        const char c = text_[pos_];
        auto single = [&](Tok kind) {
            advance(1);
            return Token{kind, std::string(1, c), start};
        };
        switch (c) {
            case '{': return single(Tok::lbrace);
            case '}': return single(Tok::rbrace);
            case '[': return single(Tok::lbracket);
            case ']': return single(Tok::rbracket);
            case ',': return single(Tok::comma);
            case ';': return single(Tok::semi);
            case '-':
                if (peek(1) == '>') {
                    advance(2);
                    start.length = 2;
                    return {Tok::arrow, "->", start};
                }
                break;
            case '<':
                if (peek(1) == '-' && peek(2) == '>') {
                    advance(3);
                    start.length = 3;
                    return {Tok::biarrow, "<->", start};
                }
                break;
            case '"': return quoted(start);
            default: break;
        }
        if (ident_start(c)) {
            std::size_t end = pos_;
            while (end < text_.size() && ident_char(text_[end])) ++end;
            Token t{Tok::ident, std::string(text_.substr(pos_, end - pos_)), start};
            t.span.length = end - pos_;
            advance(end - pos_);
            return t;
        }
        const auto bad = static_cast<unsigned char>(c);
        if (bad >= 0x80)
            throw ParseError(start, ParseErrorKind::lex,
                             "non-ASCII character outside a quoted identifier");
        std::string shown = (bad < 0x20 || bad == 0x7F) ? "control character" : "'" + std::string(1, c) + "'";
        throw ParseError(start, ParseErrorKind::lex, "unexpected character " + shown);
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    SourceSpan here(std::size_t length) const { return {line_, col_, length, pos_}; }

    void advance(std::size_t count) {
        for (std::size_t k = 0; k < count && pos_ < text_.size(); ++k) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance(1);
            } else if (c == '#' || (c == '/' && peek(1) == '/')) {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
            } else {
                break;
            }
        }
    }

    Token quoted(SourceSpan start) {
        const std::size_t begin = pos_;
        advance(1);
        std::string value;
        while (true) {
            if (pos_ >= text_.size() || text_[pos_] == '\n') {
                start.length = pos_ - begin;
                throw ParseError(start, ParseErrorKind::lex, "unterminated quoted identifier");
            }
            const char c = text_[pos_];
            if (c == '"') break;
            if (c == '\\') {
                const char e = peek(1);
                if (e != '"' && e != '\\') {
                    throw ParseError(here(pos_ + 1 < text_.size() ? 2 : 1), ParseErrorKind::lex,
                                     "invalid escape in quoted identifier");
                }
                value += e;
                advance(2);
                continue;
            }
            const auto len = utf8_length(text_, pos_);
            if (len == 0)
                throw ParseError(here(1), ParseErrorKind::lex, "invalid UTF-8 in quoted identifier");
            if (len == 1 && static_cast<unsigned char>(c) < 0x20)
                throw ParseError(here(1), ParseErrorKind::lex, "control character in quoted identifier");
            value.append(text_.substr(pos_, len));
            // Columns count bytes, so a multi-byte character spans several.
            advance(len);
        }
        advance(1);
        start.length = pos_ - begin;
        if (value.empty())
            throw ParseError(start, ParseErrorKind::lex, "empty quoted identifier");
        return {Tok::string, std::move(value), start};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

struct PendingNode {
    NodeDecl decl;
    SourceSpan span;
    bool explicit_decl = false;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { token_ = lexer_.next(); }

    ParseResult run() {
        expect_keyword("dag");
        std::string name;
        if (is_identifier()) name = take_identifier().text;
        expect(Tok::lbrace, "'{'");
        while (token_.kind != Tok::rbrace) {
            if (token_.kind == Tok::end)
                throw ParseError(token_.span, ParseErrorKind::syntax, "expected '}' before end of input");
            statement();
        }
        bump();
        if (token_.kind != Tok::end)
            throw ParseError(token_.span, ParseErrorKind::syntax,
                             "unexpected " + describe(token_) + " after closing '}'");
        return finish(std::move(name));
    }

private:
    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Tok::end: return "end of input";
            case Tok::ident: return "'" + t.text + "'";
            case Tok::string: return "quoted identifier \"" + t.text + "\"";
            default: return "'" + t.text + "'";
        }
    }

    void bump() { token_ = lexer_.next(); }

    bool is_identifier() const {
        return token_.kind == Tok::string || (token_.kind == Tok::ident && !is_keyword(token_.text));
    }

    Token take_identifier(std::string_view after = {}) {
        if (!is_identifier()) {
            std::string msg = "expected identifier";
            if (!after.empty()) msg += " after " + std::string(after);
            msg += ", found " + describe(token_);
            throw ParseError(token_.span, ParseErrorKind::syntax, msg);
        }
        Token t = token_;
        bump();
        return t;
    }

    void expect(Tok kind, std::string_view what) {
        if (token_.kind != kind)
            throw ParseError(token_.span, ParseErrorKind::syntax,
                             "expected " + std::string(what) + ", found " + describe(token_));
        bump();
    }

    void expect_keyword(std::string_view kw) {
        if (token_.kind != Tok::ident || token_.text != kw)
            throw ParseError(token_.span, ParseErrorKind::syntax,
                             "expected '" + std::string(kw) + "', found " + describe(token_));
        bump();
    }

    std::vector<Token> attributes() {
        std::vector<Token> attrs;
        if (token_.kind != Tok::lbracket) return attrs;
        bump();
        attrs.push_back(take_identifier("'['"));
        while (token_.kind == Tok::comma) {
            bump();
            attrs.push_back(take_identifier("','"));
        }
        expect(Tok::rbracket, "',' or ']'");
        return attrs;
    }

    PendingNode& touch(const Token& ident) {
        auto it = index_.find(ident.text);
        if (it != index_.end()) return nodes_[it->second];
        index_.emplace(ident.text, nodes_.size());
        nodes_.push_back({NodeDecl{ident.text, {}}, ident.span, false});
        return nodes_.back();
    }

    void statement() {
        if (token_.kind == Tok::ident && token_.text == "node") {
            bump();
            const Token ident = take_identifier("'node'");
            const auto attrs = attributes();
            expect(Tok::semi, "';'");
            PendingNode& node = touch(ident);
            if (node.explicit_decl)
                throw ParseError(ident.span, ParseErrorKind::semantic,
                                 "duplicate node declaration '" + ident.text + "'");
            node.explicit_decl = true;
            node.span = ident.span;
            for (const auto& a : attrs) {
                if (a.kind == Tok::ident && a.text == "latent") node.decl.role.latent = true;
                else if (a.kind == Tok::ident && a.text == "exposure") node.decl.role.exposure = true;
                else if (a.kind == Tok::ident && a.text == "outcome") node.decl.role.outcome = true;
                else if (a.kind == Tok::ident && a.text == "adjusted") node.decl.role.adjusted = true;
                else
                    throw ParseError(a.span, ParseErrorKind::semantic,
                                     "unknown attribute '" + a.text + "'");
            }
            if (node.decl.role.latent && node.decl.role.adjusted)
                throw ParseError(ident.span, ParseErrorKind::semantic,
                                 "node '" + ident.text + "' cannot be both latent and adjusted");
            return;
        }
        if (!is_identifier())
            throw ParseError(token_.span, ParseErrorKind::syntax,
                             "expected 'node' or an edge, found " + describe(token_));
        const Token from = take_identifier();
        EdgeKind kind;
        if (token_.kind == Tok::arrow) kind = EdgeKind::directed;
        else if (token_.kind == Tok::biarrow) kind = EdgeKind::bidirected;
        else
            throw ParseError(token_.span, ParseErrorKind::syntax,
                             "expected '->' or '<->', found " + describe(token_));
        const std::string op = token_.text;
        bump();
        const Token to = take_identifier("'" + op + "'");
        const auto attrs = attributes();
        if (!attrs.empty())
            throw ParseError(attrs.front().span, ParseErrorKind::semantic,
                             "attribute '" + attrs.front().text + "' does not apply to edges");
        if (token_.kind != Tok::semi)
            throw ParseError(token_.span, ParseErrorKind::syntax,
                             "expected ';', found " + describe(token_));
        SourceSpan span = from.span;
        span.length = token_.span.offset + 1 - from.span.offset;
        bump();
        if (from.text == to.text)
            throw ParseError(span, ParseErrorKind::semantic, "self-loop on '" + from.text + "'");
        touch(from);
        touch(to);
        Edge e{from.text, to.text, kind};
        if (kind == EdgeKind::bidirected && e.to < e.from) std::swap(e.from, e.to);
        if (edge_spans_.contains(e)) {
            warnings_.push_back({span, "duplicate edge " + from.text + " " + op + " " + to.text + " ignored"});
            return;
        }
        edge_spans_.emplace(e, span);
        edges_.push_back(std::move(e));
    }

    ParseResult finish(std::string name) {
        std::vector<NodeDecl> decls;
        decls.reserve(nodes_.size());
        for (const auto& n : nodes_) decls.push_back(n.decl);
        try {
            return {CausalGraph::build(std::move(name), std::move(decls), edges_), std::move(warnings_)};
        } catch (const CycleError& e) {
            const auto& c = e.cycle();
            SourceSpan span = edge_spans_.at(Edge{c[0], c[1], EdgeKind::directed});
            throw ParseError(span, ParseErrorKind::semantic, e.what(), c);
        } catch (const Error& e) {
            SourceSpan span = nodes_.empty() ? SourceSpan{} : nodes_.front().span;
            throw ParseError(span, ParseErrorKind::semantic, e.what());
        }
    }

    Lexer lexer_;
    Token token_;
    std::vector<PendingNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Edge> edges_;
    std::map<Edge, SourceSpan> edge_spans_;
    std::vector<ParseWarning> warnings_;
};

} // namespace

ParseResult parse_with_warnings(std::string_view text) { return Parser(text).run(); }

CausalGraph parse(std::string_view text) { return parse_with_warnings(text).graph; }

std::string quote_identifier(std::string_view name) {
    bool bare = !name.empty() && ident_start(name[0]) && !is_keyword(name);
    for (char c : name) bare = bare && ident_char(c);
    if (bare) return std::string(name);
    std::string out = "\"";
    for (char c : name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string serialize(const CausalGraph& g) {
    std::string out = "dag";
    if (!g.name().empty()) out += " " + quote_identifier(g.name());
    out += " {\n";

    std::vector<NodeDecl> nodes(g.nodes().begin(), g.nodes().end());
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& n : nodes) {
        out += "  node " + quote_identifier(n.name);
        std::vector<std::string_view> attrs;
        if (n.role.latent) attrs.push_back("latent");
        if (n.role.exposure) attrs.push_back("exposure");
        if (n.role.outcome) attrs.push_back("outcome");
        if (n.role.adjusted) attrs.push_back("adjusted");
        if (!attrs.empty()) {
            out += " [";
            for (std::size_t i = 0; i < attrs.size(); ++i) {
                if (i) out += ", ";
                out += attrs[i];
            }
            out += "]";
        }
        out += ";\n";
    }

    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) {
        out += "  " + quote_identifier(e.from) +
               (e.kind == EdgeKind::directed ? " -> " : " <-> ") + quote_identifier(e.to) + ";\n";
    }
    out += "}\n";
    return out;
}

} // namespace egp
