#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "egp/error.hpp"
#include "egp/graph.hpp"

namespace egp {

struct SourceSpan {
    std::size_t line = 1;    // 1-based
    std::size_t column = 1;  // 1-based, in bytes
    std::size_t length = 1;
    std::size_t offset = 0;  // byte offset of the first character
};

enum class ParseErrorKind { lex, syntax, semantic };

std::string_view parse_error_kind_name(ParseErrorKind kind);

class ParseError : public Error {
public:
    ParseError(SourceSpan span, ParseErrorKind kind, const std::string& message,
               std::vector<std::string> cycle = {});

    const SourceSpan& span() const noexcept { return span_; }
    ParseErrorKind kind() const noexcept { return kind_; }
    /// Non-empty when the error is a directed cycle.
    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    SourceSpan span_;
    ParseErrorKind kind_;
    std::vector<std::string> cycle_;
};

struct ParseWarning {
    SourceSpan span;
    std::string message;
};

struct ParseResult {
    CausalGraph graph;
    std::vector<ParseWarning> warnings;
};

/// Parses a `.dag` document:
///
///     dag name {
///       node L [latent];
///       L -> D; L -> Y; D -> Y;
///       X <-> Y;
///     }
///
/// Nodes referenced only by edges are declared implicitly with no role.
/// Repeated edges are ignored with a warning. Throws ParseError.
ParseResult parse_with_warnings(std::string_view text);
CausalGraph parse(std::string_view text);

/// Canonical text: nodes sorted by name, then edges sorted by (from, to, kind),
/// two-space indentation, LF line endings.
std::string serialize(const CausalGraph& g);

/// `name` as written in the DSL: bare when it is an identifier, quoted otherwise.
std::string quote_identifier(std::string_view name);

} // namespace egp
