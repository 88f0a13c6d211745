#pragma once

#include <exception>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "egp/graph.hpp"
#include "egp/identification.hpp"
#include "egp/separation.hpp"

namespace egp {

/// Result record shared by the CLI (`--json`), the HTTP service and corpus
/// replay. Key order is fixed so equal queries serialize to equal bytes.
using Report = nlohmann::ordered_json;

enum class QueryKind {
    parse,
    dsep,
    paths,
    adjustment_sets,
    iv,
    implications,
    factorize,
    simulate,
    estimate,
    testfit,
    sensitivity,
};

std::string_view query_kind_name(QueryKind kind);
std::optional<QueryKind> query_kind_from_name(std::string_view name);

inline constexpr std::size_t kMaxSimulatedRows = 100'000;
inline constexpr std::size_t kDefaultSensitivityRows = 10'000;

/// Runs one query. `body` holds the DSL source under "dag" plus the query
/// fields; see docs/analysis-report.schema.json and the README for the
/// accepted fields. Throws ParseError for bad DSL and Error for invalid
/// queries.
Report analyze(QueryKind kind, const nlohmann::json& body);

/// True for results that the CLI reports with exit code 1: nothing
/// identified, inadmissible set, invalid instrument, incompatible data.
bool analysis_negative(QueryKind kind, const Report& report);

/// {"error": {code, message[, kind, span, cycle]}} for any exception.
Report error_report(const std::exception& e);

/// Compact renderings reused by the CLI and tests.
Report path_json(const PathReport& p);
Report statement_json(const CIStatement& s);
Report verdict_json(const AdjustmentVerdict& v);

} // namespace egp
