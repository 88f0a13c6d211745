#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "egp/analysis.hpp"

namespace egp {

struct Expectation {
    nlohmann::json query;     // {"kind": ..., fields...}
    nlohmann::json expected;  // subset of the report, or {"error": {...}}
};

struct CorpusEntry {
    std::string id;
    std::string dag_source;
    std::string provenance;
    std::string notes;
    std::vector<Expectation> expectations;
};

/// EGP_CORPUS_DIR when set, else the directory bundled at build time.
std::filesystem::path default_corpus_dir();

/// Reads `<id>.dag` + `<id>.expect.json` pairs, sorted by id. Throws
/// corrupt_corpus when a pair is incomplete, a DAG fails to parse, or an
/// expectation file is malformed.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir = default_corpus_dir());

/// Builds an entry from in-memory sources; same checks as load_corpus.
CorpusEntry make_entry(const std::string& id, const std::string& dag_source, const std::string& expect_text);

struct ExpectationResult {
    std::size_t index = 0;
    std::string kind;
    bool passed = false;
    /// JSON pointer of the first mismatch, empty on success.
    std::string mismatch;
    Report expected;
    Report actual;
    /// Witness path of the actual report when it has one.
    Report witness;
};

struct ReplayReport {
    std::string id;
    std::vector<ExpectationResult> results;

    bool passed() const;
    std::size_t failures() const;
};

/// Runs every expectation through analyze(). Failures are data.
ReplayReport replay(const CorpusEntry& entry);

/// Recursive subset match: every key of `expected` must be present and
/// match; arrays must have equal length and match element-wise. Returns
/// the JSON pointer of the first mismatch, or nullopt.
std::optional<std::string> subset_mismatch(const Report& expected, const Report& actual);

Report catalog_json(const std::vector<CorpusEntry>& entries);
Report entry_json(const CorpusEntry& entry);
Report replay_json(const std::vector<ReplayReport>& reports);

} // namespace egp
