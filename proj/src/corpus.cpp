#include "egp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "egp/dsl.hpp"
#include "egp/error.hpp"

#ifndef EGP_DEFAULT_CORPUS_DIR
#define EGP_DEFAULT_CORPUS_DIR "corpus"
#endif

namespace egp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& id, const std::string& why) {
    throw Error(ErrorCode::corrupt_corpus, "corpus entry '" + id + "': " + why);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::corrupt_corpus, "cannot read " + p.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string escape_pointer(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

std::optional<std::string> mismatch_at(const Report& expected, const Report& actual, const std::string& where) {
    if (expected.is_object()) {
        if (!actual.is_object()) return where.empty() ? "/" : where;
        for (const auto& [key, value] : expected.items()) {
            const auto here = where + "/" + escape_pointer(key);
            if (!actual.contains(key)) return here;
            if (auto m = mismatch_at(value, actual.at(key), here)) return m;
        }
        return std::nullopt;
    }
    if (expected.is_array()) {
        if (!actual.is_array() || actual.size() != expected.size()) return where.empty() ? "/" : where;
        for (std::size_t i = 0; i < expected.size(); ++i)
            if (auto m = mismatch_at(expected[i], actual[i], where + "/" + std::to_string(i))) return m;
        return std::nullopt;
    }
    if (expected.is_number() && actual.is_number()) {
        const double a = expected.get<double>();
        const double b = actual.get<double>();
        if (a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b))) return std::nullopt;
        return where.empty() ? "/" : where;
    }
    if (expected != actual) return where.empty() ? "/" : where;
    return std::nullopt;
}

Report find_witness(const Report& actual) {
    if (!actual.is_object()) return nullptr;
    if (actual.contains("witness") && !actual["witness"].is_null()) return actual["witness"];
    if (actual.contains("verdict") && actual["verdict"].contains("witness")) return actual["verdict"]["witness"];
    return nullptr;
}

} // namespace

fs::path default_corpus_dir() {
    if (const char* env = std::getenv("EGP_CORPUS_DIR"); env && *env) return fs::path(env);
    return fs::path(EGP_DEFAULT_CORPUS_DIR);
}

CorpusEntry make_entry(const std::string& id, const std::string& dag_source, const std::string& expect_text) {
    CorpusEntry entry;
    entry.id = id;
    entry.dag_source = dag_source;
    try {
        parse(dag_source);
    } catch (const std::exception& e) {
        corrupt(id, std::string("DAG does not parse: ") + e.what());
    }
    json doc;
    try {
        doc = json::parse(expect_text);
    } catch (const json::parse_error& e) {
        corrupt(id, std::string("expectation file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) corrupt(id, "expectation file must hold an object");
    if (doc.value("id", std::string()) != id) corrupt(id, "expectation file names a different id");
    if (!doc.contains("provenance") || !doc["provenance"].is_string()) corrupt(id, "missing provenance");
    entry.provenance = doc["provenance"].get<std::string>();
    if (doc.contains("notes")) {
        if (!doc["notes"].is_string()) corrupt(id, "notes must be a string");
        entry.notes = doc["notes"].get<std::string>();
    }
    if (!doc.contains("expectations") || !doc["expectations"].is_array() || doc["expectations"].empty())
        corrupt(id, "needs a non-empty expectations list");
    for (const auto& e : doc["expectations"]) {
        if (!e.is_object() || !e.contains("query") || !e.contains("expected") || !e["query"].is_object() ||
            !e["expected"].is_object())
            corrupt(id, "each expectation needs a query object and an expected object");
        const auto& q = e["query"];
        if (!q.contains("kind") || !q["kind"].is_string() || !query_kind_from_name(q["kind"].get<std::string>()))
            corrupt(id, "expectation query has no known kind");
        if (q.contains("dag")) corrupt(id, "expectation queries take the entry's DAG, not their own");
        entry.expectations.push_back({q, e["expected"]});
    }
    return entry;
}

std::vector<CorpusEntry> load_corpus(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::corrupt_corpus, "corpus directory " + dir.string() + " not found");
    std::vector<std::string> ids;
    for (const auto& item : fs::directory_iterator(dir)) {
        const auto name = item.path().filename().string();
        if (item.is_regular_file() && item.path().extension() == ".dag") ids.push_back(item.path().stem().string());
        else if (name.ends_with(".expect.json")) {
            const auto id = name.substr(0, name.size() - std::string(".expect.json").size());
            if (!fs::exists(dir / (id + ".dag"))) corrupt(id, "expectation file has no matching .dag");
        }
    }
    std::sort(ids.begin(), ids.end());
    std::vector<CorpusEntry> out;
    for (const auto& id : ids) {
        const auto expect = dir / (id + ".expect.json");
        if (!fs::exists(expect)) corrupt(id, "missing " + expect.filename().string());
        out.push_back(make_entry(id, read_file(dir / (id + ".dag")), read_file(expect)));
    }
    return out;
}

bool ReplayReport::passed() const { return failures() == 0; }

std::size_t ReplayReport::failures() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; }));
}

std::optional<std::string> subset_mismatch(const Report& expected, const Report& actual) {
    return mismatch_at(expected, actual, "");
}

ReplayReport replay(const CorpusEntry& entry) {
    ReplayReport report;
    report.id = entry.id;
    for (std::size_t i = 0; i < entry.expectations.size(); ++i) {
        const auto& e = entry.expectations[i];
        ExpectationResult r;
        r.index = i;
        r.kind = e.query["kind"].get<std::string>();
        r.expected = Report::parse(e.expected.dump());
        json body = e.query;
        body["dag"] = entry.dag_source;
        try {
            r.actual = analyze(*query_kind_from_name(r.kind), body);
        } catch (const std::exception& ex) {
            r.actual = error_report(ex);
        }
        auto m = subset_mismatch(r.expected, r.actual);
        r.passed = !m;
        r.mismatch = m.value_or("");
        r.witness = find_witness(r.actual);
        report.results.push_back(std::move(r));
    }
    return report;
}

Report catalog_json(const std::vector<CorpusEntry>& entries) {
    Report list = Report::array();
    for (const auto& e : entries)
        list.push_back({{"id", e.id}, {"provenance", e.provenance}, {"expectations", e.expectations.size()}});
    return Report{{"entries", list}, {"count", entries.size()}, {"kind", "corpus"}};
}

Report entry_json(const CorpusEntry& entry) {
    Report expectations = Report::array();
    for (const auto& e : entry.expectations)
        expectations.push_back({{"query", Report::parse(e.query.dump())}, {"expected", Report::parse(e.expected.dump())}});
    Report out;
    out["id"] = entry.id;
    out["provenance"] = entry.provenance;
    out["notes"] = entry.notes;
    out["dag"] = entry.dag_source;
    out["expectations"] = expectations;
    out["kind"] = "corpus_entry";
    return out;
}

Report replay_json(const std::vector<ReplayReport>& reports) {
    Report entries = Report::array();
    std::size_t passed = 0, expectations = 0, failed = 0;
    for (const auto& rep : reports) {
        Report failures = Report::array();
        for (const auto& r : rep.results) {
            ++expectations;
            if (r.passed) continue;
            ++failed;
            failures.push_back({{"index", r.index},
                                {"query_kind", r.kind},
                                {"mismatch", r.mismatch},
                                {"expected", r.expected},
                                {"actual", r.actual},
                                {"witness", r.witness}});
        }
        if (rep.passed()) ++passed;
        entries.push_back({{"id", rep.id}, {"passed", rep.passed()}, {"expectations", rep.results.size()},
                           {"failures", failures}});
    }
    Report out;
    out["passed"] = passed == reports.size();
    out["entries_passed"] = passed;
    out["entries_total"] = reports.size();
    out["expectations_total"] = expectations;
    out["expectations_failed"] = failed;
    out["entries"] = entries;
    out["kind"] = "corpus_replay";
    return out;
}

} // namespace egp
