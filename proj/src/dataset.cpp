#include "egp/dataset.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "egp/error.hpp"

namespace egp {

std::string Regime::label() const {
    if (!node) return "observational";
    std::ostringstream out;
    out << "do(" << *node << "=" << value << ")";
    return out.str();
}

bool Dataset::has_column(std::string_view name) const {
    for (const auto& c : columns)
        if (c == name) return true;
    return false;
}

std::size_t Dataset::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw Error(ErrorCode::missing_column, "data has no column '" + std::string(name) + "'");
}

Eigen::VectorXd Dataset::column(std::string_view name) const {
    return values.col(static_cast<Eigen::Index>(column_index(name)));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

Dataset read_csv(std::istream& in) {
    Dataset data;
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line()) throw Error(ErrorCode::io_error, "CSV input is empty");
    data.columns = split_line(line);
    std::set<std::string> unique;
    for (const auto& c : data.columns) {
        if (c.empty()) throw Error(ErrorCode::io_error, "CSV header has an empty column name");
        if (!unique.insert(c).second)
            throw Error(ErrorCode::io_error, "CSV header repeats column '" + c + "'");
    }

    std::vector<double> cells;
    std::size_t rows = 0;
    while (next_line()) {
        auto fields = split_line(line);
        if (fields.size() != data.columns.size())
            throw Error(ErrorCode::io_error, "CSV line " + std::to_string(line_no) + " has " +
                                                 std::to_string(fields.size()) + " fields, expected " +
                                                 std::to_string(data.columns.size()));
        for (const auto& f : fields) {
            double v = 0;
            const char* begin = f.data();
            const char* end = f.data() + f.size();
            while (begin < end && *begin == ' ') ++begin;
            if (begin < end && *begin == '+') ++begin;
            auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc() || ptr != end || !std::isfinite(v))
                throw Error(ErrorCode::io_error, "CSV line " + std::to_string(line_no) +
                                                     ": '" + f + "' is not a finite number");
            cells.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw Error(ErrorCode::io_error, "CSV input has no data rows");
    const auto k = data.columns.size();
    data.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < k; ++c)
            data.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * k + c];
    data.meta.source = DataSource::ingested;
    return data;
}

Dataset read_csv_string(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) out << (c ? "," : "") << csv_cell(data.columns[c]);
    out << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, data.values(r, c));
            if (c) out << ',';
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
}

std::string write_csv_string(const Dataset& data) {
    std::ostringstream out;
    write_csv(out, data);
    return out.str();
}

void require_columns(const Dataset& data, const CausalGraph& g) {
    for (const auto& n : g.nodes())
        if (!n.role.latent && !data.has_column(n.name))
            throw Error(ErrorCode::missing_column,
                        "data has no column for observed node '" + n.name + "'");
}

} // namespace egp
