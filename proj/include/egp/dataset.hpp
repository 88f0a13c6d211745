#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "egp/graph.hpp"

namespace egp {

/// Observational sampling, or do(node = value).
struct Regime {
    std::optional<std::string> node;
    double value = 0.0;

    static Regime observational() { return {}; }
    static Regime intervention(std::string node, double value) { return {std::move(node), value}; }

    bool is_observational() const { return !node.has_value(); }
    /// "observational" or "do(D=1)"
    std::string label() const;
};

enum class DataSource { simulated, ingested };

struct DatasetMeta {
    std::uint64_t seed = 0;
    Regime regime;
    DataSource source = DataSource::ingested;
};

/// Column-named numeric table, one row per unit.
struct Dataset {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows x columns
    DatasetMeta meta;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    bool has_column(std::string_view name) const;
    /// Throws missing_column.
    std::size_t column_index(std::string_view name) const;
    Eigen::VectorXd column(std::string_view name) const;
};

/// Header row of names, then decimal values; LF line endings.
Dataset read_csv(std::istream& in);
Dataset read_csv_string(const std::string& text);
void write_csv(std::ostream& out, const Dataset& data);
std::string write_csv_string(const Dataset& data);

/// Every observed node of `g` must be a column (missing_column otherwise).
void require_columns(const Dataset& data, const CausalGraph& g);

} // namespace egp
