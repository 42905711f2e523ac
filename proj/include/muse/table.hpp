#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "muse/canonical.hpp"
#include "muse/errors.hpp"
#include "muse/rng.hpp"

namespace muse {

enum class ColumnType { Numeric, Categorical };

inline const char* to_string(ColumnType t) {
    return t == ColumnType::Numeric ? "numeric" : "categorical";
}

struct Schema {
    std::vector<std::pair<std::string, ColumnType>> columns;

    std::size_t size() const { return columns.size(); }
    const std::string& name(std::size_t j) const { return columns[j].first; }
    ColumnType type(std::size_t j) const { return columns[j].second; }

    void validate() const {
        std::unordered_set<std::string> seen;
        for (const auto& [name, type] : columns) {
            (void)type;
            if (!seen.insert(name).second)
                throw SchemaMismatch("duplicate column name: " + name);
        }
    }

    bool operator==(const Schema&) const = default;
};

// A cell is either a finite double or a UTF-8 string.
using CellValue = std::variant<double, std::string>;
using Row = std::vector<CellValue>;

inline bool is_numeric(const CellValue& c) {
    return std::holds_alternative<double>(c);
}
inline double num(const CellValue& c) { return std::get<double>(c); }
inline const std::string& cat(const CellValue& c) {
    return std::get<std::string>(c);
}

/// Immutable typed columnar dataset. Construction validates every row
/// against the schema, rejects non-finite numerics and snaps numeric
/// cells onto the canonical 6-fractional-digit grid, so a Table equals
/// its own CSV round-trip.
class Table {
public:
    Table() = default;

    Table(Schema schema, std::vector<Row> rows)
        : schema_(std::move(schema)), rows_(std::move(rows)) {
        schema_.validate();
        const std::size_t m = schema_.size();
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            Row& row = rows_[i];
            if (row.size() != m)
                throw SchemaMismatch("row " + std::to_string(i) + " has " +
                                     std::to_string(row.size()) +
                                     " cells, schema has " + std::to_string(m));
            for (std::size_t j = 0; j < m; ++j) {
                const bool want_num = schema_.type(j) == ColumnType::Numeric;
                if (want_num != is_numeric(row[j]))
                    throw SchemaMismatch("row " + std::to_string(i) + " col " +
                                         std::to_string(j) +
                                         ": cell type does not match schema");
                if (want_num) {
                    double v = num(row[j]);
                    if (!std::isfinite(v))
                        throw NonFiniteValue("row " + std::to_string(i) +
                                             " col " + std::to_string(j) +
                                             ": non-finite numeric value");
                    row[j] = canonical_quantize(v);
                }
            }
        }
    }

    const Schema& schema() const { return schema_; }
    std::size_t n_rows() const { return rows_.size(); }
    std::size_t n_cols() const { return schema_.size(); }
    const Row& row(std::size_t i) const { return rows_[i]; }
    const std::vector<Row>& rows() const { return rows_; }
    const CellValue& cell(std::size_t i, std::size_t j) const {
        return rows_[i][j];
    }

    std::vector<std::size_t> numeric_columns() const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n_cols(); ++j)
            if (schema_.type(j) == ColumnType::Numeric) out.push_back(j);
        return out;
    }

    std::vector<double> numeric_column(std::size_t j) const {
        if (j >= n_cols() || schema_.type(j) != ColumnType::Numeric)
            throw NotNumericColumn("column " + std::to_string(j) +
                                   " is not numeric");
        std::vector<double> out;
        out.reserve(n_rows());
        for (const Row& r : rows_) out.push_back(num(r[j]));
        return out;
    }

    std::vector<std::string> categorical_column(std::size_t j) const {
        if (j >= n_cols() || schema_.type(j) == ColumnType::Numeric)
            throw SchemaMismatch("column " + std::to_string(j) +
                                 " is not categorical");
        std::vector<std::string> out;
        out.reserve(n_rows());
        for (const Row& r : rows_) out.push_back(cat(r[j]));
        return out;
    }

    bool operator==(const Table&) const = default;

private:
    Schema schema_;
    std::vector<Row> rows_;
};

// Seeded random partition of row indices into groups of m plus the
// N mod m remainder. Pure in (n_rows, m, seed).
struct GroupSplit {
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> remainder;
};

inline GroupSplit split_groups(const Table& table, std::size_t m,
                               std::uint64_t seed) {
    if (table.n_rows() == 0) throw EmptyTable("cannot split an empty table");
    if (m < 1) throw InvalidConfig("group size m must be >= 1");
    std::vector<std::size_t> idx(table.n_rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    SplitMix64 rng(seed);
    seeded_shuffle(idx, rng);

    GroupSplit out;
    const std::size_t n_groups = table.n_rows() / m;
    out.groups.reserve(n_groups);
    std::size_t k = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
        out.groups.emplace_back(idx.begin() + k, idx.begin() + k + m);
        k += m;
    }
    out.remainder.assign(idx.begin() + k, idx.end());
    return out;
}

/// Sorted snapshot of one numeric column, the reference distribution for
/// empirical quantile ranks. Large columns are thinned to max_points by
/// even striding over the sorted array; both endpoints are always kept.
struct ColumnEcdf {
    std::size_t column_index = 0;
    std::vector<double> sorted_values;
    std::size_t n_source = 0;
};

inline ColumnEcdf column_ecdf(const Table& table, std::size_t column_index,
                              std::size_t max_points = 10000) {
    std::vector<double> vals = table.numeric_column(column_index);
    if (vals.empty()) throw EmptyTable("cannot build ECDF of an empty column");
    if (max_points < 2) max_points = 2;
    std::sort(vals.begin(), vals.end());

    ColumnEcdf e;
    e.column_index = column_index;
    e.n_source = vals.size();
    if (vals.size() <= max_points) {
        e.sorted_values = std::move(vals);
    } else {
        e.sorted_values.reserve(max_points);
        const std::size_t n = vals.size();
        for (std::size_t i = 0; i < max_points; ++i) {
            std::size_t pos = (i * (n - 1)) / (max_points - 1);
            e.sorted_values.push_back(vals[pos]);
        }
    }
    return e;
}

}  // namespace muse
